//! NDJSON and CSV record output with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

use crate::analysis::DiagnosticsRecord;
use crate::error::Result;
use crate::integrator::DiagnosticsSink;

/// Compact JSON that prints every float in scientific notation with 17
/// significant digits.
#[derive(Debug, Default, Clone, Copy)]
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        CompactFormatter.begin_object_key(writer, first)
    }
}

/// One JSON object on a single line, without the trailing newline.
pub fn to_ndjson_line<T: Serialize + ?Sized>(record: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    record.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub struct NdjsonWriter<W: Write> {
    out: W,
}

impl<W: Write> NdjsonWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write<T: Serialize + ?Sized>(&mut self, record: &T) -> Result<()> {
        let line = to_ndjson_line(record)?;
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Streams diagnostics records as NDJSON.
pub struct NdjsonSink<W: Write>(pub NdjsonWriter<W>);

impl<W: Write> NdjsonSink<W> {
    pub fn new(out: W) -> Self {
        Self(NdjsonWriter::new(out))
    }
}

impl<W: Write> DiagnosticsSink for NdjsonSink<W> {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.0.write(rec)
    }
}

/// Plot table of `t, h1, m_inf, min_M, blowup_integral`.
pub struct CsvSink<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            header_written: false,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> DiagnosticsSink for CsvSink<W> {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        if !self.header_written {
            writeln!(self.out, "t,h1,m_inf,min_M,blowup_integral")?;
            self.header_written = true;
        }
        writeln!(
            self.out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            rec.t, rec.h1, rec.m_inf, rec.min_big_m, rec.blowup_integral
        )?;
        Ok(())
    }
}
