//! Binary momentum snapshots.
//!
//! Layout, little-endian: magic `SMCH` (4 bytes), version u32, n u32, 4 zero
//! bytes, L f64, t f64, then n f64 samples of m.

use std::fs;
use std::path::Path;

use crate::dynamics::SolutionState;
use crate::error::{Error, Result};
use crate::spectral::{Field, GridSpec, Spectral};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"SMCH";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

/// Decoded snapshot contents before `u` is reconstructed.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub t: f64,
    pub m: Field,
}

pub fn encode(state: &SolutionState) -> Vec<u8> {
    let grid = state.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * grid.n());
    buf.extend_from_slice(&SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&[0; 4]);
    buf.extend_from_slice(&grid.half_length().to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    for v in state.m.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    let format = |msg: String| Error::Format(msg);
    if bytes.len() < HEADER_LEN {
        return Err(format(format!("snapshot has {} bytes, shorter than the header", bytes.len())));
    }
    if bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(format("bad snapshot magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let real = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let version = word(4);
    if version != SNAPSHOT_VERSION {
        return Err(format(format!("unsupported snapshot version {version}")));
    }
    let n = word(8) as usize;
    let expected = HEADER_LEN + 8 * n;
    if bytes.len() != expected {
        return Err(format(format!(
            "snapshot for n = {n} should have {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let grid = GridSpec::new(n, real(16)).map_err(|e| format(format!("invalid snapshot grid: {e}")))?;
    let t = real(24);
    if !t.is_finite() {
        return Err(format(format!("snapshot time {t} is not finite")));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Snapshot {
        grid,
        t,
        m: Field::new(grid, values)?,
    })
}

pub fn save_snapshot(state: &SolutionState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(state))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    decode(&fs::read(path)?)
}

/// Loads a snapshot and reconstructs u by Helmholtz inversion.
pub fn load_snapshot(path: impl AsRef<Path>) -> Result<SolutionState> {
    let snap = read_snapshot(path)?;
    let sp = Spectral::new(snap.grid);
    SolutionState::from_momentum(&sp, snap.t, snap.m)
}
