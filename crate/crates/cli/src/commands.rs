use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;

use smch::analysis::{certify, diagnostics, envelope_check};
use smch::characteristics::{
    advect, mbar_closed_form, mbar_ode_residual, qx_closed_form, qx_finite_difference, write_bundle_csv,
    HistoryFlow,
};
use smch::checks::{default_seeds, identity_battery, limit_check};
use smch::dynamics::SolutionState;
use smch::integrator::{run, Cadence, NullSink, RunOutcome, RunStatus};
use smch::picard::run_picard;
use smch::scenario::{
    build_initial_m, parse_scenario_with, save_snapshot, to_ndjson_line, CsvSink, InitialDataFamily,
    NdjsonSink, NdjsonWriter, Scenario,
};
use smch::{Error, Field, Result, Spectral};

/// Process exit contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Error,
    /// Blow-up detected or certificate fired.
    Broke,
    IdentityFailure,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(match o {
            Outcome::Ok => 0,
            Outcome::Error => 1,
            Outcome::Broke => 2,
            Outcome::IdentityFailure => 3,
        })
    }
}

fn status_outcome(status: RunStatus) -> Outcome {
    match status {
        RunStatus::ReachedTEnd | RunStatus::StepBudgetExhausted => Outcome::Ok,
        RunStatus::BlowupDetected => Outcome::Broke,
        RunStatus::DomainContaminated => Outcome::Error,
    }
}

/// Writes a one-line JSON error to stderr.
pub fn report_failure(kind: &str, path: Option<&str>, message: &str) {
    let line = json!({ "error": kind, "path": path, "message": message });
    eprintln!("{line}");
}

/// A parsed scenario with its grid, initial data and output directory.
pub struct Session {
    scenario: Scenario,
    sp: Spectral,
    m0: Field,
    out_dir: PathBuf,
}

impl Session {
    pub fn open(path: &Path, overrides: &[String], out: Option<PathBuf>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("cannot read scenario {}: {e}", path.display())))
        })?;
        let mut scenario = parse_scenario_with(&text, overrides)?;
        if let Some(dir) = out {
            scenario.outputs.directory = dir;
        }
        if let InitialDataFamily::FromFile { path: snap } = &mut scenario.initial_data {
            if snap.is_relative() {
                if let Some(base) = path.parent() {
                    *snap = base.join(&*snap);
                }
            }
        }
        let grid = scenario.grid_spec()?;
        let sp = Spectral::new(grid);
        let m0 = build_initial_m(&scenario.initial_data, grid)?.m;
        let out_dir = scenario.outputs.directory.clone();
        fs::create_dir_all(&out_dir)?;
        Ok(Self {
            scenario,
            sp,
            m0,
            out_dir,
        })
    }

    fn state0(&self) -> Result<SolutionState> {
        SolutionState::from_momentum(&self.sp, 0.0, self.m0.clone())
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    /// Writes a single NDJSON line to `name` and echoes it on stdout.
    fn emit<T: Serialize + ?Sized>(&self, name: &str, record: &T) -> Result<()> {
        let mut w = NdjsonWriter::new(self.create(name)?);
        w.write(record)?;
        w.flush()?;
        println!("{}", to_ndjson_line(record)?);
        Ok(())
    }

    fn integrate(&self, cadence: Cadence, sink: &mut dyn smch::integrator::DiagnosticsSink) -> Result<RunOutcome> {
        let s = &self.scenario;
        run(&self.sp, &self.state0()?, &s.stepper, &s.model, &cadence, sink)
    }

    fn run_summary(&self, command: &str, out: &RunOutcome) -> Result<serde_json::Value> {
        let last = out.history.last().map_or(0.0, |r| r.blowup_integral);
        let fin = diagnostics(&self.sp, &out.final_state, last)?;
        Ok(json!({
            "command": command,
            "status": out.status.as_str(),
            "t": out.final_state.t,
            "steps": out.steps,
            "warnings": out.warnings,
            "final": fin,
        }))
    }

    pub fn simulate(self) -> Result<Outcome> {
        let cadence = Cadence {
            history_every: 0,
            ..self.scenario.outputs.cadence()
        };
        let mut sinks = (
            NdjsonSink::new(self.create("diagnostics.ndjson")?),
            CsvSink::new(self.create("diagnostics.csv")?),
        );
        let out = self.integrate(cadence, &mut sinks)?;
        let (mut nd, csv) = sinks;
        nd.0.flush()?;
        csv.into_inner().flush()?;
        save_snapshot(&out.final_state, self.out_dir.join("final.smch"))?;
        self.emit("summary.ndjson", &self.run_summary("simulate", &out)?)?;
        Ok(status_outcome(out.status))
    }

    pub fn characteristics(self) -> Result<Outcome> {
        let out = self.integrate(self.scenario.outputs.cadence(), &mut NullSink)?;
        let Some((t0, t1)) = out.fields.span() else {
            return Err(Error::Config("the run stored no field history; set outputs.history_every".into()));
        };
        let dt = self.scenario.outputs.characteristic_dt;
        let count = ((t1 - t0) / dt + 1e-9).floor() as usize;
        let times: Vec<f64> = (0..=count).map(|i| t0 + i as f64 * dt).collect();
        let seeds = if self.scenario.seeds.is_empty() {
            default_seeds(&self.sp)
        } else {
            self.scenario.seeds.clone()
        };
        let flow = HistoryFlow::new(&self.sp, &out.fields, self.scenario.model);
        let mut bundle = advect(&seeds, &flow, &times)?;
        let fd = qx_finite_difference(&seeds, &flow, &times, 1e-3)?;
        let qx = qx_closed_form(&bundle);
        let m0: Vec<f64> = bundle.mbar.iter().map(|m| m[0]).collect();
        let mb = mbar_closed_form(&bundle, &m0)?;
        let residuals = if times.len() >= 3 {
            mbar_ode_residual(&bundle)?
        } else {
            vec![0.0; seeds.len()]
        };

        let mut rows = NdjsonWriter::new(self.create("characteristics.ndjson")?);
        for (s, &seed) in seeds.iter().enumerate() {
            let rel = |a: f64, b: f64| if a == b { 0.0 } else { ((a - b) / b).abs() };
            let qx_err = (0..times.len()).map(|i| rel(qx[s][i], fd[s][i])).fold(0.0, f64::max);
            let mb_err = (0..times.len()).map(|i| rel(mb[s][i], bundle.mbar[s][i])).fold(0.0, f64::max);
            let sign_preserved = bundle.mbar[s].iter().all(|v| v.signum() == m0[s].signum() || m0[s] == 0.0);
            rows.write(&json!({
                "seed": seed,
                "qx_relative_error": qx_err,
                "mbar_relative_error": mb_err,
                "mbar_ode_residual": residuals[s],
                "sign_preserved": sign_preserved,
            }))?;
        }
        rows.flush()?;
        bundle.qx = Some(fd);
        let mut csv = self.create("characteristics.csv")?;
        write_bundle_csv(&mut csv, &bundle, &qx, &mb)?;
        csv.flush()?;

        if let Some(settings) = self.scenario.certificate {
            match certify(&self.sp, &self.state0()?, settings.c) {
                Ok(cert) => {
                    let tracked = advect(&[cert.x0], &flow, &times)?;
                    match envelope_check(&tracked, 0, &cert) {
                        Ok(report) => {
                            let mut w = NdjsonWriter::new(self.create("envelope.ndjson")?);
                            w.write(&report)?;
                            w.flush()?;
                        }
                        Err(e) => log::warn!("envelope check skipped: {e}"),
                    }
                }
                Err(Error::Hypothesis(why)) => log::warn!("envelope check skipped: {why}"),
                Err(e) => return Err(e),
            }
        }
        let mut summary = self.run_summary("characteristics", &out)?;
        summary["seeds"] = json!(seeds);
        summary["output_times"] = json!(times.len());
        self.emit("summary.ndjson", &summary)?;
        Ok(status_outcome(out.status))
    }

    pub fn certify(self) -> Result<Outcome> {
        let c = self
            .scenario
            .certificate
            .ok_or_else(|| Error::Config("the certificate is disabled in this scenario (certificate: null)".into()))?
            .c;
        let cert = certify(&self.sp, &self.state0()?, c)?;
        self.emit("certificate.ndjson", &cert)?;
        Ok(if cert.fires { Outcome::Broke } else { Outcome::Ok })
    }

    pub fn picard(self) -> Result<Outcome> {
        let report = run_picard(&self.sp, &self.m0, &self.scenario.picard)?;
        self.emit("picard.ndjson", &report)?;
        Ok(Outcome::Ok)
    }

    pub fn limit_check(self) -> Result<Outcome> {
        let cfg = &self.scenario.limit_check;
        let report = limit_check(&self.sp, &self.m0, self.scenario.model.kappa, cfg)?;
        let mut csv = self.create("limit_check.csv")?;
        writeln!(csv, "epsilon,sup_difference,sup_difference_cubic,fitted_order")?;
        let order = report.fitted_order.map_or(String::new(), |o| format!("{o:.16e}"));
        for row in &report.rows {
            writeln!(
                csv,
                "{:.16e},{:.16e},{:.16e},{order}",
                row.epsilon, row.sup_diff_mch, row.sup_diff_cubic
            )?;
        }
        csv.flush()?;
        println!("{}", to_ndjson_line(&report)?);
        Ok(Outcome::Ok)
    }

    pub fn identities(self) -> Result<Outcome> {
        let s = &self.scenario;
        let results = identity_battery(&self.sp, &self.m0, s.model, &s.seeds, &s.identities)?;
        let mut w = NdjsonWriter::new(self.create("identities.ndjson")?);
        for r in &results {
            w.write(r)?;
        }
        w.flush()?;
        let failing: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        println!(
            "{}",
            json!({ "command": "identities", "checked": results.len(), "failed": failing })
        );
        if failing.is_empty() {
            Ok(Outcome::Ok)
        } else {
            report_failure("identity_failure", None, &format!("failing identities: {}", failing.join(", ")));
            Ok(Outcome::IdentityFailure)
        }
    }
}
