//! Classical Runge–Kutta time stepping with CFL control and blow-up-aware stopping.

use serde::{Deserialize, Serialize};

use crate::analysis::{diagnostics, DiagnosticsRecord};
use crate::dynamics::{momentum_tendency, velocity_tendency, ModelParams, SolutionState};
use crate::error::{Error, Result};
use crate::spectral::{Complex64, Field, Spectral};

/// Seam amplitude that triggers a warning.
pub const SEAM_WARNING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Evolve m in conservative form and recover u by Helmholtz inversion.
    #[default]
    Momentum,
    /// Evolve u through the nonlocal form; m is recovered as u − u_xx.
    NonlocalVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub dt_init: f64,
    /// Safety factor on `h / ‖V‖_∞`.
    pub cfl: f64,
    pub t_end: f64,
    /// Runs stop with `BlowupDetected` once `‖m‖_∞` reaches this value.
    pub max_m_inf: f64,
    pub max_steps: usize,
    /// When false, every step uses `dt_init` unless the CFL bound or `t_end` forces less.
    pub adaptive: bool,
    /// Relative step-doubling tolerance for adaptive runs; `None` uses the CFL bound only.
    pub error_tol: Option<f64>,
    /// Abort when `max_{|x| ≥ L/2} |m|` exceeds this fraction of `‖m‖_∞`; `None` disables.
    pub seam_abort: Option<f64>,
    pub formulation: Formulation,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-2,
            cfl: 0.3,
            t_end: 1.0,
            max_m_inf: 1e4,
            max_steps: 1_000_000,
            adaptive: true,
            error_tol: None,
            seam_abort: Some(1e-6),
            formulation: Formulation::Momentum,
        }
    }
}

impl StepperConfig {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt_init: dt,
            t_end,
            adaptive: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config_at(format!("stepper.{field}"), msg));
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return bad("dt_init", "must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl", "must lie in (0, 1]");
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end", "must be nonnegative");
        }
        if !(self.max_m_inf > 0.0) {
            return bad("max_m_inf", "must be positive");
        }
        if let Some(tol) = self.error_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return bad("error_tol", "must be positive");
            }
        }
        if let Some(s) = self.seam_abort {
            if !(s > 0.0) {
                return bad("seam_abort", "must be positive");
            }
        }
        Ok(())
    }
}

/// How often records and history frames are produced, in accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cadence {
    pub record_every: usize,
    /// Zero disables field history.
    pub history_every: usize,
}

impl Default for Cadence {
    fn default() -> Self {
        Self {
            record_every: 10,
            history_every: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    ReachedTEnd,
    BlowupDetected,
    DomainContaminated,
    StepBudgetExhausted,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::ReachedTEnd => "reached_t_end",
            RunStatus::BlowupDetected => "blowup_detected",
            RunStatus::DomainContaminated => "domain_contaminated",
            RunStatus::StepBudgetExhausted => "step_budget_exhausted",
        }
    }
}

/// Receives diagnostics records from a single run, in order.
pub trait DiagnosticsSink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()>;
}

impl DiagnosticsSink for Vec<DiagnosticsRecord> {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.push(*rec);
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl DiagnosticsSink for NullSink {
    fn record(&mut self, _: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

impl<A: DiagnosticsSink, B: DiagnosticsSink> DiagnosticsSink for (A, B) {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.0.record(rec)?;
        self.1.record(rec)
    }
}

impl<S: DiagnosticsSink + ?Sized> DiagnosticsSink for &mut S {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        (**self).record(rec)
    }
}

/// Stored momentum and its time derivative at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub m: Field,
    pub m_t: Field,
}

/// Momentum snapshots of a run, interpolated in time by cubic Hermite
/// polynomials built from `m` and `m_t` at the bracketing frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldHistory {
    frames: Vec<Frame>,
}

impl FieldHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, frame: Frame) {
        if let Some(last) = self.frames.last() {
            if frame.t <= last.t {
                return;
            }
        }
        self.frames.push(frame);
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.frames.first()?.t, self.frames.last()?.t))
    }

    /// Momentum at time `t` inside the stored span.
    pub fn momentum_at(&self, t: f64) -> Result<Field> {
        let (t0, t1) = self
            .span()
            .ok_or_else(|| Error::config("field history is empty"))?;
        if t < t0 || t > t1 {
            return Err(Error::config(format!(
                "time {t} outside stored history [{t0}, {t1}]"
            )));
        }
        let i = self.frames.partition_point(|f| f.t <= t);
        if i == 0 {
            return Ok(self.frames[0].m.clone());
        }
        let a = &self.frames[i - 1];
        if a.t == t || i == self.frames.len() {
            return Ok(a.m.clone());
        }
        let b = &self.frames[i];
        let span = b.t - a.t;
        let s = (t - a.t) / span;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = (s3 - 2.0 * s2 + s) * span;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = (s3 - s2) * span;
        let values = (0..a.m.values().len())
            .map(|j| {
                h00 * a.m.values()[j]
                    + h10 * a.m_t.values()[j]
                    + h01 * b.m.values()[j]
                    + h11 * b.m_t.values()[j]
            })
            .collect();
        Field::new(*a.m.grid(), values)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub final_state: SolutionState,
    pub history: Vec<DiagnosticsRecord>,
    pub fields: FieldHistory,
    pub steps: usize,
    /// Accepted step sizes in order.
    pub step_sizes: Vec<f64>,
    pub warnings: Vec<String>,
}

fn rk4<F>(c: &[Complex64], dt: f64, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let axpy = |a: f64, k: &[Complex64]| -> Vec<Complex64> {
        c.iter().zip(k).map(|(c, k)| c + k * a).collect()
    };
    let k1 = f(c)?;
    let k2 = f(&axpy(0.5 * dt, &k1))?;
    let k3 = f(&axpy(0.5 * dt, &k2))?;
    let k4 = f(&axpy(dt, &k3))?;
    Ok((0..c.len())
        .map(|j| c[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0))
        .collect())
}

fn advance(
    sp: &Spectral,
    state: &SolutionState,
    dt: f64,
    params: &ModelParams,
    formulation: Formulation,
) -> Result<SolutionState> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    if !(dt > 0.0) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    let m = match formulation {
        Formulation::Momentum => {
            let c = sp.coefficients(&state.m)?;
            let next = rk4(&c, dt, |m| Ok(momentum_tendency(sp, m, params)))?;
            sp.field_from_coefficients(next)
        }
        Formulation::NonlocalVelocity => {
            let c = sp.coefficients(&state.u)?;
            let next = rk4(&c, dt, |u| velocity_tendency(sp, u, params))?;
            let mc = next
                .iter()
                .zip(sp.k())
                .map(|(c, &k)| c * (1.0 + k * k))
                .collect();
            sp.field_from_coefficients(mc)
        }
    };
    m.ensure_finite("momentum after step")?;
    SolutionState::from_momentum(sp, state.t + dt, m)
}

/// One classical RK4 step of the momentum equation; u is refreshed from m.
pub fn step_rk4(sp: &Spectral, state: &SolutionState, dt: f64, params: &ModelParams) -> Result<SolutionState> {
    advance(sp, state, dt, params, Formulation::Momentum)
}

/// One RK4 step of the nonlocal velocity equation.
pub fn step_rk4_nonlocal(
    sp: &Spectral,
    state: &SolutionState,
    dt: f64,
    params: &ModelParams,
) -> Result<SolutionState> {
    advance(sp, state, dt, params, Formulation::NonlocalVelocity)
}

/// `‖V‖_∞` for the configured velocity law.
pub fn transport_speed(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<f64> {
    let ux = sp.derivative(&state.u)?;
    let w = crate::dynamics::wave_argument(sp, &state.u, &ux)?;
    Ok(w.values()
        .iter()
        .map(|&w| params.mode.velocity_of(w).abs())
        .fold(0.0, f64::max))
}

fn frame(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<Frame> {
    let c = sp.coefficients(&state.m)?;
    let m_t = sp.field_from_coefficients(momentum_tendency(sp, &c, params));
    Ok(Frame {
        t: state.t,
        m: state.m.clone(),
        m_t,
    })
}

/// Integrates from `state0` until `t_end` or a stopping rule fires.
pub fn run(
    sp: &Spectral,
    state0: &SolutionState,
    cfg: &StepperConfig,
    params: &ModelParams,
    cadence: &Cadence,
    sink: &mut dyn DiagnosticsSink,
) -> Result<RunOutcome> {
    cfg.validate()?;
    if cadence.record_every == 0 {
        return Err(Error::config_at("outputs.record_every", "must be positive"));
    }
    let mut state = SolutionState::from_momentum(sp, state0.t, state0.m.clone())?;
    let h = sp.grid().spacing();
    let mut records = Vec::new();
    let mut fields = FieldHistory::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut step_sizes = Vec::new();
    let mut integral = 0.0;
    let mut m_inf = state.m.max_abs();
    let mut steps = 0usize;
    let mut dt_prev: Option<f64> = None;
    let mut dt_next = cfg.dt_init;
    let mut last_recorded = None;
    let mut seam_warned = false;

    let mut emit = |state: &SolutionState,
                    integral: f64,
                    steps: usize,
                    records: &mut Vec<DiagnosticsRecord>,
                    last: &mut Option<usize>|
     -> Result<()> {
        if *last == Some(steps) {
            return Ok(());
        }
        let rec = diagnostics(sp, state, integral)?;
        sink.record(&rec)?;
        records.push(rec);
        *last = Some(steps);
        Ok(())
    };

    emit(&state, integral, steps, &mut records, &mut last_recorded)?;
    if cadence.history_every > 0 {
        fields.push(frame(sp, &state, params)?);
    }

    let status = loop {
        let seam = state.m.seam_max();
        if seam > SEAM_WARNING && !seam_warned {
            let msg = format!("momentum reaches {seam:e} beyond |x| = L/2 at t = {}", state.t);
            log::warn!("{msg}");
            warnings.push(msg);
            seam_warned = true;
        }
        if let Some(limit) = cfg.seam_abort {
            if seam > limit * m_inf.max(f64::MIN_POSITIVE) {
                break RunStatus::DomainContaminated;
            }
        }
        if m_inf >= cfg.max_m_inf {
            break RunStatus::BlowupDetected;
        }
        let remaining = cfg.t_end - state.t;
        if remaining <= 1e-14 * cfg.t_end.abs().max(1.0) {
            break RunStatus::ReachedTEnd;
        }
        if steps >= cfg.max_steps {
            break RunStatus::StepBudgetExhausted;
        }

        let speed = transport_speed(sp, &state, params)?;
        let cfl_bound = cfg.cfl * h / speed.max(1e-12);
        let mut dt = if cfg.adaptive {
            let grown = dt_prev.map_or(dt_next, |p| dt_next.min(2.0 * p));
            grown.min(cfl_bound)
        } else {
            cfg.dt_init.min(cfl_bound)
        };
        if dt >= remaining * (1.0 - 1e-12) {
            dt = remaining;
        }

        let (next, factor) = loop {
            if dt < 1e-12 * cfg.dt_init {
                break (None, 1.0);
            }
            let attempt = match (cfg.adaptive, cfg.error_tol) {
                (true, Some(tol)) => doubled_step(sp, &state, dt, params, cfg.formulation, tol),
                _ => advance(sp, &state, dt, params, cfg.formulation).map(|s| (s, 2.0)),
            };
            match attempt {
                Ok((_, factor)) if factor < 1.0 => dt *= factor.max(0.1),
                Ok((s, factor)) => break (Some(s), factor),
                Err(Error::Numeric(_)) => dt *= 0.5,
                Err(e) => return Err(e),
            }
        };
        let Some(next) = next else {
            break RunStatus::BlowupDetected;
        };

        let dt_taken = next.t - state.t;
        let next_inf = next.m.max_abs();
        integral += 0.5 * dt_taken * (m_inf * m_inf + next_inf * next_inf);
        m_inf = next_inf;
        state = next;
        steps += 1;
        step_sizes.push(dt_taken);
        dt_prev = Some(dt_taken);
        dt_next = if cfg.error_tol.is_some() {
            dt_taken * factor.clamp(0.1, 2.0)
        } else {
            2.0 * dt_taken
        };

        if steps.is_multiple_of(cadence.record_every) {
            emit(&state, integral, steps, &mut records, &mut last_recorded)?;
        }
        if cadence.history_every > 0 && steps.is_multiple_of(cadence.history_every) {
            fields.push(frame(sp, &state, params)?);
        }
    };

    emit(&state, integral, steps, &mut records, &mut last_recorded)?;
    if cadence.history_every > 0 {
        fields.push(frame(sp, &state, params)?);
    }
    Ok(RunOutcome {
        status,
        final_state: state,
        history: records,
        fields,
        steps,
        step_sizes,
        warnings,
    })
}

/// Full step versus two half steps. Returns the two-half-step state and the
/// suggested step factor `0.9 (tol/err)^{1/5}`; a factor below one means reject.
fn doubled_step(
    sp: &Spectral,
    state: &SolutionState,
    dt: f64,
    params: &ModelParams,
    formulation: Formulation,
    tol: f64,
) -> Result<(SolutionState, f64)> {
    let full = advance(sp, state, dt, params, formulation)?;
    let half = advance(sp, state, 0.5 * dt, params, formulation)?;
    let two = advance(sp, &half, 0.5 * dt, params, formulation)?;
    let diff = (&full.m - &two.m).max_abs();
    let err = diff / two.m.max_abs().max(1.0);
    let factor = if err == 0.0 {
        2.0
    } else {
        (0.9 * (tol / err).powf(0.2)).min(2.0)
    };
    let factor = if err > tol { factor.min(0.99) } else { factor.max(1.0) };
    Ok((two, factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::h1;
    use crate::spectral::GridSpec;

    fn gaussian(sp: &Spectral, amp: f64, width: f64) -> SolutionState {
        let m = Field::from_fn(*sp.grid(), |x| amp * (-(x / width).powi(2)).exp());
        SolutionState::from_momentum(sp, 0.0, m).unwrap()
    }

    #[test]
    fn zero_state_only_advances_time() {
        let g = GridSpec::new(64, 10.0).unwrap();
        let sp = Spectral::new(g);
        let s = SolutionState::zeros(g);
        let next = step_rk4(&sp, &s, 0.1, &ModelParams::sine()).unwrap();
        assert_eq!(next.t, 0.1);
        assert_eq!(next.m, s.m);
        assert_eq!(next.u, s.u);
    }

    #[test]
    fn zero_step_is_identity() {
        let g = GridSpec::new(128, 20.0).unwrap();
        let sp = Spectral::new(g);
        let s = gaussian(&sp, 1.0, 2.0);
        assert_eq!(step_rk4(&sp, &s, 0.0, &ModelParams::sine()).unwrap(), s);
    }

    #[test]
    fn fourth_order_convergence() {
        let g = GridSpec::new(256, 20.0).unwrap();
        let sp = Spectral::new(g);
        let s0 = gaussian(&sp, 1.0, 2.0);
        let p = ModelParams::sine();
        let solve = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let mut s = s0.clone();
            for _ in 0..n {
                s = step_rk4(&sp, &s, dt, &p).unwrap();
            }
            s.m
        };
        let sols: Vec<Field> = [0.1, 0.05, 0.025].iter().map(|&dt| solve(dt)).collect();
        let e1 = (&sols[0] - &sols[1]).max_abs();
        let e2 = (&sols[1] - &sols[2]).max_abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.6, "ratio {ratio}");
    }

    #[test]
    fn nonlocal_stepper_tracks_momentum_stepper() {
        let g = GridSpec::new(512, 20.0).unwrap();
        let sp = Spectral::new(g);
        let p = ModelParams::sine();
        let mut a = gaussian(&sp, 1.0, 2.0);
        let mut b = a.clone();
        for _ in 0..20 {
            a = step_rk4(&sp, &a, 0.01, &p).unwrap();
            b = step_rk4_nonlocal(&sp, &b, 0.01, &p).unwrap();
        }
        assert!((&a.u - &b.u).max_abs() < 1e-9);
    }

    #[test]
    fn zero_data_reaches_end() {
        let g = GridSpec::new(64, 10.0).unwrap();
        let sp = Spectral::new(g);
        let mut recs = Vec::new();
        let out = run(
            &sp,
            &SolutionState::zeros(g),
            &StepperConfig::default(),
            &ModelParams::sine(),
            &Cadence::default(),
            &mut recs,
        )
        .unwrap();
        assert_eq!(out.status, RunStatus::ReachedTEnd);
        assert!((out.final_state.t - 1.0).abs() < 1e-14);
        assert!(recs.iter().all(|r| r.h1 == 0.0));
        assert_eq!(recs, out.history);
    }

    #[test]
    fn step_budget() {
        let g = GridSpec::new(128, 20.0).unwrap();
        let sp = Spectral::new(g);
        let cfg = StepperConfig {
            max_steps: 5,
            ..StepperConfig::fixed(0.01, 1.0)
        };
        let cad = Cadence {
            record_every: 1,
            history_every: 1,
        };
        let out = run(&sp, &gaussian(&sp, 1.0, 2.0), &cfg, &ModelParams::sine(), &cad, &mut NullSink).unwrap();
        assert_eq!(out.status, RunStatus::StepBudgetExhausted);
        assert_eq!(out.steps, 5);
        assert_eq!(out.step_sizes.len(), 5);
        assert_eq!(out.history.len(), 6);
        assert_eq!(out.fields.frames().len(), 6);
    }

    #[test]
    fn adaptive_steps_respect_cfl_and_growth() {
        let g = GridSpec::new(256, 20.0).unwrap();
        let sp = Spectral::new(g);
        let p = ModelParams::sine();
        let cfg = StepperConfig {
            dt_init: 1e-4,
            t_end: 1.0,
            error_tol: Some(1e-9),
            ..StepperConfig::default()
        };
        let s0 = gaussian(&sp, 1.0, 2.0);
        let out = run(&sp, &s0, &cfg, &p, &Cadence { record_every: 1, history_every: 0 }, &mut NullSink).unwrap();
        assert_eq!(out.status, RunStatus::ReachedTEnd);
        for w in out.step_sizes.windows(2) {
            assert!(w[1] <= 2.0 * w[0] * (1.0 + 1e-12));
        }
        // replay and check every step against the CFL bound of its start state
        let mut s = s0;
        for &dt in &out.step_sizes {
            let bound = cfg.cfl * g.spacing() / transport_speed(&sp, &s, &p).unwrap().max(1e-12);
            assert!(dt <= bound * (1.0 + 1e-12));
            s = doubled_step(&sp, &s, dt, &p, Formulation::Momentum, 1e-9).unwrap().0;
        }
    }

    #[test]
    fn threshold_stops_run() {
        let g = GridSpec::new(256, 20.0).unwrap();
        let sp = Spectral::new(g);
        let cfg = StepperConfig {
            max_m_inf: 0.5,
            ..StepperConfig::default()
        };
        let out = run(&sp, &gaussian(&sp, 1.0, 2.0), &cfg, &ModelParams::sine(), &Cadence::default(), &mut NullSink)
            .unwrap();
        assert_eq!(out.status, RunStatus::BlowupDetected);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn seam_mass_aborts() {
        let g = GridSpec::new(256, 10.0).unwrap();
        let sp = Spectral::new(g);
        let out = run(&sp, &gaussian(&sp, 1.0, 4.0), &StepperConfig::default(), &ModelParams::sine(), &Cadence::default(), &mut NullSink)
            .unwrap();
        assert_eq!(out.status, RunStatus::DomainContaminated);
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn conservation_and_determinism() {
        let g = GridSpec::new(256, 20.0).unwrap();
        let sp = Spectral::new(g);
        let s0 = gaussian(&sp, 1.0, 2.0);
        let go = || {
            let mut recs = Vec::new();
            run(&sp, &s0, &StepperConfig::fixed(0.01, 0.5), &ModelParams::sine(), &Cadence::default(), &mut recs).unwrap();
            recs
        };
        let a = go();
        let b = go();
        assert_eq!(a, b);
        let h0 = h1(&s0);
        for r in &a {
            assert!((r.h1 - h0).abs() < 1e-9 * h0);
        }
        assert!(a.windows(2).all(|w| w[1].blowup_integral >= w[0].blowup_integral));
    }

    #[test]
    fn hermite_history_is_exact_at_frames_and_accurate_between() {
        let g = GridSpec::new(256, 20.0).unwrap();
        let sp = Spectral::new(g);
        let p = ModelParams::sine();
        let cad = Cadence { record_every: 1, history_every: 4 };
        let fine = run(&sp, &gaussian(&sp, 1.0, 2.0), &StepperConfig::fixed(0.005, 0.2), &p, &Cadence { record_every: 1, history_every: 1 }, &mut NullSink).unwrap();
        let coarse = run(&sp, &gaussian(&sp, 1.0, 2.0), &StepperConfig::fixed(0.005, 0.2), &p, &cad, &mut NullSink).unwrap();
        for f in fine.fields.frames() {
            let interp = coarse.fields.momentum_at(f.t).unwrap();
            assert!((&interp - &f.m).max_abs() < 1e-8, "t = {}", f.t);
        }
        assert!(coarse.fields.momentum_at(0.3).is_err());
    }
}
