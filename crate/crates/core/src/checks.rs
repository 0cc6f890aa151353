//! Composite verification runs: the small-amplitude mCH limit and the identity battery.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{h1, young_probe};
use crate::characteristics::{
    advect, mbar_closed_form, mbar_ode_residual, qx_closed_form, qx_finite_difference, HistoryFlow,
};
use crate::dynamics::{m_rhs, m_rhs_transport, u_rhs_nonlocal, Mode, ModelParams, SolutionState};
use crate::error::{Error, Result};
use crate::integrator::{run, Cadence, NullSink, RunStatus, StepperConfig};
use crate::scenario::{IdentityConfig, LimitCheckConfig};
use crate::spectral::{Field, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub epsilon: f64,
    /// `sup_t ‖m_sine − m_mch‖_∞`.
    pub sup_diff_mch: f64,
    /// `sup_t ‖m_sine − m_cubic‖_∞`.
    pub sup_diff_cubic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// Least-squares slope of `ln sup_diff_mch` against `ln ε`; absent with fewer
    /// than two positive differences.
    pub fitted_order: Option<f64>,
}

fn momentum_trajectory(sp: &Spectral, m0: &Field, params: ModelParams, cfg: &LimitCheckConfig) -> Result<Vec<Field>> {
    let s0 = SolutionState::from_momentum(sp, 0.0, m0.clone())?;
    let stepper = StepperConfig {
        seam_abort: None,
        ..StepperConfig::fixed(cfg.dt, cfg.horizon)
    };
    let cadence = Cadence {
        record_every: usize::MAX,
        history_every: 1,
    };
    let out = run(sp, &s0, &stepper, &params, &cadence, &mut NullSink)?;
    if out.status != RunStatus::ReachedTEnd {
        return Err(Error::numeric(format!(
            "limit run in {:?} mode stopped with {}",
            params.mode,
            out.status.as_str()
        )));
    }
    Ok(out.fields.frames().iter().map(|f| f.m.clone()).collect())
}

fn sup_difference(a: &[Field], b: &[Field]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::numeric("limit runs took different step sequences"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max))
}

/// Log-log least-squares slope over pairs with positive ordinates.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

/// Runs the sine, mCH and cubic models from `ε·profile` for each ε.
pub fn limit_check(sp: &Spectral, profile: &Field, kappa: f64, cfg: &LimitCheckConfig) -> Result<LimitReport> {
    let rows = cfg
        .epsilons
        .par_iter()
        .map(|&epsilon| {
            let m0 = profile.scale(epsilon);
            let params = |mode| ModelParams { kappa, mode };
            let sine = momentum_trajectory(sp, &m0, params(Mode::Sine), cfg)?;
            let mch = momentum_trajectory(sp, &m0, params(Mode::Mch), cfg)?;
            let cubic = momentum_trajectory(sp, &m0, params(Mode::Cubic), cfg)?;
            Ok(LimitRow {
                epsilon,
                sup_diff_mch: sup_difference(&sine, &mch)?,
                sup_diff_cubic: sup_difference(&sine, &cubic)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let diffs: Vec<f64> = rows.iter().map(|r| r.sup_diff_mch).collect();
    Ok(LimitReport {
        fitted_order: loglog_slope(&eps, &diffs),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl IdentityResult {
    fn measured(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    fn skipped(name: &str, why: String) -> Self {
        Self {
            name: name.into(),
            value: 0.0,
            tolerance: 0.0,
            passed: true,
            detail: Some(format!("skipped: {why}")),
        }
    }

    fn failed(name: &str, why: String) -> Self {
        Self {
            name: name.into(),
            value: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
            detail: Some(why),
        }
    }
}

/// `|a − b| / |b|`, zero when the two agree exactly.
fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// `‖a − b‖_∞ / ‖b‖_∞`, zero when the two agree exactly.
fn relative_field(a: &Field, b: &Field) -> f64 {
    let diff = (a - b).max_abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / b.max_abs()
    }
}

pub const HELMHOLTZ_TOL: f64 = 1e-10;
pub const GREEN_TOL: f64 = 1e-9;
pub const FORMULATION_TOL: f64 = 1e-7;
pub const TRANSPORT_FORM_TOL: f64 = 1e-8;
pub const QX_TOL: f64 = 1e-4;
pub const MBAR_TOL: f64 = 1e-5;
pub const RECIPROCITY_TOL: f64 = 1e-6;
pub const ODE_RESIDUAL_TOL: f64 = 1e-4;
pub const H1_DRIFT_TOL: f64 = 1e-8;
pub const YOUNG_SLACK: f64 = 1e-6;

/// Five seeds spread over the middle quarter of the domain.
pub fn default_seeds(sp: &Spectral) -> Vec<f64> {
    let reach = sp.grid().half_length() / 8.0;
    (0..5).map(|i| reach * (i as f64 / 2.0 - 1.0)).collect()
}

fn green_identities(sp: &Spectral, m: &Field) -> Result<Vec<IdentityResult>> {
    let plus = sp.convolve_p_plus(m)?;
    let minus = sp.convolve_p_minus(m)?;
    let p = sp.convolve_p(m)?;
    let px = sp.convolve_p_x(m)?;
    let pxx = sp.derivative(&sp.derivative(&p)?)?;
    Ok(vec![
        IdentityResult::measured("p_equals_sum", (&(&plus + &minus) - &p).max_abs(), GREEN_TOL),
        IdentityResult::measured("px_equals_difference", (&(&minus - &plus) - &px).max_abs(), GREEN_TOL),
        IdentityResult::measured("pxx_equals_p_minus_f", (&pxx - &(&p - m)).max_abs(), GREEN_TOL),
    ])
}

fn characteristic_identities(
    sp: &Spectral,
    state0: &SolutionState,
    params: ModelParams,
    seeds: &[f64],
    cfg: &IdentityConfig,
) -> Result<Vec<IdentityResult>> {
    let stepper = StepperConfig::fixed(cfg.dt, cfg.horizon);
    let cadence = Cadence {
        record_every: 1,
        history_every: 1,
    };
    let mut records = Vec::new();
    let out = run(sp, state0, &stepper, &params, &cadence, &mut records)?;
    if out.status != RunStatus::ReachedTEnd {
        return Ok(vec![IdentityResult::failed(
            "characteristic_run",
            format!("run stopped with {} at t = {}", out.status.as_str(), out.final_state.t),
        )]);
    }
    let mut results = Vec::new();
    let (first, last) = (records[0].h1, records[records.len() - 1].h1);
    results.push(IdentityResult::measured("h1_conservation", relative(last, first), H1_DRIFT_TOL));

    let flow = HistoryFlow::new(sp, &out.fields, params);
    let times = out.fields.times();
    let mut bundle = match advect(seeds, &flow, &times) {
        Ok(b) => b,
        Err(Error::DomainContamination(why)) => {
            results.push(IdentityResult::failed("characteristics", why));
            return Ok(results);
        }
        Err(e) => return Err(e),
    };
    let fd = qx_finite_difference(seeds, &flow, &times, 1e-3)?;
    let qx = qx_closed_form(&bundle);
    let m0: Vec<f64> = bundle.mbar.iter().map(|m| m[0]).collect();
    let mb = mbar_closed_form(&bundle, &m0)?;

    let mut qx_err = 0.0f64;
    let mut mbar_err = 0.0f64;
    let mut recip_err = 0.0f64;
    let mut sign_flips = 0usize;
    for s in 0..seeds.len() {
        for i in 0..times.len() {
            qx_err = qx_err.max(relative(qx[s][i], fd[s][i]));
            mbar_err = mbar_err.max(relative(mb[s][i], bundle.mbar[s][i]));
            if m0[s] != 0.0 {
                recip_err = recip_err.max((qx[s][i] * mb[s][i] / m0[s] - 1.0).abs());
            }
            if bundle.mbar[s][i].signum() != m0[s].signum() && m0[s] != 0.0 {
                sign_flips += 1;
            }
        }
    }
    bundle.qx = Some(fd);
    results.push(IdentityResult::measured("qx_closed_form", qx_err, QX_TOL));
    results.push(IdentityResult::measured("mbar_closed_form", mbar_err, MBAR_TOL));
    results.push(IdentityResult::measured("reciprocity", recip_err, RECIPROCITY_TOL));
    results.push(IdentityResult::measured("sign_preservation", sign_flips as f64, 0.0));

    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| seeds[a].total_cmp(&seeds[b]));
    let crossings = (0..times.len())
        .filter(|&i| order.windows(2).any(|w| bundle.q[w[0]][i] > bundle.q[w[1]][i]))
        .count();
    results.push(IdentityResult::measured("monotone_flow_map", crossings as f64, 0.0));

    if times.len() >= 3 {
        let residual = mbar_ode_residual(&bundle)?.into_iter().fold(0.0, f64::max);
        let scale = bundle
            .mbar
            .iter()
            .zip(&bundle.big_mbar)
            .flat_map(|(m, bm)| m.iter().zip(bm).map(|(m, bm)| (m * bm).abs()))
            .fold(0.0, f64::max);
        let value = if residual == 0.0 { 0.0 } else { residual / scale };
        results.push(IdentityResult::measured("mbar_ode_residual", value, ODE_RESIDUAL_TOL));
    }
    Ok(results)
}

/// Runs every identity on the given initial momentum. A nonzero
/// `cfg.u_perturbation` corrupts u for the Helmholtz-link check only.
pub fn identity_battery(
    sp: &Spectral,
    m0: &Field,
    params: ModelParams,
    seeds: &[f64],
    cfg: &IdentityConfig,
) -> Result<Vec<IdentityResult>> {
    let state = SolutionState::from_momentum(sp, 0.0, m0.clone())?;
    let mut results = Vec::new();

    let bump = Field::from_fn(*sp.grid(), |x| cfg.u_perturbation * (-x * x).exp());
    let linked = SolutionState::new(0.0, &state.u + &bump, m0.clone())?;
    let raw = (&(&linked.u - &sp.derivative(&sp.derivative(&linked.u)?)?) - m0).max_abs();
    let scale = m0.max_abs();
    let link = if raw == 0.0 { 0.0 } else { raw / scale.max(f64::MIN_POSITIVE) };
    results.push(IdentityResult::measured("helmholtz_link", link, HELMHOLTZ_TOL));

    results.extend(green_identities(sp, m0)?);

    let conservative = m_rhs(sp, &state, &params)?;
    let transport = m_rhs_transport(sp, &state, &params)?;
    results.push(IdentityResult::measured(
        "conservative_vs_transport",
        relative_field(&transport, &conservative),
        TRANSPORT_FORM_TOL,
    ));

    match u_rhs_nonlocal(sp, &state, &params) {
        Ok(nonlocal) => {
            let via_m = sp.helmholtz_solve(&conservative)?;
            results.push(IdentityResult::measured(
                "formulation_consistency",
                relative_field(&nonlocal, &via_m),
                FORMULATION_TOL,
            ));
        }
        Err(Error::Unsupported(why)) => results.push(IdentityResult::skipped("formulation_consistency", why)),
        Err(e) => return Err(e),
    }

    match young_probe(sp, &state) {
        Ok(r) => {
            let excess = (r.u - 1.0).max(r.ux - 1.0).max(r.uxx - 2.0).max(0.0);
            results.push(IdentityResult::measured("young_bounds", excess, YOUNG_SLACK));
        }
        Err(Error::UndefinedRatio(why)) => results.push(IdentityResult::skipped("young_bounds", why)),
        Err(e) => return Err(e),
    }

    if h1(&state) == 0.0 && scale == 0.0 {
        results.push(IdentityResult::measured("h1_conservation", 0.0, H1_DRIFT_TOL));
        return Ok(results);
    }
    let seeds = if seeds.is_empty() {
        default_seeds(sp)
    } else {
        seeds.to_vec()
    };
    results.extend(characteristic_identities(sp, &state, params, &seeds, cfg)?);
    Ok(results)
}
