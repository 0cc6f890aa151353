//! Characteristic curves `dq/dt = V(t, q)` and the quantities carried along them.

use std::io::Write;

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::integrator::FieldHistory;
use crate::spectral::{Complex64, GridSpec, Interpolant, Spectral};

/// Source of the transport velocity and of the tracked fields at any (t, x).
pub trait FlowField: Sync {
    fn grid(&self) -> &GridSpec;

    fn velocity_at(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>>;

    /// Momentum `m` and blow-up quantity `M` at the given points.
    fn tracked_at(&self, t: f64, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// Flow reconstructed from a stored run by Hermite interpolation in time and
/// trigonometric interpolation in space.
#[derive(Debug, Clone, Copy)]
pub struct HistoryFlow<'a> {
    sp: &'a Spectral,
    history: &'a FieldHistory,
    params: ModelParams,
}

impl<'a> HistoryFlow<'a> {
    pub fn new(sp: &'a Spectral, history: &'a FieldHistory, params: ModelParams) -> Self {
        Self { sp, history, params }
    }

    /// Coefficients of m, u and u_x at time t.
    fn resolved(&self, t: f64) -> Result<[Vec<Complex64>; 3]> {
        let m = self.history.momentum_at(t)?;
        let cm = self.sp.coefficients(&m)?;
        let mut cu = cm.clone();
        self.sp.helmholtz_coefficients(&mut cu);
        let mut cux = cu.clone();
        self.sp.differentiate_coefficients(&mut cux);
        Ok([cm, cu, cux])
    }

    fn interpolant(&self, c: Vec<Complex64>) -> Interpolant {
        Interpolant::from_coefficients(*self.sp.grid(), c)
    }
}

impl FlowField for HistoryFlow<'_> {
    fn grid(&self) -> &GridSpec {
        self.sp.grid()
    }

    fn velocity_at(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let [_, cu, cux] = self.resolved(t)?;
        let mode = self.params.mode;
        let v = self
            .sp
            .dealiased(&[&cu, &cux], |a| mode.velocity_of(a[0] * a[0] - a[1] * a[1]));
        Ok(self.interpolant(v).eval_many(xs))
    }

    fn tracked_at(&self, t: f64, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let [cm, cu, cux] = self.resolved(t)?;
        let mode = self.params.mode;
        let big = self.sp.dealiased(&[&cu, &cux, &cm], |a| {
            mode.velocity_slope(a[0] * a[0] - a[1] * a[1]) * a[2] * a[1]
        });
        Ok((
            self.interpolant(cm).eval_many(xs),
            self.interpolant(big).eval_many(xs),
        ))
    }
}

/// Spatially uniform velocity with unit momentum and vanishing blow-up quantity.
#[derive(Debug, Clone, Copy)]
pub struct UniformFlow {
    pub grid: GridSpec,
    pub speed: f64,
}

impl FlowField for UniformFlow {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn velocity_at(&self, _: f64, xs: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.speed; xs.len()])
    }

    fn tracked_at(&self, _: f64, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((vec![1.0; xs.len()], vec![0.0; xs.len()]))
    }
}

/// Trajectories and tracked values; outer index is the seed, inner the time.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicBundle {
    pub seeds: Vec<f64>,
    pub times: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    /// Finite-difference estimates of ∂q/∂x₀, when computed.
    pub qx: Option<Vec<Vec<f64>>>,
    pub mbar: Vec<Vec<f64>>,
    pub big_mbar: Vec<Vec<f64>>,
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.first().map_or(0, |r| r.len());
    (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// Integrates every seed with RK4 between consecutive output times.
pub fn advect(seeds: &[f64], flow: &dyn FlowField, times: &[f64]) -> Result<CharacteristicBundle> {
    if times.is_empty() {
        return Err(Error::config("characteristics need at least one output time"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config("output times must be strictly increasing"));
    }
    let limit = 0.5 * flow.grid().half_length();
    let outside = |x: f64| !(x.abs() <= limit);
    if let Some(&s) = seeds.iter().find(|&&s| outside(s)) {
        return Err(Error::DomainContamination(format!(
            "seed {s} lies outside the trusted window [-{limit}, {limit}]"
        )));
    }
    let mut q = seeds.to_vec();
    let mut q_rows = vec![q.clone()];
    let tracked = flow.tracked_at(times[0], &q)?;
    let mut m_rows = vec![tracked.0];
    let mut big_rows = vec![tracked.1];
    for w in times.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let shifted = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(x, k)| x + a * k).collect()
        };
        let k1 = flow.velocity_at(t, &q)?;
        let k2 = flow.velocity_at(t + 0.5 * dt, &shifted(&q, &k1, 0.5 * dt))?;
        let k3 = flow.velocity_at(t + 0.5 * dt, &shifted(&q, &k2, 0.5 * dt))?;
        let k4 = flow.velocity_at(w[1], &shifted(&q, &k3, dt))?;
        for (j, x) in q.iter_mut().enumerate() {
            *x += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if let Some((j, &x)) = q.iter().enumerate().find(|(_, &x)| outside(x)) {
            return Err(Error::DomainContamination(format!(
                "characteristic from {} reached {x} at t = {}",
                seeds[j], w[1]
            )));
        }
        let (m, big) = flow.tracked_at(w[1], &q)?;
        q_rows.push(q.clone());
        m_rows.push(m);
        big_rows.push(big);
    }
    Ok(CharacteristicBundle {
        seeds: seeds.to_vec(),
        times: times.to_vec(),
        q: transpose(&q_rows),
        qx: None,
        mbar: transpose(&m_rows),
        big_mbar: transpose(&big_rows),
    })
}

/// Cumulative trapezoid of each seed's series over the bundle times.
fn cumulative_integral(times: &[f64], series: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(series.len());
    out.push(0.0);
    for i in 1..series.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (series[i] + series[i - 1]);
        out.push(acc);
    }
    out
}

/// `q_x = exp(2 ∫₀ᵗ M̄ ds)` per seed.
pub fn qx_closed_form(bundle: &CharacteristicBundle) -> Vec<Vec<f64>> {
    bundle
        .big_mbar
        .iter()
        .map(|series| {
            cumulative_integral(&bundle.times, series)
                .into_iter()
                .map(|i| (2.0 * i).exp())
                .collect()
        })
        .collect()
}

/// `m̄ = m₀(x₀) exp(−2 ∫₀ᵗ M̄ ds)` per seed.
pub fn mbar_closed_form(bundle: &CharacteristicBundle, m0_at_seeds: &[f64]) -> Result<Vec<Vec<f64>>> {
    if m0_at_seeds.len() != bundle.seeds.len() {
        return Err(Error::config("one initial momentum value per seed is required"));
    }
    Ok(bundle
        .big_mbar
        .iter()
        .zip(m0_at_seeds)
        .map(|(series, &m0)| {
            cumulative_integral(&bundle.times, series)
                .into_iter()
                .map(|i| m0 * (-2.0 * i).exp())
                .collect()
        })
        .collect())
}

/// Centered difference of q across seeds displaced by ±`spacing`.
pub fn qx_finite_difference(
    seeds: &[f64],
    flow: &dyn FlowField,
    times: &[f64],
    spacing: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(spacing > 0.0) {
        return Err(Error::config("finite-difference spacing must be positive"));
    }
    let right: Vec<f64> = seeds.iter().map(|s| s + spacing).collect();
    let left: Vec<f64> = seeds.iter().map(|s| s - spacing).collect();
    let qr = advect(&right, flow, times)?.q;
    let ql = advect(&left, flow, times)?.q;
    Ok(qr
        .iter()
        .zip(&ql)
        .map(|(r, l)| r.iter().zip(l).map(|(r, l)| (r - l) / (2.0 * spacing)).collect())
        .collect())
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 3 {
        return Err(Error::config("at least three output times are required"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300))
    {
        return Err(Error::config("output times must be uniformly spaced"));
    }
    Ok(dt)
}

/// Sup over interior times of `|dm̄/dt + 2 m̄ M̄|`, with centered differences.
pub fn mbar_ode_residual(bundle: &CharacteristicBundle) -> Result<Vec<f64>> {
    let dt = check_uniform(&bundle.times)?;
    Ok(bundle
        .mbar
        .iter()
        .zip(&bundle.big_mbar)
        .map(|(m, big)| {
            (1..m.len() - 1)
                .map(|i| ((m[i + 1] - m[i - 1]) / (2.0 * dt) + 2.0 * m[i] * big[i]).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Centered-difference rate of `M̄/m̄` at interior times, per seed.
pub fn ratio_rate(bundle: &CharacteristicBundle) -> Result<Vec<Vec<f64>>> {
    let dt = check_uniform(&bundle.times)?;
    Ok(bundle
        .mbar
        .iter()
        .zip(&bundle.big_mbar)
        .map(|(m, big)| {
            let r: Vec<f64> = m.iter().zip(big).map(|(m, b)| b / m).collect();
            (1..r.len() - 1).map(|i| (r[i + 1] - r[i - 1]) / (2.0 * dt)).collect()
        })
        .collect())
}

/// Writes `seed,t,q,qx_formula,qx_fd,mbar_field,mbar_formula,Mbar`; missing
/// finite-difference values are left empty.
pub fn write_bundle_csv(
    out: &mut dyn Write,
    bundle: &CharacteristicBundle,
    qx_formula: &[Vec<f64>],
    mbar_formula: &[Vec<f64>],
) -> Result<()> {
    writeln!(out, "seed,t,q,qx_formula,qx_fd,mbar_field,mbar_formula,Mbar")?;
    let num = |v: f64| format!("{v:.16e}");
    for (s, &seed) in bundle.seeds.iter().enumerate() {
        for (i, &t) in bundle.times.iter().enumerate() {
            let fd = bundle.qx.as_ref().map_or(String::new(), |q| num(q[s][i]));
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                num(seed),
                num(t),
                num(bundle.q[s][i]),
                num(qx_formula[s][i]),
                fd,
                num(bundle.mbar[s][i]),
                num(mbar_formula[s][i]),
                num(bundle.big_mbar[s][i]),
            )?;
        }
    }
    Ok(())
}
