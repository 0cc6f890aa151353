//! Iterated linear transport solves with frequency-truncated data.
//!
//! Iterate `l + 1` solves `∂_t m + V_l ∂_x m = −2 V'_l u_x^{(l)} (m^{(l)})²` with
//! coefficients frozen from iterate `l` and initial data `S_{l+1} m₀`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::Mode;
use crate::error::{Error, Result};
use crate::spectral::{build_partition, Complex64, DyadicPartition, Field, Spectral};

/// Besov exponent that may be infinite; serialized as a number or `"inf"`.
mod exponent {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Number of iterates l_max.
    pub iterations: usize,
    /// Horizon T.
    pub horizon: f64,
    /// Data regularity; differences are measured in B^{s-3}_{p,r}.
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub r: f64,
    /// Inner transport step.
    pub dt: f64,
    /// Constant in the existence bound `1/(4 C ‖u₀‖²)`.
    pub c_user: f64,
    /// Smoothing width of the dyadic partition.
    pub delta: f64,
    /// Iterates exceeding this sup norm abort the run.
    pub max_m_inf: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            iterations: 8,
            horizon: 0.5,
            s: 3.0,
            p: 2.0,
            r: 2.0,
            dt: 0.01,
            c_user: 1.0,
            delta: crate::spectral::DEFAULT_SMOOTHING,
            max_m_inf: 1e4,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config_at(format!("picard.{field}"), msg));
        if self.iterations < 2 {
            return bad("iterations", "at least two iterations are required");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon", "must be positive");
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return bad("dt", "must be positive and no larger than the horizon");
        }
        if !self.s.is_finite() {
            return bad("s", "must be finite");
        }
        if !(self.p >= 1.0) {
            return bad("p", "must lie in [1, inf]");
        }
        if !(self.r >= 1.0) {
            return bad("r", "must lie in [1, inf]");
        }
        if !(self.c_user > 0.0) {
            return bad("c_user", "must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / 6.0) {
            return bad("delta", "must lie in (0, 1/6)");
        }
        if !(self.max_m_inf > 0.0) {
            return bad("max_m_inf", "must be positive");
        }
        Ok(())
    }

    /// Regularity of the metric used for differences.
    pub fn metric_regularity(&self) -> f64 {
        self.s - 3.0
    }
}

/// Momentum sampled at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Field>,
}

impl Trajectory {
    pub fn constant(field: &Field, times: Vec<f64>) -> Self {
        let frames = vec![field.clone(); times.len()];
        Self { times, frames }
    }

    fn step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::config("trajectory needs at least two times"));
        }
        Ok(self.times[1] - self.times[0])
    }

    /// `sup_t ‖a(t) − b(t)‖` under the given norm.
    pub fn sup_distance(&self, other: &Trajectory, norm: impl Fn(&Field) -> Result<f64>) -> Result<f64> {
        if self.frames.len() != other.frames.len() {
            return Err(Error::config("trajectories have different lengths"));
        }
        self.frames
            .iter()
            .zip(&other.frames)
            .try_fold(0.0, |acc: f64, (a, b)| Ok(acc.max(norm(&(a - b))?)))
    }
}

/// `S_{l+1} m₀`.
pub fn friedrichs_data(sp: &Spectral, m0: &Field, l: usize, part: &DyadicPartition) -> Result<Field> {
    let q = i32::try_from(l + 1).unwrap_or(i32::MAX).min(part.max_q() + 1);
    part.low_freq_sum(sp, m0, q)
}

/// Frozen coefficients at one stored time: velocity samples on the padded grid
/// and the source coefficients.
struct Coefficients {
    velocity_fine: Vec<f64>,
    source: Vec<Complex64>,
}

fn freeze(sp: &Spectral, m: &Field, mode: Mode) -> Result<Coefficients> {
    let cm = sp.coefficients(m)?;
    let mut cu = cm.clone();
    sp.helmholtz_coefficients(&mut cu);
    let mut cux = cu.clone();
    sp.differentiate_coefficients(&mut cux);
    let (fu, fux, fm) = (sp.to_fine(&cu), sp.to_fine(&cux), sp.to_fine(&cm));
    let mut velocity_fine = Vec::with_capacity(fu.len());
    let mut source_fine = Vec::with_capacity(fu.len());
    for i in 0..fu.len() {
        let w = fu[i] * fu[i] - fux[i] * fux[i];
        velocity_fine.push(mode.velocity_of(w));
        source_fine.push(-2.0 * mode.velocity_slope(w) * fux[i] * fm[i] * fm[i]);
    }
    Ok(Coefficients {
        velocity_fine,
        source: sp.from_fine(&source_fine),
    })
}

/// Velocity samples on the padded grid and source coefficients at each time.
pub struct TransportCoefficients {
    velocity_fine: Vec<Vec<f64>>,
    source: Vec<Vec<Complex64>>,
}

impl TransportCoefficients {
    /// Freezes the coefficients of the nonlinear equation along a trajectory.
    pub fn from_trajectory(sp: &Spectral, traj: &Trajectory) -> Result<Self> {
        let frozen: Vec<Coefficients> = traj
            .frames
            .iter()
            .map(|m| freeze(sp, m, Mode::Sine))
            .collect::<Result<_>>()?;
        Ok(Self {
            velocity_fine: frozen.iter().map(|c| c.velocity_fine.clone()).collect(),
            source: frozen.into_iter().map(|c| c.source).collect(),
        })
    }

    pub fn scale_source(&mut self, factor: f64) {
        self.source
            .iter_mut()
            .flatten()
            .for_each(|c| *c *= factor);
    }

    fn at(&self, k: usize, half: bool) -> (Vec<f64>, Vec<Complex64>) {
        if !half {
            return (self.velocity_fine[k].clone(), self.source[k].clone());
        }
        let avg = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| 0.5 * (a + b)).collect();
        let avg_c = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(a, b)| (a + b) * 0.5).collect();
        (
            avg(&self.velocity_fine[k], &self.velocity_fine[k + 1]),
            avg_c(&self.source[k], &self.source[k + 1]),
        )
    }
}

/// RK4 solve of `∂_t m = −V ∂_x m + S` with the given frozen coefficients.
pub fn solve_linear_transport(
    sp: &Spectral,
    times: &[f64],
    coeffs: &TransportCoefficients,
    init: &Field,
) -> Result<Trajectory> {
    if coeffs.velocity_fine.len() != times.len() {
        return Err(Error::config("coefficient count differs from the time grid"));
    }
    let rhs = |c: &[Complex64], v: &[f64], s: &[Complex64]| -> Vec<Complex64> {
        let mut cx = c.to_vec();
        sp.differentiate_coefficients(&mut cx);
        let fx = sp.to_fine(&cx);
        let prod: Vec<f64> = fx.iter().zip(v).map(|(a, b)| a * b).collect();
        let adv = sp.from_fine(&prod);
        adv.iter().zip(s).map(|(a, s)| s - a).collect()
    };
    let mut c = sp.coefficients(init)?;
    let mut frames = vec![init.clone()];
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let (v0, s0) = coeffs.at(k, false);
        let (vh, sh) = coeffs.at(k, true);
        let (v1, s1) = coeffs.at(k + 1, false);
        let axpy = |a: f64, d: &[Complex64]| -> Vec<Complex64> {
            c.iter().zip(d).map(|(c, d)| c + d * a).collect()
        };
        let k1 = rhs(&c, &v0, &s0);
        let k2 = rhs(&axpy(0.5 * dt, &k1), &vh, &sh);
        let k3 = rhs(&axpy(0.5 * dt, &k2), &vh, &sh);
        let k4 = rhs(&axpy(dt, &k3), &v1, &s1);
        for j in 0..c.len() {
            c[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        let m = sp.field_from_coefficients(c.clone());
        m.ensure_finite("transport iterate")?;
        frames.push(m);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        frames,
    })
}

/// One iterate: coefficients from `m_prev`, initial data `m0_l`.
pub fn picard_step(sp: &Spectral, m_prev: &Trajectory, m0_l: &Field) -> Result<Trajectory> {
    m_prev.step()?;
    let coeffs = TransportCoefficients::from_trajectory(sp, m_prev)?;
    solve_linear_transport(sp, &m_prev.times, &coeffs, m0_l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    /// `sup_t ‖m^{(l)}(t)‖` in the metric norm for l = 1..=l_max.
    pub iterate_norms: Vec<f64>,
    /// `d_l = sup_t ‖m^{(l+1)} − m^{(l)}‖` for l = 0..l_max-1 (iterate 0 is zero).
    pub differences: Vec<f64>,
    /// Fitted geometric ratio of the differences; 0 when undefined.
    pub rho: f64,
    /// `1/(4 C ‖u₀‖²_{B^s_{p,r}})`; absent for zero data.
    pub existence_bound: Option<f64>,
    pub u0_norm: f64,
    pub max_iterate_norm: f64,
    #[serde(skip)]
    pub final_iterate: Trajectory,
}

/// Relative level below which differences are treated as roundoff.
const DIFFERENCE_FLOOR: f64 = 1e-13;

/// `exp` of the least-squares slope of `ln d_l` over the last half of the
/// differences that stand above roundoff.
pub fn fit_ratio(differences: &[f64]) -> f64 {
    let scale = differences.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let resolved: Vec<(f64, f64)> = differences
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > DIFFERENCE_FLOOR * scale)
        .map(|(l, d)| (l as f64, d.ln()))
        .collect();
    let keep = resolved.len().div_ceil(2).max(2);
    if resolved.len() < keep {
        return 0.0;
    }
    let pts = &resolved[resolved.len() - keep..];
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

pub fn run_picard(sp: &Spectral, m0: &Field, cfg: &PicardConfig) -> Result<PicardReport> {
    cfg.validate()?;
    let part = build_partition(*sp.grid(), cfg.delta)?;
    let steps = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let dt = cfg.horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let metric = |f: &Field| part.besov_norm(sp, f, cfg.metric_regularity(), cfg.p, cfg.r);

    let mut prev = Trajectory::constant(&Field::zeros(*sp.grid()), times.clone());
    let mut iterate_norms = Vec::with_capacity(cfg.iterations);
    let mut differences = Vec::with_capacity(cfg.iterations);
    for l in 0..cfg.iterations {
        let data = friedrichs_data(sp, m0, l, &part)?;
        let next = match picard_step(sp, &prev, &data) {
            Ok(t) => t,
            Err(Error::Numeric(msg)) => {
                return Err(Error::HorizonTooLarge(format!("iterate {} diverged: {msg}", l + 1)))
            }
            Err(e) => return Err(e),
        };
        if let Some((k, f)) = next
            .frames
            .iter()
            .enumerate()
            .find(|(_, f)| f.max_abs() > cfg.max_m_inf)
        {
            return Err(Error::HorizonTooLarge(format!(
                "iterate {} reaches sup norm {:e} at t = {}",
                l + 1,
                f.max_abs(),
                times[k]
            )));
        }
        differences.push(next.sup_distance(&prev, metric)?);
        iterate_norms.push(
            next.frames
                .iter()
                .try_fold(0.0, |acc: f64, f| Ok::<_, Error>(acc.max(metric(f)?)))?,
        );
        prev = next;
    }

    let u0 = sp.helmholtz_solve(m0)?;
    let u0_norm = part.besov_norm(sp, &u0, cfg.s, cfg.p, cfg.r)?;
    let existence_bound = (u0_norm > 0.0).then(|| 1.0 / (4.0 * cfg.c_user * u0_norm * u0_norm));
    let max_iterate_norm = iterate_norms.iter().copied().fold(0.0, f64::max);
    Ok(PicardReport {
        rho: fit_ratio(&differences),
        iterate_norms,
        differences,
        existence_bound,
        u0_norm,
        max_iterate_norm,
        final_iterate: prev,
    })
}
