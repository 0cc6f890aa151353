//! Conservation and blow-up diagnostics, and the wave-breaking certificate.

use serde::{Deserialize, Serialize};

use crate::characteristics::CharacteristicBundle;
use crate::dynamics::{blowup_quantity, SolutionState};
use crate::error::{Error, Result};
use crate::spectral::{Field, Spectral};

/// One line of the diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub h1: f64,
    pub m_inf: f64,
    pub m_l2: f64,
    #[serde(rename = "min_M")]
    pub min_big_m: f64,
    pub blowup_integral: f64,
    pub u_inf: f64,
    pub ux_inf: f64,
    pub uxx_inf: f64,
}

/// The conserved quantity `∫ m u dx`.
pub fn h1(state: &SolutionState) -> f64 {
    state.m.inner(&state.u)
}

pub fn diagnostics(sp: &Spectral, state: &SolutionState, blowup_integral: f64) -> Result<DiagnosticsRecord> {
    let ux = sp.derivative(&state.u)?;
    let uxx = sp.derivative(&ux)?;
    let big_m = blowup_quantity(sp, state)?;
    Ok(DiagnosticsRecord {
        t: state.t,
        h1: h1(state),
        m_inf: state.m.max_abs(),
        m_l2: state.m.l2_norm(),
        min_big_m: big_m.min(),
        blowup_integral,
        u_inf: state.u.max_abs(),
        ux_inf: ux.max_abs(),
        uxx_inf: uxx.max_abs(),
    })
}

/// `2 min_x M(t, x)`.
pub fn min_m_track(sp: &Spectral, state: &SolutionState) -> Result<f64> {
    Ok(2.0 * blowup_quantity(sp, state)?.min())
}

/// Ratios of `‖u‖_∞`, `‖u_x‖_∞`, `‖u_xx‖_∞` to `‖m‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungRatios {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
}

pub fn young_probe(sp: &Spectral, state: &SolutionState) -> Result<YoungRatios> {
    let m_inf = state.m.max_abs();
    if m_inf == 0.0 {
        return Err(Error::UndefinedRatio("momentum vanishes identically".into()));
    }
    let ux = sp.derivative(&state.u)?;
    let uxx = sp.derivative(&ux)?;
    Ok(YoungRatios {
        u: state.u.max_abs() / m_inf,
        ux: ux.max_abs() / m_inf,
        uxx: uxx.max_abs() / m_inf,
    })
}

/// `‖u‖_{H¹} = (2L Σ (1 + k²) |û_k|²)^{1/2}` with normalized coefficients.
pub fn h1_norm(sp: &Spectral, u: &Field) -> Result<f64> {
    let c = sp.coefficients(u)?;
    let k = u.grid().wavenumbers();
    let sum: f64 = c.iter().zip(&k).map(|(c, k)| (1.0 + k * k) * c.norm_sqr()).sum();
    Ok((u.grid().length() * sum).sqrt())
}

/// Sufficient condition for wave breaking evaluated at one seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakingCertificate {
    pub x0: f64,
    pub mbar0: f64,
    #[serde(rename = "Mbar0")]
    pub big_mbar0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub xi: f64,
    /// Envelope form `2((M̄0/m̄0)ξ + ½C₁ξ²) + 1/m̄0`.
    pub h_xi: f64,
    /// Hypothesis form `(M̄0/m̄0)ξ + ½C₁ξ² + 1/m̄0`; the verdict uses this one.
    pub a_xi: f64,
    pub fires: bool,
    pub predicted_window: (f64, f64),
    /// User constant C inside C₁.
    pub c: f64,
    pub h1_norm: f64,
}

impl BreakingCertificate {
    /// Evaluates the verdict from the seed values and C₁ directly.
    pub fn from_seed_values(x0: f64, mbar0: f64, big_mbar0: f64, c1: f64) -> Self {
        // adding zero turns a negative zero into +0
        let xi = -big_mbar0 / (c1 * mbar0) + 0.0;
        let ratio = big_mbar0 / mbar0;
        let quad = ratio * xi + 0.5 * c1 * xi * xi;
        let a_xi = quad + 1.0 / mbar0;
        let h_xi = 2.0 * quad + 1.0 / mbar0;
        let fires = big_mbar0 < 0.0 && mbar0 > 0.0 && c1 > 0.0 && a_xi < 0.0;
        Self {
            x0,
            mbar0,
            big_mbar0,
            c1,
            xi,
            h_xi,
            a_xi,
            fires,
            predicted_window: (0.0, xi),
            c: f64::NAN,
            h1_norm: f64::NAN,
        }
    }

    /// Envelope `h(t)` bounding `1/m̄(t)` from above.
    pub fn envelope(&self, t: f64) -> f64 {
        2.0 * ((self.big_mbar0 / self.mbar0) * t + 0.5 * self.c1 * t * t) + 1.0 / self.mbar0
    }
}

pub fn certify(sp: &Spectral, state0: &SolutionState, c: f64) -> Result<BreakingCertificate> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::config(format!("certificate constant must be positive, got {c}")));
    }
    let m0 = &state0.m;
    m0.ensure_finite("initial momentum")?;
    let min = m0.min();
    if min < -1e-12 {
        let j = m0.values().iter().position(|&v| v == min).unwrap_or(0);
        return Err(Error::Hypothesis(format!(
            "initial momentum must be nonnegative; found {min:e} at x = {}",
            m0.grid().point(j)
        )));
    }
    let m_inf = m0.max_abs();
    if m_inf == 0.0 {
        return Err(Error::Hypothesis("initial momentum vanishes identically".into()));
    }
    let big_m = blowup_quantity(sp, state0)?;
    let threshold = 1e-8 * m_inf;
    let (j0, _) = m0
        .values()
        .iter()
        .zip(big_m.values())
        .enumerate()
        .filter(|(_, (&m, _))| m > threshold)
        .fold((usize::MAX, f64::INFINITY), |best, (j, (_, &mm))| {
            if mm < best.1 {
                (j, mm)
            } else {
                best
            }
        });
    let norm = h1_norm(sp, &state0.u)?;
    let c1 = c * (norm.powi(5) + norm.powi(3));
    let mut cert = BreakingCertificate::from_seed_values(
        m0.grid().point(j0),
        m0.values()[j0],
        big_m.values()[j0],
        c1,
    );
    cert.c = c;
    cert.h1_norm = norm;
    Ok(cert)
}

/// Comparison of a tracked characteristic with the certificate's envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub seed: f64,
    /// Smallest C₁ with `M̄/m̄ ≤ M̄0/m̄0 + C₁ t` on the tracked samples.
    pub c1_empirical: f64,
    /// Whether `1/m̄(t) ≤ h(t)` holds with the certificate's C₁.
    pub envelope_holds: bool,
    pub inverse_mbar: Vec<f64>,
    pub envelope: Vec<f64>,
}

impl EnvelopeReport {
    /// True when `1/m̄` is strictly decreasing over the last `fraction` of samples.
    pub fn inverse_mbar_decreasing_tail(&self, fraction: f64) -> bool {
        let n = self.inverse_mbar.len();
        let start = n - ((n as f64 * fraction).ceil() as usize).clamp(2.min(n), n);
        self.inverse_mbar[start..].windows(2).all(|w| w[1] < w[0])
    }
}

pub fn envelope_check(
    bundle: &CharacteristicBundle,
    seed_index: usize,
    cert: &BreakingCertificate,
) -> Result<EnvelopeReport> {
    let mbar = bundle
        .mbar
        .get(seed_index)
        .ok_or_else(|| Error::config(format!("no seed with index {seed_index}")))?;
    let big = &bundle.big_mbar[seed_index];
    let times = &bundle.times;
    let m0 = mbar[0];
    if m0 <= 0.0 {
        return Err(Error::config("envelope check needs a seed with positive momentum"));
    }
    if let Some(i) = mbar.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Invariant(format!(
            "tracked momentum left the positive half-line at t = {}",
            times[i]
        )));
    }
    let base = big[0] / m0;
    let c1_empirical = times
        .iter()
        .zip(mbar.iter().zip(big))
        .skip(1)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, (&m, &bm))| (bm / m - base) / t)
        .fold(0.0, f64::max);
    let inverse_mbar: Vec<f64> = mbar.iter().map(|m| 1.0 / m).collect();
    let envelope: Vec<f64> = times.iter().map(|&t| cert.envelope(t)).collect();
    let envelope_holds = inverse_mbar
        .iter()
        .zip(&envelope)
        .all(|(inv, h)| *inv <= h + 1e-12 * h.abs().max(*inv));
    Ok(EnvelopeReport {
        seed: bundle.seeds[seed_index],
        c1_empirical,
        envelope_holds,
        inverse_mbar,
        envelope,
    })
}
