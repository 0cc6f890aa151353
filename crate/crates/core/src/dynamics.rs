//! Right-hand sides of the evolution in momentum (m) and nonlocal (u) form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Complex64, Field, GridSpec, Spectral};

/// Which velocity law `V(w)`, `w = u² − u_x²`, drives the transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `V = sin w`
    #[default]
    Sine,
    /// `V = w`, the cubic modified Camassa–Holm flow
    Mch,
    /// `V = w − w³/6`, the first two terms of the sine series
    Cubic,
}

impl Mode {
    pub fn velocity_of(self, w: f64) -> f64 {
        match self {
            Mode::Sine => w.sin(),
            Mode::Mch => w,
            Mode::Cubic => w - w * w * w / 6.0,
        }
    }

    /// dV/dw.
    pub fn velocity_slope(self, w: f64) -> f64 {
        match self {
            Mode::Sine => w.cos(),
            Mode::Mch => 1.0,
            Mode::Cubic => 1.0 - 0.5 * w * w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Coefficient of the linear dispersive term `κ u_x`.
    pub kappa: f64,
    pub mode: Mode,
}

impl ModelParams {
    pub fn sine() -> Self {
        Self::default()
    }

    pub fn with_mode(mode: Mode) -> Self {
        Self { kappa: 0.0, mode }
    }
}

/// Time, velocity `u` and momentum `m = u − u_xx` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub t: f64,
    pub u: Field,
    pub m: Field,
}

impl SolutionState {
    pub fn new(t: f64, u: Field, m: Field) -> Result<Self> {
        u.ensure_same_grid(&m)?;
        Ok(Self { t, u, m })
    }

    /// Builds the state from momentum alone, deriving `u` by Helmholtz inversion.
    pub fn from_momentum(sp: &Spectral, t: f64, m: Field) -> Result<Self> {
        let u = sp.helmholtz_solve(&m)?;
        Ok(Self { t, u, m })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            t: 0.0,
            u: Field::zeros(grid),
            m: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.m.grid()
    }

    /// `‖(1 − ∂²)u − m‖_∞ / ‖m‖_∞` (absolute when m vanishes).
    pub fn helmholtz_residual(&self, sp: &Spectral) -> Result<f64> {
        let uxx = sp.derivative(&sp.derivative(&self.u)?)?;
        let lhs = &self.u - &uxx;
        let err = (&lhs - &self.m).max_abs();
        let scale = self.m.max_abs();
        Ok(if scale > 0.0 { err / scale } else { err })
    }
}

/// Coefficients of u, u_x and m for one state.
struct Resolved {
    u: Vec<Complex64>,
    ux: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl Resolved {
    fn from_state(sp: &Spectral, state: &SolutionState) -> Result<Self> {
        check_grid(sp, state)?;
        let u = sp.coefficients(&state.u)?;
        let m = sp.coefficients(&state.m)?;
        let mut ux = u.clone();
        sp.differentiate_coefficients(&mut ux);
        Ok(Self { u, ux, m })
    }

    fn from_momentum(sp: &Spectral, m: Vec<Complex64>) -> Self {
        let mut u = m.clone();
        sp.helmholtz_coefficients(&mut u);
        let mut ux = u.clone();
        sp.differentiate_coefficients(&mut ux);
        Self { u, ux, m }
    }
}

fn check_grid(sp: &Spectral, state: &SolutionState) -> Result<()> {
    state.u.ensure_same_grid(&state.m)?;
    if state.grid() != sp.grid() {
        return Err(Error::config("state grid differs from transform grid"));
    }
    Ok(())
}

/// `P(u² − u_x²)`: the squared-difference argument, dealiased and resolved.
pub fn wave_argument(sp: &Spectral, u: &Field, ux: &Field) -> Result<Field> {
    u.ensure_same_grid(ux)?;
    if u.grid() != sp.grid() {
        return Err(Error::config("field grid differs from transform grid"));
    }
    let cu = sp.coefficients(u)?;
    let cux = sp.coefficients(ux)?;
    let w = sp.dealiased(&[&cu, &cux], |a| a[0] * a[0] - a[1] * a[1]);
    Ok(sp.field_from_coefficients(w))
}

/// `V = sin(u² − u_x²)`, the sine applied pointwise to the dealiased argument.
pub fn velocity(sp: &Spectral, u: &Field, ux: &Field) -> Result<Field> {
    Ok(wave_argument(sp, u, ux)?.map(f64::sin))
}

/// `M = cos(u² − u_x²) m u_x`, pointwise on the grid.
pub fn blowup_quantity(sp: &Spectral, state: &SolutionState) -> Result<Field> {
    check_grid(sp, state)?;
    let ux = sp.derivative(&state.u)?;
    let w = wave_argument(sp, &state.u, &ux)?;
    let values = w
        .values()
        .iter()
        .zip(state.m.values())
        .zip(ux.values())
        .map(|((w, m), ux)| w.cos() * m * ux)
        .collect();
    Field::new(*state.grid(), values)
}

/// Conservative form `−∂_x[V m] − κ u_x`, evaluated from coefficients.
fn conservative_tendency(sp: &Spectral, r: &Resolved, params: &ModelParams) -> Vec<Complex64> {
    let mode = params.mode;
    let mut flux = sp.dealiased(&[&r.u, &r.ux, &r.m], |a| {
        mode.velocity_of(a[0] * a[0] - a[1] * a[1]) * a[2]
    });
    sp.differentiate_coefficients(&mut flux);
    flux.iter_mut()
        .zip(&r.ux)
        .for_each(|(f, ux)| *f = -*f - params.kappa * ux);
    flux
}

/// Time derivative of momentum coefficients, deriving u from m.
pub fn momentum_tendency(sp: &Spectral, m: &[Complex64], params: &ModelParams) -> Vec<Complex64> {
    let r = Resolved::from_momentum(sp, m.to_vec());
    conservative_tendency(sp, &r, params)
}

/// `m_t` in conservative form, using the state's u and m as given.
pub fn m_rhs(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<Field> {
    let r = Resolved::from_state(sp, state)?;
    Ok(sp.field_from_coefficients(conservative_tendency(sp, &r, params)))
}

/// `m_t` in transport form `−V m_x − 2 V'(w) u_x m² − κ u_x`.
pub fn m_rhs_transport(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<Field> {
    let r = Resolved::from_state(sp, state)?;
    let mut mx = r.m.clone();
    sp.differentiate_coefficients(&mut mx);
    let mode = params.mode;
    let mut out = sp.dealiased(&[&r.u, &r.ux, &r.m, &mx], |a| {
        let w = a[0] * a[0] - a[1] * a[1];
        -mode.velocity_of(w) * a[3] - 2.0 * mode.velocity_slope(w) * a[1] * a[2] * a[2]
    });
    out.iter_mut()
        .zip(&r.ux)
        .for_each(|(o, ux)| *o -= params.kappa * ux);
    Ok(sp.field_from_coefficients(out))
}

/// `u_t = −V u_x − 2 p*(u M) − 2 p_x*(u_x M)`.
pub fn u_rhs_nonlocal(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<Field> {
    let r = Resolved::from_state(sp, state)?;
    Ok(sp.field_from_coefficients(nonlocal_tendency(sp, &r, params)?))
}

fn nonlocal_tendency(sp: &Spectral, r: &Resolved, params: &ModelParams) -> Result<Vec<Complex64>> {
    if params.kappa != 0.0 {
        return Err(Error::Unsupported(
            "the nonlocal velocity form has no dispersive term; use the momentum form".into(),
        ));
    }
    let parts = nonlocal_parts(sp, r, params.mode);
    let k = sp.k();
    Ok((0..k.len())
        .map(|j| {
            let p = 1.0 / (1.0 + k[j] * k[j]);
            let px = Complex64::new(0.0, k[j] * p);
            -parts.v_ux[j] - 2.0 * p * parts.u_m[j] - 2.0 * px * parts.ux_m[j]
        })
        .collect())
}

/// Dealiased coefficients of V u_x, V u_xx, u M and u_x M.
struct NonlocalParts {
    v_ux: Vec<Complex64>,
    v_uxx: Vec<Complex64>,
    u_m: Vec<Complex64>,
    ux_m: Vec<Complex64>,
}

fn nonlocal_parts(sp: &Spectral, r: &Resolved, mode: Mode) -> NonlocalParts {
    let mut uxx = r.ux.clone();
    sp.differentiate_coefficients(&mut uxx);
    let fine_u = sp.to_fine(&r.u);
    let fine_ux = sp.to_fine(&r.ux);
    let fine_uxx = sp.to_fine(&uxx);
    let fine_m = sp.to_fine(&r.m);
    let nf = fine_u.len();
    let mut v_ux = Vec::with_capacity(nf);
    let mut v_uxx = Vec::with_capacity(nf);
    let mut u_m = Vec::with_capacity(nf);
    let mut ux_m = Vec::with_capacity(nf);
    for i in 0..nf {
        let (u, ux) = (fine_u[i], fine_ux[i]);
        let w = u * u - ux * ux;
        let v = mode.velocity_of(w);
        let big_m = mode.velocity_slope(w) * fine_m[i] * ux;
        v_ux.push(v * ux);
        v_uxx.push(v * fine_uxx[i]);
        u_m.push(u * big_m);
        ux_m.push(ux * big_m);
    }
    NonlocalParts {
        v_ux: sp.from_fine(&v_ux),
        v_uxx: sp.from_fine(&v_uxx),
        u_m: sp.from_fine(&u_m),
        ux_m: sp.from_fine(&ux_m),
    }
}

/// `u_xt = −V u_xx − 2 p_x*(u M) − 2 p*(u_x M)`, the x-derivative of the nonlocal form
/// after the product-rule terms cancel.
pub fn ux_rhs_nonlocal(sp: &Spectral, state: &SolutionState, params: &ModelParams) -> Result<Field> {
    if params.kappa != 0.0 {
        return Err(Error::Unsupported("nonlocal form requires kappa = 0".into()));
    }
    let r = Resolved::from_state(sp, state)?;
    let parts = nonlocal_parts(sp, &r, params.mode);
    let k = sp.k();
    let c = (0..k.len())
        .map(|j| {
            let p = 1.0 / (1.0 + k[j] * k[j]);
            let px = Complex64::new(0.0, k[j] * p);
            -parts.v_uxx[j] - 2.0 * px * parts.u_m[j] - 2.0 * p * parts.ux_m[j]
        })
        .collect();
    Ok(sp.field_from_coefficients(c))
}

/// Time derivative of velocity coefficients in the nonlocal form, deriving m from u.
pub fn velocity_tendency(sp: &Spectral, u: &[Complex64], params: &ModelParams) -> Result<Vec<Complex64>> {
    let k = sp.k();
    let mut ux = u.to_vec();
    sp.differentiate_coefficients(&mut ux);
    let m = u.iter().zip(k).map(|(c, &k)| c * (1.0 + k * k)).collect();
    let r = Resolved { u: u.to_vec(), ux, m };
    nonlocal_tendency(sp, &r, params)
}

/// Plain cubic flow `m_t = −[(u² − u_x²) m]_x`.
pub fn mch_rhs(sp: &Spectral, state: &SolutionState) -> Result<Field> {
    m_rhs(sp, state, &ModelParams::with_mode(Mode::Mch))
}
