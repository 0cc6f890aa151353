//! One-sided Green's-function convolutions computed in physical space.
//!
//! `p_+ * f (x) = ½ ∫_{-∞}^x e^{-(x-y)} f(y) dy` satisfies the recursion
//! `I(x + h) = e^{-h} I(x) + ∫_0^h e^{-(h-τ)} f(x + τ) dτ`. The local integral
//! uses an 8-point Lagrange interpolant of `f`, and the start value follows from
//! closing the recursion over one period. `p_-` is the mirror image.

use crate::error::Result;
use crate::spectral::field::Field;
use crate::spectral::transform::Spectral;

const STENCIL: usize = 8;
/// Offset of the first stencil node relative to the left end of a cell.
const STENCIL_START: isize = -3;

/// Quadrature weights for one grid cell of the exponential recursion.
#[derive(Debug, Clone)]
struct CellWeights {
    decay: f64,
    weights: [f64; STENCIL],
}

impl CellWeights {
    fn new(h: f64) -> Self {
        let moments = exponential_moments(h);
        let nodes: Vec<f64> = (0..STENCIL).map(|i| (STENCIL_START + i as isize) as f64).collect();
        let mut weights = [0.0; STENCIL];
        for (i, w) in weights.iter_mut().enumerate() {
            let poly = lagrange_monomials(&nodes, i);
            *w = h * poly.iter().zip(&moments).map(|(c, nu)| c * nu).sum::<f64>();
        }
        Self {
            decay: (-h).exp(),
            weights,
        }
    }
}

/// `ν_k = ∫_0^1 e^{-h(1-t)} t^k dt` for k < STENCIL, via the series
/// `Σ_j (-h)^j k! / (k + j + 1)!`.
fn exponential_moments(h: f64) -> [f64; STENCIL] {
    let mut out = [0.0; STENCIL];
    for (k, nu) in out.iter_mut().enumerate() {
        // term_j = (-h)^j k!/(k+j+1)!
        let mut term = 1.0 / (k as f64 + 1.0);
        let mut sum = term;
        let mut j = 0usize;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) || j < 4 {
            j += 1;
            term *= -h / (k + j + 1) as f64;
            sum += term;
            if j > 400 {
                break;
            }
        }
        *nu = sum;
    }
    out
}

/// Monomial coefficients (ascending powers) of the Lagrange basis polynomial `i`.
fn lagrange_monomials(nodes: &[f64], i: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut denom = 1.0;
    for (m, &tm) in nodes.iter().enumerate() {
        if m == i {
            continue;
        }
        denom *= nodes[i] - tm;
        let mut next = vec![0.0; poly.len() + 1];
        for (p, &c) in poly.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= tm * c;
        }
        poly = next;
    }
    poly.iter().map(|c| c / denom).collect()
}

/// Periodic `∫_0^∞ e^{-s} f(x - s) ds` at every grid point.
fn left_sweep(values: &[f64], h: f64, total_length: f64) -> Vec<f64> {
    let n = values.len();
    let cw = CellWeights::new(h);
    let at = |j: isize| values[j.rem_euclid(n as isize) as usize];
    let increments: Vec<f64> = (0..n as isize)
        .map(|j| {
            cw.weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * at(j + STENCIL_START + i as isize))
                .sum()
        })
        .collect();
    let mut wrap = 0.0;
    for inc in &increments {
        wrap = cw.decay * wrap + inc;
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = wrap / (1.0 - (-total_length).exp());
    for inc in &increments {
        out.push(acc);
        acc = cw.decay * acc + inc;
    }
    out
}

impl Spectral {
    pub fn convolve_p_plus(&self, f: &Field) -> Result<Field> {
        f.ensure_finite("input field")?;
        let g = self.grid();
        let swept = left_sweep(f.values(), g.spacing(), g.length());
        Field::new(*g, swept.into_iter().map(|v| 0.5 * v).collect())
    }

    pub fn convolve_p_minus(&self, f: &Field) -> Result<Field> {
        f.ensure_finite("input field")?;
        let g = self.grid();
        let n = g.n();
        // reflect x -> -x, which maps grid index j to (n - j) mod n
        let reflect = |v: &[f64]| -> Vec<f64> { (0..n).map(|j| v[(n - j) % n]).collect() };
        let swept = left_sweep(&reflect(f.values()), g.spacing(), g.length());
        Field::new(*g, reflect(&swept).into_iter().map(|v| 0.5 * v).collect())
    }
}
