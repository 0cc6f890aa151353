//! Dyadic frequency blocks and discrete Besov norms.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::Field;
use crate::spectral::grid::GridSpec;
use crate::spectral::transform::Spectral;

/// Radius below which the low-frequency cutoff is identically one.
const INNER_RADIUS: f64 = 4.0 / 3.0;

pub const DEFAULT_SMOOTHING: f64 = 0.05;

/// Smooth monotone step: 0 for t <= 0, 1 for t >= 1, C^∞ in between.
fn smooth_step(t: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Low-frequency cutoff χ in block index space: returns χ(k) for real k.
#[derive(Debug, Clone, Copy)]
struct Cutoff {
    delta: f64,
}

impl Cutoff {
    fn at(&self, k: f64) -> f64 {
        let lo = INNER_RADIUS * (1.0 - self.delta);
        let hi = INNER_RADIUS * (1.0 + self.delta);
        smooth_step((hi - k.abs()) / (hi - lo))
    }

    /// Annular profile φ(k) = χ(k/2) − χ(k).
    fn annulus(&self, k: f64) -> f64 {
        self.at(k / 2.0) - self.at(k)
    }
}

/// Block profiles sampled at every FFT bin of a grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: GridSpec,
    delta: f64,
    chi: Vec<f64>,
    phi_blocks: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: GridSpec, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0 / 6.0) {
            return Err(Error::config(format!(
                "partition smoothing width must lie in (0, 1/6), got {delta}"
            )));
        }
        let cutoff = Cutoff { delta };
        let kmax = grid.max_wavenumber();
        // smallest q whose low-frequency sum S_{q+1} is one on all resolved bins
        let mut max_q = 0i32;
        while 2f64.powi(max_q + 1) * INNER_RADIUS * (1.0 - delta) < kmax {
            max_q += 1;
        }
        let k = grid.wavenumbers();
        let chi = k.iter().map(|&k| cutoff.at(k)).collect();
        let phi_blocks = (0..=max_q)
            .map(|q| {
                let scale = 2f64.powi(-q);
                k.iter().map(|&k| cutoff.annulus(scale * k)).collect()
            })
            .collect();
        Ok(Self {
            grid,
            delta,
            chi,
            phi_blocks,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_q(&self) -> i32 {
        self.phi_blocks.len() as i32 - 1
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn phi_blocks(&self) -> &[Vec<f64>] {
        &self.phi_blocks
    }

    /// Annulus `2^q [4/3 (1-δ), 8/3 (1+δ)]` that contains the support of block q.
    pub fn annulus(&self, q: i32) -> (f64, f64) {
        let s = 2f64.powi(q);
        (
            s * INNER_RADIUS * (1.0 - self.delta),
            s * 2.0 * INNER_RADIUS * (1.0 + self.delta),
        )
    }

    /// Multiplier of Δ_q sampled on the FFT bins; q = -1 is the low block.
    pub fn block_profile(&self, q: i32) -> Result<&[f64]> {
        self.check_block(q)?;
        Ok(if q == -1 {
            &self.chi
        } else {
            &self.phi_blocks[q as usize]
        })
    }

    /// Largest |1 − χ − Σφ| over the resolved bins.
    pub fn unity_residual(&self) -> f64 {
        (0..self.grid.n())
            .map(|j| {
                let total = self.chi[j] + self.phi_blocks.iter().map(|b| b[j]).sum::<f64>();
                (1.0 - total).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check_block(&self, q: i32) -> Result<()> {
        if q < -1 || q > self.max_q() {
            return Err(Error::config(format!(
                "dyadic block index {q} outside [-1, {}]",
                self.max_q()
            )));
        }
        Ok(())
    }

    fn check_grid(&self, f: &Field, sp: &Spectral) -> Result<()> {
        if *f.grid() != self.grid || *sp.grid() != self.grid {
            return Err(Error::config("partition built for a different grid"));
        }
        Ok(())
    }

    fn filtered(&self, sp: &Spectral, f: &Field, weight: impl Fn(usize) -> f64) -> Result<Field> {
        self.check_grid(f, sp)?;
        let mut c: Vec<Complex64> = sp.coefficients(f)?;
        c.iter_mut().enumerate().for_each(|(j, c)| *c *= weight(j));
        Ok(sp.field_from_coefficients(c))
    }

    /// Δ_q f.
    pub fn block(&self, sp: &Spectral, f: &Field, q: i32) -> Result<Field> {
        let profile = self.block_profile(q)?;
        self.filtered(sp, f, |j| profile[j])
    }

    /// S_q f = Σ_{q' <= q-1} Δ_{q'} f. Indices above the resolved range return f.
    pub fn low_freq_sum(&self, sp: &Spectral, f: &Field, q: i32) -> Result<Field> {
        if q < -1 {
            return Err(Error::config(format!("low-frequency index {q} below -1")));
        }
        self.check_grid(f, sp)?;
        if q > self.max_q() {
            return Ok(f.clone());
        }
        // Σ_{q'=-1}^{q-1} Δ_{q'} telescopes to χ(2^{-q} k)
        let cutoff = Cutoff { delta: self.delta };
        let scale = 2f64.powi(-q);
        let k = self.grid.wavenumbers();
        self.filtered(sp, f, |j| if q == -1 { 0.0 } else { cutoff.at(scale * k[j]) })
    }

    /// Discrete B^s_{p,r} norm; `p` or `r` equal to `f64::INFINITY` select the sup variants.
    pub fn besov_norm(&self, sp: &Spectral, f: &Field, s: f64, p: f64, r: f64) -> Result<f64> {
        for (name, v) in [("integrability", p), ("summation", r)] {
            if !(v >= 1.0) {
                return Err(Error::config(format!(
                    "Besov {name} index must lie in [1, ∞], got {v}"
                )));
            }
        }
        if !s.is_finite() {
            return Err(Error::config(format!("Besov regularity must be finite, got {s}")));
        }
        self.check_grid(f, sp)?;
        let c = sp.coefficients(f)?;
        let terms = (-1..=self.max_q()).map(|q| {
            let profile = self.block_profile(q).expect("index in range");
            let filtered: Vec<Complex64> = c.iter().zip(profile).map(|(c, w)| c * w).collect();
            let block = sp.field_from_coefficients(filtered);
            2f64.powf(q as f64 * s) * block.lp_norm(p)
        });
        Ok(if r.is_infinite() {
            terms.fold(0.0, f64::max)
        } else {
            terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
        })
    }
}

pub fn build_partition(grid: GridSpec, delta: f64) -> Result<DyadicPartition> {
    DyadicPartition::new(grid, delta)
}
