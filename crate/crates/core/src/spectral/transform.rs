use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::spectral::field::Field;
use crate::spectral::grid::GridSpec;

/// FFT plans, wavenumbers and the 3/2-padded grid used for dealiasing.
///
/// Coefficients are normalized so that `f(x) = Σ c_j exp(i k_j (x + L))`.
/// The Nyquist bin is treated as k = 0 by every multiplier, so the discrete
/// derivative annihilates it and `(1 - D²)` stays exactly invertible.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    k: Arc<[f64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    forward_fine: Arc<dyn Fft<f64>>,
    inverse_fine: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let fine = Self::fine_len_for(n);
        let mut planner = FftPlanner::new();
        let mut k = grid.wavenumbers();
        k[grid.nyquist_index()] = 0.0;
        Self {
            grid,
            k: k.into(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            forward_fine: planner.plan_fft_forward(fine),
            inverse_fine: planner.plan_fft_inverse(fine),
        }
    }

    fn fine_len_for(n: usize) -> usize {
        3 * n / 2
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Wavenumbers as used by the multipliers (Nyquist set to zero).
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn fine_len(&self) -> usize {
        Self::fine_len_for(self.grid.n())
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let n = values.len();
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    pub fn coefficients(&self, f: &Field) -> Result<Vec<Complex64>> {
        f.ensure_finite("input field")?;
        Ok(self.forward(f.values()))
    }

    pub fn field_from_coefficients(&self, coeffs: Vec<Complex64>) -> Field {
        let values = self.inverse(coeffs);
        Field::new(self.grid, values).expect("coefficient count matches grid")
    }

    /// Applies `mult(k)` in Fourier space.
    pub fn apply_multiplier(&self, f: &Field, mult: impl Fn(f64) -> Complex64) -> Result<Field> {
        let mut c = self.coefficients(f)?;
        c.iter_mut().zip(self.k.iter()).for_each(|(c, &k)| *c *= mult(k));
        Ok(self.field_from_coefficients(c))
    }

    pub fn derivative(&self, f: &Field) -> Result<Field> {
        self.apply_multiplier(f, |k| Complex64::new(0.0, k))
    }

    /// Solves `(1 - ∂²) u = m`; also the convolution with `p = e^{-|x|}/2`.
    pub fn helmholtz_solve(&self, m: &Field) -> Result<Field> {
        self.apply_multiplier(m, |k| Complex64::new(1.0 / (1.0 + k * k), 0.0))
    }

    pub fn convolve_p(&self, f: &Field) -> Result<Field> {
        self.helmholtz_solve(f)
    }

    /// Convolution with the kernel derivative, so that `p_x * f = ∂_x (p * f)`.
    pub fn convolve_p_x(&self, f: &Field) -> Result<Field> {
        self.apply_multiplier(f, |k| Complex64::new(0.0, k / (1.0 + k * k)))
    }

    /// Multiplies coefficients in place by `i k`.
    pub fn differentiate_coefficients(&self, c: &mut [Complex64]) {
        c.iter_mut()
            .zip(self.k.iter())
            .for_each(|(c, &k)| *c *= Complex64::new(0.0, k));
    }

    pub fn helmholtz_coefficients(&self, c: &mut [Complex64]) {
        c.iter_mut()
            .zip(self.k.iter())
            .for_each(|(c, &k)| *c /= 1.0 + k * k);
    }

    /// Samples a coefficient vector on the 3n/2 dealiasing grid.
    pub fn to_fine(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.grid.n();
        let nf = self.fine_len();
        let half = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); nf];
        buf[..half].copy_from_slice(&coeffs[..half]);
        for r in 1..half {
            buf[nf - r] = coeffs[n - r];
        }
        let nyq = coeffs[half] * 0.5;
        buf[half] = nyq;
        buf[nf - half] = nyq;
        self.inverse_fine.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Projects fine-grid samples back to the resolved modes (Nyquist dropped).
    pub fn from_fine(&self, fine: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let nf = fine.len();
        debug_assert_eq!(nf, self.fine_len());
        let half = n / 2;
        let mut buf: Vec<Complex64> = fine.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_fine.process(&mut buf);
        let scale = 1.0 / nf as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[..half].copy_from_slice(&buf[..half]);
        for r in 1..half {
            out[n - r] = buf[nf - r];
        }
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    /// Evaluates a pointwise nonlinearity of several fields on the padded grid
    /// and returns the resolved coefficients of the result.
    pub fn dealiased(
        &self,
        inputs: &[&[Complex64]],
        f: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Vec<Complex64> {
        let fine: Vec<Vec<f64>> = inputs.iter().map(|c| self.to_fine(c)).collect();
        let nf = self.fine_len();
        let product: Vec<f64> = (0..nf)
            .map(|i| {
                let mut args = [0.0; 8];
                for (a, col) in args.iter_mut().zip(&fine) {
                    *a = col[i];
                }
                f(&args[..fine.len()])
            })
            .collect();
        self.from_fine(&product)
    }

    pub fn interpolant(&self, f: &Field) -> Result<Interpolant> {
        Ok(Interpolant::from_coefficients(self.grid, self.coefficients(f)?))
    }
}

/// Trigonometric interpolant of a grid field, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct Interpolant {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        Self { grid, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.n();
        let half = n / 2;
        let s = x + self.grid.half_length();
        let theta = self.grid.base_wavenumber() * s;
        let step = Complex64::from_polar(1.0, theta);
        let mut z = step;
        let mut acc = 0.0;
        for j in 1..half {
            acc += (self.coeffs[j] * z).re;
            z *= step;
        }
        let nyquist = self.coeffs[half].re * (half as f64 * theta).cos();
        self.coeffs[0].re + 2.0 * acc + nyquist
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        if xs.len() < 8 {
            xs.iter().map(|&x| self.eval(x)).collect()
        } else {
            xs.par_iter().map(|&x| self.eval(x)).collect()
        }
    }
}
