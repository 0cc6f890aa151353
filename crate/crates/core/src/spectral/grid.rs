use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_length: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "grid point count must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::config(format!(
                "grid half-length must be positive and finite, got {half_length}"
            )));
        }
        Ok(Self { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.point(j))
    }

    /// Fundamental wavenumber π/L.
    pub fn base_wavenumber(&self) -> f64 {
        PI / self.half_length
    }

    /// Signed wavenumber of FFT bin `j`; the Nyquist bin is reported as positive.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let j = j as isize;
        let signed = if j <= n / 2 { j } else { j - n };
        signed as f64 * self.base_wavenumber()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    /// Largest resolved |k|, i.e. the Nyquist wavenumber.
    pub fn max_wavenumber(&self) -> f64 {
        (self.n / 2) as f64 * self.base_wavenumber()
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }
}

pub fn make_grid(n: usize, half_length: f64) -> Result<GridSpec> {
    GridSpec::new(n, half_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_length_over_count() {
        let g = make_grid(64, 10.0).unwrap();
        assert_eq!(g.spacing(), 0.3125);
    }

    #[test]
    fn first_point_is_left_edge() {
        let g = make_grid(16, PI).unwrap();
        assert_eq!(g.point(0), -PI);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_grid(65, 10.0), Err(Error::Config(_))));
        assert!(make_grid(8, 10.0).is_err());
        assert!(make_grid(64, 0.0).is_err());
        assert!(make_grid(64, -1.0).is_err());
        assert!(make_grid(64, f64::NAN).is_err());
    }

    #[test]
    fn wavenumbers_follow_fft_order() {
        let g = make_grid(16, PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], 1.0);
        assert_eq!(k[8], 8.0);
        assert_eq!(k[9], -7.0);
        assert_eq!(k[15], -1.0);
        assert_eq!(g.max_wavenumber(), 8.0);
    }
}
