use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::spectral::grid::GridSpec;

/// Real samples of a function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::config(format!(
                "field has {} samples but grid has {} points",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.points().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(j) => Err(Error::numeric(format!(
                "{what} has non-finite value {} at x = {}",
                self.values[j],
                self.grid.point(j)
            ))),
        }
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::config("fields live on different grids"))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination; panics if the grids differ in size.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.values.len(), other.values.len(), "field size mismatch");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rectangle-rule integral, spectrally accurate for smooth periodic data.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn inner(&self, other: &Field) -> f64 {
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Grid L^p norm; `p = f64::INFINITY` gives the sample maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        if p == 2.0 {
            return self.l2_norm();
        }
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (self.grid.spacing() * sum).powf(1.0 / p)
    }

    /// Largest |f| over the outer half |x| >= L/2 of the domain.
    pub fn seam_max(&self) -> f64 {
        let quarter = self.grid.half_length() / 2.0;
        self.grid
            .points()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() >= quarter)
            .fold(0.0, |acc, (_, v)| acc.max(v.abs()))
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, c: f64) -> Field {
        self.scale(c)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(64, PI).unwrap()
    }

    #[test]
    fn length_must_match() {
        assert!(Field::new(grid(), vec![0.0; 63]).is_err());
        assert!(Field::new(grid(), vec![0.0; 64]).is_ok());
    }

    #[test]
    fn detects_non_finite() {
        let mut f = Field::zeros(grid());
        assert!(f.ensure_finite("f").is_ok());
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(f.ensure_finite("f"), Err(Error::Numeric(_))));
    }

    #[test]
    fn quadrature_of_cos_squared() {
        let f = Field::from_fn(grid(), |x| (3.0 * x).cos());
        assert!((f.inner(&f) - PI).abs() < 1e-12);
        assert!((f.l2_norm() - PI.sqrt()).abs() < 1e-12);
        assert!((f.lp_norm(2.0) - f.l2_norm()).abs() < 1e-15);
        assert_eq!(f.lp_norm(f64::INFINITY), f.max_abs());
    }

    #[test]
    fn seam_max_looks_only_at_outer_half() {
        let f = Field::from_fn(grid(), |x| if x.abs() < PI / 2.0 { 5.0 } else { 0.25 });
        assert_eq!(f.seam_max(), 0.25);
    }
}
