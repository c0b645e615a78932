use std::sync::Arc;

use num_complex::Complex64;

use super::GridSpec;
use crate::error::{Error, Result};

/// Complex amplitude sampled on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Arc<GridSpec>,
    values: Vec<Complex64>,
}

/// Real field on a grid (potentials, densities).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl ComplexField {
    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(grid: Arc<GridSpec>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(r)` with `r = [x, y, z]` (missing axes are zero).
    pub fn from_fn(grid: Arc<GridSpec>, mut f: impl FnMut([f64; 3]) -> Complex64) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_point(|i, r| values[i] = f(r));
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|c| *c *= factor);
    }

    /// Rescales to unit norm and returns the norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        self.normalize_to(1.0)
    }

    pub fn normalize_to(&mut self, target: f64) -> Result<f64> {
        let n = norm2(self);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::EmptyDensity);
        }
        self.scale((target / n).sqrt());
        Ok(n)
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl ScalarField {
    pub fn from_values(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<GridSpec>, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        grid.for_each_point(|i, r| values[i] = f(r));
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Values along `z` through the transverse origin.
    pub fn axial_slice(&self) -> Vec<f64> {
        self.grid
            .axial_line()
            .into_iter()
            .map(|i| self.values[i])
            .collect()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.volume_element()
    }
}

/// Discrete `∫|ψ|² dⁿr`.
pub fn norm2(field: &ComplexField) -> f64 {
    field.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * field.grid.volume_element()
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn overlap(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    a.check_same_grid(b)?;
    let s: Complex64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s * a.grid.volume_element())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian(grid: &Arc<GridSpec>, shift: f64) -> ComplexField {
        let a = PI.powf(-0.25);
        ComplexField::from_fn(grid.clone(), |r| {
            Complex64::new(a * (-(r[2] - shift).powi(2) / 2.0).exp(), 0.0)
        })
    }

    #[test]
    fn gaussian_is_normalized() {
        let g = Arc::new(GridSpec::line(64.0, 1024).unwrap());
        let psi = gaussian(&g, 0.0);
        assert!((norm2(&psi) - 1.0).abs() < 1e-10);
        assert!((overlap(&psi, &psi).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zeros_and_scaling() {
        let g = Arc::new(GridSpec::line(64.0, 1024).unwrap());
        assert_eq!(norm2(&ComplexField::zeros(g.clone())), 0.0);
        let mut psi = gaussian(&g, 1.0);
        let n = norm2(&psi);
        psi.scale(2.0);
        assert_relative_eq!(norm2(&psi), 4.0 * n, max_relative = 1e-14);
    }

    #[test]
    fn parity_orthogonality() {
        let g = Arc::new(GridSpec::line(32.0, 512).unwrap());
        let even = gaussian(&g, 0.0);
        let odd = ComplexField::from_fn(g.clone(), |r| {
            Complex64::new(r[2] * (-r[2] * r[2] / 2.0).exp(), 0.0)
        });
        assert!(overlap(&even, &odd).unwrap().norm() < 1e-10);
    }

    #[test]
    fn hermitian_symmetry() {
        let g = Arc::new(GridSpec::line(16.0, 128).unwrap());
        let a = ComplexField::from_fn(g.clone(), |r| Complex64::new(r[2].cos(), r[2].sin() * 0.3));
        let b = gaussian(&g, 0.7);
        let ab = overlap(&a, &b).unwrap();
        let ba = overlap(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = ComplexField::zeros(Arc::new(GridSpec::line(16.0, 128).unwrap()));
        let b = ComplexField::zeros(Arc::new(GridSpec::line(16.0, 256).unwrap()));
        assert!(matches!(overlap(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn normalize_empty_is_error() {
        let mut a = ComplexField::zeros(Arc::new(GridSpec::line(16.0, 128).unwrap()));
        assert!(matches!(a.normalize(), Err(Error::EmptyDensity)));
    }
}
