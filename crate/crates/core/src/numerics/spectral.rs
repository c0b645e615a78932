use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexField, GridSpec};

/// Kinetic propagation over a time `τ`, either real (`exp(-iτk²/2)`, unitary)
/// or imaginary (`exp(-τk²/2)`, a decay).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KineticStep {
    Real(f64),
    Imaginary(f64),
}

impl KineticStep {
    pub fn multiplier(self, k2: f64) -> Complex64 {
        match self {
            KineticStep::Real(tau) => Complex64::from_polar(1.0, -0.5 * tau * k2),
            KineticStep::Imaginary(tau) => Complex64::new((-0.5 * tau * k2).exp(), 0.0),
        }
    }
}

/// Discrete Fourier machinery for one grid.
///
/// The forward transform is unnormalized and the inverse carries the `1/N`,
/// so `inverse(forward(ψ)) = ψ`.
pub struct Spectral {
    grid: Arc<GridSpec>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    k2: Vec<f64>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("points", &self.grid.points())
            .finish_non_exhaustive()
    }
}

impl Spectral {
    pub fn new(grid: Arc<GridSpec>) -> Self {
        let mut planner = FftPlanner::new();
        let forward: Vec<_> = grid
            .points()
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse: Vec<_> = grid
            .points()
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let longest = grid.points().iter().copied().max().unwrap_or(0);

        let mut k2 = vec![0.0; grid.len()];
        let kk: Vec<&[f64]> = (0..grid.ndim()).map(|a| grid.wavenumbers(a)).collect();
        for (flat, slot) in k2.iter_mut().enumerate() {
            let mut s = 0.0;
            for (a, k) in kk.iter().enumerate() {
                let j = (flat / grid.stride(a)) % grid.points()[a];
                s += k[j] * k[j];
            }
            *slot = s;
        }

        Self {
            grid,
            forward,
            inverse,
            k2,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            line: vec![Complex64::new(0.0, 0.0); longest],
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    /// `|k|²` in storage order of the transformed array.
    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        for axis in 0..self.grid.ndim() {
            self.transform_axis(data, axis, true);
        }
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        for axis in 0..self.grid.ndim() {
            self.transform_axis(data, axis, false);
        }
        let inv = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= inv);
    }

    fn transform_axis(&mut self, data: &mut [Complex64], axis: usize, forward: bool) {
        let plan = if forward {
            &self.forward[axis]
        } else {
            &self.inverse[axis]
        };
        let n = self.grid.points()[axis];
        let stride = self.grid.stride(axis);
        if stride == 1 {
            plan.process_with_scratch(data, &mut self.scratch);
            return;
        }
        let block = n * stride;
        let line = &mut self.line[..n];
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process_with_scratch(line, &mut self.scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }

    /// Transforms, multiplies pointwise in wavenumber space, transforms back.
    pub fn apply_multiplier(&mut self, data: &mut [Complex64], multiplier: &[Complex64]) {
        self.forward(data);
        data.iter_mut().zip(multiplier).for_each(|(c, m)| *c *= m);
        self.inverse(data);
    }

    pub fn kinetic_multiplier(&self, step: KineticStep) -> Vec<Complex64> {
        self.k2.iter().map(|&k2| step.multiplier(k2)).collect()
    }

    pub fn apply_kinetic(&mut self, field: &mut ComplexField, step: KineticStep) {
        let m = self.kinetic_multiplier(step);
        self.apply_multiplier(field.values_mut(), &m);
    }

    /// Spectral `∇²ψ`.
    pub fn laplacian(&mut self, field: &ComplexField) -> ComplexField {
        let mut out = field.clone();
        let data = out.values_mut();
        self.forward(data);
        data.iter_mut().zip(&self.k2).for_each(|(c, k2)| *c *= -k2);
        self.inverse(data);
        out
    }

    /// `½∫|∇ψ|²`, evaluated in wavenumber space.
    pub fn kinetic_energy(&mut self, field: &ComplexField) -> f64 {
        let mut data = field.values().to_vec();
        self.forward(&mut data);
        let n = data.len() as f64;
        let s: f64 = data
            .iter()
            .zip(&self.k2)
            .map(|(c, k2)| c.norm_sqr() * k2)
            .sum();
        0.5 * s / n * self.grid.volume_element()
    }

    /// Exact periodic translation `ψ(r) -> ψ(r - shift·e_z)`.
    pub fn translate_z(&mut self, field: &ComplexField, shift: f64) -> ComplexField {
        let mut out = field.clone();
        let z = self.grid.z_axis();
        let kz = self.grid.wavenumbers(z).to_vec();
        let nz = self.grid.points()[z];
        let data = out.values_mut();
        self.forward(data);
        for (flat, c) in data.iter_mut().enumerate() {
            let k = kz[flat % nz];
            *c *= Complex64::from_polar(1.0, -k * shift);
        }
        self.inverse(data);
        out
    }
}

/// One-off kinetic phase (or decay) on a field; builds its own transforms.
pub fn apply_kinetic_phase(field: &mut ComplexField, step: KineticStep) {
    Spectral::new(field.grid().clone()).apply_kinetic(field, step);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm2;
    use std::f64::consts::PI;

    fn grid1(l: f64, n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::line(l, n).unwrap())
    }

    #[test]
    fn plane_wave_picks_up_phase() {
        let g = grid1(16.0, 128);
        let k = 5.0 * g.wavenumber_spacing(0);
        let tau = 0.37;
        let psi = ComplexField::from_fn(g.clone(), |r| Complex64::from_polar(1.0, k * r[2]));
        let mut out = psi.clone();
        let mut sp = Spectral::new(g);
        sp.apply_kinetic(&mut out, KineticStep::Real(tau));
        let phase = Complex64::from_polar(1.0, -0.5 * tau * k * k);
        for (a, b) in psi.values().iter().zip(out.values()) {
            assert!((a * phase - b).norm() < 1e-12);
            assert!((b.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_unchanged() {
        let g = grid1(8.0, 64);
        let psi = ComplexField::from_fn(g.clone(), |_| Complex64::new(0.3, -0.1));
        let mut out = psi.clone();
        Spectral::new(g).apply_kinetic(&mut out, KineticStep::Real(1.3));
        for (a, b) in psi.values().iter().zip(out.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn laplacian_of_plane_wave() {
        let g = Arc::new(GridSpec::new(2, &[4.0, 8.0], &[16, 32]).unwrap());
        let kx = 2.0 * g.wavenumber_spacing(0);
        let kz = -3.0 * g.wavenumber_spacing(1);
        let psi = ComplexField::from_fn(g.clone(), |r| {
            Complex64::from_polar(1.0, kx * r[0] + kz * r[2])
        });
        let lap = Spectral::new(g).laplacian(&psi);
        let k2 = kx * kx + kz * kz;
        for (a, b) in psi.values().iter().zip(lap.values()) {
            assert!((a * (-k2) - b).norm() < 1e-11);
        }
    }

    #[test]
    fn round_trip_3d() {
        let g = Arc::new(GridSpec::new(3, &[2.0, 3.0, 4.0], &[8, 10, 16]).unwrap());
        let psi = ComplexField::from_fn(g.clone(), |r| {
            Complex64::new(
                (-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])).exp(),
                r[0] * r[2] * 0.01,
            )
        });
        let mut data = psi.values().to_vec();
        let mut sp = Spectral::new(g);
        sp.forward(&mut data);
        sp.inverse(&mut data);
        for (a, b) in psi.values().iter().zip(&data) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn kinetic_energy_of_oscillator_ground_state() {
        let g = grid1(20.0, 256);
        let psi = ComplexField::from_fn(g.clone(), |r| {
            Complex64::new(PI.powf(-0.25) * (-r[2] * r[2] / 2.0).exp(), 0.0)
        });
        let t = Spectral::new(g).kinetic_energy(&psi);
        assert!((t - 0.25).abs() < 1e-12);
        assert!((norm2(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_moves_center() {
        let g = grid1(20.0, 256);
        let psi = ComplexField::from_fn(g.clone(), |r| {
            Complex64::new(PI.powf(-0.25) * (-r[2] * r[2] / 2.0).exp(), 0.0)
        });
        let moved = Spectral::new(g.clone()).translate_z(&psi, 3.3);
        let z = g.z_coords();
        let mean: f64 = moved
            .values()
            .iter()
            .zip(&z)
            .map(|(c, z)| c.norm_sqr() * z)
            .sum::<f64>()
            * g.volume_element();
        assert!((mean - 3.3).abs() < 1e-10);
    }
}
