use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic Cartesian grid with 1 to 3 axes.
///
/// Axis `a` holds `points[a]` samples at `-L_a + j·dx_a`, `j = 0..N_a`, so the
/// lattice is symmetric about the origin under `j -> (N_a - j) mod N_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    half_extents: Vec<f64>,
    points: Vec<usize>,
    spacing: Vec<f64>,
    wavenumbers: Vec<Vec<f64>>,
}

impl GridSpec {
    pub fn new(ndim: usize, half_extents: &[f64], points: &[usize]) -> Result<Self> {
        if !(1..=3).contains(&ndim) {
            return Err(Error::InvalidGrid(format!(
                "dimension count must be 1..=3, got {ndim}"
            )));
        }
        if half_extents.len() != ndim || points.len() != ndim {
            return Err(Error::InvalidGrid(format!(
                "expected {ndim} extents and point counts, got {} and {}",
                half_extents.len(),
                points.len()
            )));
        }
        for (&l, &n) in half_extents.iter().zip(points) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "half extent must be positive, got {l}"
                )));
            }
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "point count must be even and at least 8, got {n}"
                )));
            }
        }

        let spacing: Vec<f64> = half_extents
            .iter()
            .zip(points)
            .map(|(&l, &n)| 2.0 * l / n as f64)
            .collect();
        let wavenumbers = half_extents
            .iter()
            .zip(points)
            .map(|(&l, &n)| {
                let dk = PI / l;
                (0..n)
                    .map(|j| {
                        let m = if j < n / 2 {
                            j as f64
                        } else {
                            j as f64 - n as f64
                        };
                        m * dk
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            half_extents: half_extents.to_vec(),
            points: points.to_vec(),
            spacing,
            wavenumbers,
        })
    }

    /// One-dimensional grid along `z`.
    pub fn line(half_extent: f64, points: usize) -> Result<Self> {
        Self::new(1, &[half_extent], &[points])
    }

    pub fn ndim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_extents(&self) -> &[f64] {
        &self.half_extents
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    pub fn wavenumber_spacing(&self, axis: usize) -> f64 {
        PI / self.half_extents[axis]
    }

    pub fn volume_element(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the shaking axis.
    pub fn z_axis(&self) -> usize {
        self.ndim() - 1
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let l = self.half_extents[axis];
        let dx = self.spacing[axis];
        (0..self.points[axis]).map(|j| -l + j as f64 * dx).collect()
    }

    pub fn z_coords(&self) -> Vec<f64> {
        self.coords(self.z_axis())
    }

    /// Distance between consecutive flat indices along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.points[axis + 1..].iter().product()
    }

    /// Calls `f(flat_index, position)` for every grid point in storage order.
    /// Positions are padded to three components `[x, y, z]` with zeros on
    /// missing transverse axes.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let coords: Vec<Vec<f64>> = (0..self.ndim()).map(|a| self.coords(a)).collect();
        let mut idx = vec![0usize; self.ndim()];
        for flat in 0..self.len() {
            let c = |a: usize| coords[a][idx[a]];
            let r = match self.ndim() {
                1 => [0.0, 0.0, c(0)],
                2 => [c(0), 0.0, c(1)],
                _ => [c(0), c(1), c(2)],
            };
            f(flat, r);
            for a in (0..self.ndim()).rev() {
                idx[a] += 1;
                if idx[a] < self.points[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Flat indices of the `z` line through the transverse origin.
    pub fn axial_line(&self) -> Vec<usize> {
        let nz = self.points[self.z_axis()];
        let mut base = 0;
        for a in 0..self.z_axis() {
            base += (self.points[a] / 2) * self.stride(a);
        }
        (0..nz).map(|j| base + j).collect()
    }

    /// Flat index of the mirror image `r -> -r` on the periodic lattice.
    pub fn mirror_index(&self, flat: usize) -> usize {
        let mut out = 0;
        for a in 0..self.ndim() {
            let n = self.points[a];
            let s = self.stride(a);
            let j = (flat / s) % n;
            out += ((n - j) % n) * s;
        }
        out
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.points == other.points && self.half_extents == other.half_extents
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_spacing_and_wavenumbers() {
        let g = GridSpec::line(64.0, 1024).unwrap();
        assert_relative_eq!(g.spacing()[0], 0.125);
        assert_relative_eq!(g.wavenumber_spacing(0), PI / 64.0);
        let kmax = g.wavenumbers(0).iter().fold(0.0f64, |m, k| m.max(k.abs()));
        assert_relative_eq!(kmax, PI / 0.125, max_relative = 1e-14);
        assert_relative_eq!(g.wavenumbers(0)[1], PI / 64.0);
    }

    #[test]
    fn cigar_volume_element() {
        let g = GridSpec::new(3, &[8.0, 8.0, 64.0], &[64, 64, 512]).unwrap();
        assert_relative_eq!(g.volume_element(), 0.015625, max_relative = 1e-14);
        assert_eq!(g.len(), 64 * 64 * 512);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridSpec::new(0, &[], &[]).is_err());
        assert!(GridSpec::new(4, &[1.0; 4], &[8; 4]).is_err());
        assert!(GridSpec::line(1.0, 9).is_err());
        assert!(GridSpec::line(1.0, 6).is_err());
        assert!(GridSpec::line(0.0, 16).is_err());
        assert!(GridSpec::line(-2.0, 16).is_err());
    }

    #[test]
    fn symmetric_about_origin() {
        let g = GridSpec::new(2, &[3.0, 5.0], &[8, 16]).unwrap();
        let mut pos = vec![[0.0; 3]; g.len()];
        g.for_each_point(|i, r| pos[i] = r);
        for i in 0..g.len() {
            let m = g.mirror_index(i);
            let (a, b) = (pos[i], pos[m]);
            // the -L sample maps to itself through periodicity
            for c in [0, 2] {
                let half = if c == 0 { 3.0 } else { 5.0 };
                let s = a[c] + b[c];
                assert!(s.abs() < 1e-12 || (s + 2.0 * half).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn axial_line_passes_through_origin() {
        let g = GridSpec::new(2, &[3.0, 5.0], &[8, 16]).unwrap();
        let mut pos = vec![[0.0; 3]; g.len()];
        g.for_each_point(|i, r| pos[i] = r);
        let line = g.axial_line();
        assert_eq!(line.len(), 16);
        for (j, &i) in line.iter().enumerate() {
            assert_eq!(pos[i][0], 0.0);
            assert_relative_eq!(pos[i][2], -5.0 + j as f64 * 10.0 / 16.0);
        }
    }
}
