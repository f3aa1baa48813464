use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft;
use crate::spectral::grid::TorusGrid;

/// A real field on the torus holding both its grid samples and its Fourier
/// coefficients `û_k = (2π)^{-d} ∫ u e^{-ik·x} dx` (trapezoid rule).
///
/// Both sides are populated at construction and never change afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    physical: Vec<f64>,
    spectral: Vec<Complex64>,
}

/// Builds a field from grid samples, populating the spectral side.
pub fn to_spectral(grid: TorusGrid, physical: Vec<f64>) -> SpectralField {
    SpectralField::from_physical(grid, physical)
}

impl SpectralField {
    pub fn from_physical(grid: TorusGrid, physical: Vec<f64>) -> Self {
        assert_eq!(physical.len(), grid.len(), "sample count does not match grid");
        let mut spectral: Vec<Complex64> = physical.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&grid, &mut spectral);
        Self {
            grid,
            physical,
            spectral,
        }
    }

    /// Builds a field from coefficients. The coefficients are assumed to be
    /// Hermitian; the imaginary residue of the inverse transform is dropped.
    pub fn from_spectral(grid: TorusGrid, spectral: Vec<Complex64>) -> Self {
        assert_eq!(spectral.len(), grid.len(), "coefficient count does not match grid");
        let mut buf = spectral.clone();
        fft::inverse(&grid, &mut buf);
        let physical = buf.into_iter().map(|c| c.re).collect();
        Self {
            grid,
            physical,
            spectral,
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let samples = grid.nodes().map(|x| f(&x)).collect();
        Self::from_physical(grid, samples)
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            physical: vec![0.0; grid.len()],
            spectral: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        let mut spectral = vec![Complex64::default(); grid.len()];
        spectral[0] = Complex64::new(value, 0.0);
        Self {
            grid,
            physical: vec![value; grid.len()],
            spectral,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn physical(&self) -> &[f64] {
        &self.physical
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    pub fn into_parts(self) -> (TorusGrid, Vec<f64>, Vec<Complex64>) {
        (self.grid, self.physical, self.spectral)
    }

    /// Coefficient of the wave vector `k` (components must lie in `[-N/2, N/2]`).
    pub fn coefficient(&self, k: [i64; 3]) -> Complex64 {
        let n = self.grid.points() as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.grid.dim() {
            idx[a] = k[a].rem_euclid(n) as usize;
        }
        self.spectral[self.grid.flatten(idx)]
    }

    /// Applies a real radial Fourier multiplier `m(|k|^2)`.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let spectral = self
            .spectral
            .iter()
            .zip(self.grid.wavenumber_sq())
            .map(|(c, k2)| c * m(k2))
            .collect();
        Self::from_spectral(self.grid, spectral)
    }

    /// Applies the multiplier `table[|k|^2]` for an integer-indexed table.
    pub fn apply_shell_multiplier(&self, table: &[f64]) -> Self {
        let spectral = self
            .spectral
            .iter()
            .zip(self.grid.wavenumber_sq())
            .map(|(c, k2)| c * table[k2 as usize])
            .collect();
        Self::from_spectral(self.grid, spectral)
    }

    /// Pointwise map of the physical samples.
    pub fn map_physical(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_physical(self.grid, self.physical.iter().map(|&v| f(v)).collect())
    }

    /// `Σ coef_i · field_i` over fields sharing one grid.
    pub fn linear_combination(terms: &[(f64, &SpectralField)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let grid = first.grid;
        if terms.iter().any(|(_, f)| f.grid != grid) {
            return Err(Error::GridMismatch);
        }
        let mut physical = vec![0.0; grid.len()];
        let mut spectral = vec![Complex64::default(); grid.len()];
        for (coef, f) in terms {
            for (p, v) in physical.iter_mut().zip(&f.physical) {
                *p += coef * v;
            }
            for (p, v) in spectral.iter_mut().zip(&f.spectral) {
                *p += v * coef;
            }
        }
        Ok(Self {
            grid,
            physical,
            spectral,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            physical: self.physical.iter().map(|v| v * c).collect(),
            spectral: self.spectral.iter().map(|v| v * c).collect(),
        }
    }

    /// Spectral partial derivative along `axis`; the Nyquist mode is dropped
    /// so the result stays real.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim());
        let half = (self.grid.points() / 2) as i64;
        let spectral = self
            .spectral
            .iter()
            .zip(self.grid.modes())
            .map(|(c, k)| {
                if k[axis].abs() == half {
                    Complex64::default()
                } else {
                    c * Complex64::new(0.0, k[axis] as f64)
                }
            })
            .collect();
        Self::from_spectral(self.grid, spectral)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.grid.dim()).map(|a| self.derivative(a)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.physical.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square of the samples; equals the `s = 0` Sobolev norm.
    pub fn rms(&self) -> f64 {
        (self.physical.iter().map(|v| v * v).sum::<f64>() / self.grid.len() as f64).sqrt()
    }

    /// Trapezoid approximation of `∫ f(u) dx` over the torus.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.physical.iter().map(|&v| f(v)).sum::<f64>() * self.grid.cell_volume()
    }

    /// Largest violation of `û_{-k} = conj(û_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.spectral[i] - self.spectral[self.grid.mirror_flat(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.physical.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(dim: usize, n: usize) -> TorusGrid {
        TorusGrid::new(dim, n).unwrap()
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let f = to_spectral(grid(3, 8), vec![1.0; 512]);
        assert!((f.spectral()[0].re - 1.0).abs() < 1e-14);
        assert!(f.spectral()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn cosine_splits_between_two_modes() {
        let g = grid(3, 16);
        let f = SpectralField::from_fn(g, |x| x[0].cos());
        for (i, k) in g.modes().enumerate() {
            let want = if k == [1, 0, 0] || k == [-1, 0, 0] { 0.5 } else { 0.0 };
            assert!((f.spectral()[i].re - want).abs() < 1e-14);
            assert!(f.spectral()[i].im.abs() < 1e-14);
        }
        assert!((f.coefficient([-1, 0, 0]).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = grid(2, 32);
        let f = SpectralField::from_fn(g, |x| (2.0 * x[1]).sin());
        let d = f.derivative(1);
        for (x, v) in g.nodes().zip(d.physical()) {
            assert!((v - 2.0 * (2.0 * x[1]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SpectralField::zeros(grid(1, 8));
        let b = SpectralField::zeros(grid(1, 16));
        assert_eq!(a.try_add(&b), Err(Error::GridMismatch));
    }

    proptest! {
        #[test]
        fn round_trip_and_hermitian_symmetry(seed in 0u64..1000, dim in 1usize..=3) {
            let g = grid(dim, if dim == 3 { 8 } else { 16 });
            let samples: Vec<f64> = (0..g.len())
                .map(|i| ((i as u64 ^ seed) as f64 * 0.7311).sin() * (1.0 + (seed % 7) as f64))
                .collect();
            let f = SpectralField::from_physical(g, samples.clone());
            prop_assert!(f.hermitian_defect() < 1e-13);
            let back = SpectralField::from_spectral(g, f.spectral().to_vec());
            let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in back.physical().iter().zip(&samples) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }
}
