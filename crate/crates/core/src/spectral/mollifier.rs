//! Convolution with the rescaled bump `ρ_ε(x) = ε^{-d} ρ(x/ε)`.
//!
//! `ρ(x) ∝ exp(-1/(1-|x/R|^2))` inside the support radius `R`, normalized to
//! unit mass. Convolution is applied as the Fourier multiplier `ρ̂(εk)`, where
//! `ρ̂` is the continuous transform of the radial profile, evaluated by radial
//! quadrature and divided by the quadrature mass so that `ρ̂(0) = 1` exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;
use crate::spectral::sobolev::shell_table;

/// Smallest number of cells the mollifier radius must span to count as resolved.
pub const MIN_RESOLVED_CELLS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    /// Support radius of the unscaled profile.
    pub support_radius: f64,
    pub epsilon: f64,
}

impl MollifierSpec {
    pub fn new(epsilon: f64, support_radius: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive (got {epsilon})"
            )));
        }
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "support radius must be positive (got {support_radius})"
            )));
        }
        Ok(Self {
            support_radius,
            epsilon,
        })
    }

    /// Radius of `supp ρ_ε`.
    pub fn scaled_radius(&self) -> f64 {
        self.epsilon * self.support_radius
    }

    /// Unnormalized radial shape on the unit ball.
    pub fn shape(r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r * r)).exp()
        }
    }

    /// `ρ_ε(x)` as a unit-mass density in `dim` dimensions, `|x| = r`.
    pub fn density(&self, dim: usize, r: f64) -> f64 {
        let a = self.scaled_radius();
        Self::shape(r / a) / (a.powi(dim as i32) * unit_mass(dim))
    }

    /// `ρ̂(εξ)` for a frequency magnitude `ξ`.
    pub fn multiplier(&self, dim: usize, xi: f64) -> f64 {
        radial_transform(dim, xi * self.scaled_radius()) / radial_transform(dim, 0.0)
    }

    /// Cells spanned by the scaled support radius, `εR·N/(2π)`.
    pub fn resolution_cells(&self, grid: &TorusGrid) -> f64 {
        grid.cells(self.scaled_radius())
    }

    /// Fails when the scaled kernel is narrower than [`MIN_RESOLVED_CELLS`].
    pub fn check_resolved(&self, grid: &TorusGrid) -> Result<()> {
        let cells = self.resolution_cells(grid);
        if cells < MIN_RESOLVED_CELLS {
            return Err(Error::UnresolvableScale {
                what: "mollifier radius",
                cells,
                required: MIN_RESOLVED_CELLS,
            });
        }
        Ok(())
    }

    /// Multiplier per squared-wavenumber shell of the grid.
    pub fn shell_multipliers(&self, grid: &TorusGrid) -> Vec<f64> {
        let dim = grid.dim();
        let norm = radial_transform(dim, 0.0);
        let a = self.scaled_radius();
        shell_table(grid, |k2| radial_transform(dim, k2.sqrt() * a) / norm)
    }
}

/// `ρ_ε ∗ u` as an exact Fourier multiplier on the grid.
pub fn mollify(field: &SpectralField, moll: &MollifierSpec) -> SpectralField {
    field.apply_shell_multiplier(&moll.shell_multipliers(field.grid()))
}

fn unit_mass(dim: usize) -> f64 {
    let surface = match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    };
    surface * radial_transform(dim, 0.0)
}

/// `∫_0^1 shape(r) K_d(q r) r^{d-1} dr` with the radial Fourier kernel `K_d`.
fn radial_transform(dim: usize, q: f64) -> f64 {
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(32);
    }
    let panels = 4 + (q / 2.0).ceil() as usize;
    RULE.with(|gl| {
        gl.integrate_composite(0.0, 1.0, panels, |r| {
            let kernel = match dim {
                1 => (q * r).cos(),
                2 => bessel_j0(q * r),
                _ => sinc(q * r),
            };
            MollifierSpec::shape(r) * kernel * r.powi(dim as i32 - 1)
        })
    })
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0 + z.powi(4) / 120.0
    } else {
        z.sin() / z
    }
}

/// `J_0(z) = (1/π) ∫_0^π cos(z sin θ) dθ`; the trapezoid rule is spectrally
/// accurate for this periodic integrand.
pub(crate) fn bessel_j0(z: f64) -> f64 {
    let m = 24 + z.abs().ceil() as usize;
    let h = PI / m as f64;
    (0..m).map(|j| (z * (j as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sobolev::sobolev_norm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_has_unit_mass_and_compact_support() {
        let m = MollifierSpec::new(0.3, 1.0).unwrap();
        let gl = GaussLegendre::new(40);
        let mass1 = 2.0 * gl.integrate_composite(0.0, 0.3, 8, |r| m.density(1, r));
        let mass3 = 4.0 * PI * gl.integrate_composite(0.0, 0.3, 8, |r| m.density(3, r) * r * r);
        assert!((mass1 - 1.0).abs() < 1e-12);
        assert!((mass3 - 1.0).abs() < 1e-12);
        assert_eq!(m.density(3, 0.3), 0.0);
        assert_eq!(m.density(3, 0.31), 0.0);
        assert!(m.density(3, 0.1) > 0.0);
    }

    #[test]
    fn bessel_matches_reference_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j0(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-14);
    }

    #[test]
    fn multiplier_matches_direct_transform_in_1d() {
        // Independent route: ∫ ρ_ε(x) cos(ξx) dx over the real line.
        let m = MollifierSpec::new(0.2, 1.5).unwrap();
        let gl = GaussLegendre::new(40);
        for xi in [0.0, 1.0, 7.0, 30.0] {
            let direct = 2.0 * gl.integrate_composite(0.0, 0.3, 16, |x| m.density(1, x) * (xi * x).cos());
            assert!((m.multiplier(1, xi) - direct).abs() < 1e-12, "xi={xi}");
        }
    }

    #[test]
    fn constant_is_unchanged() {
        let g = TorusGrid::new(3, 16).unwrap();
        let f = SpectralField::constant(g, 2.5);
        let out = mollify(&f, &MollifierSpec::new(0.7, 1.0).unwrap());
        assert!(out.physical().iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn single_mode_is_scaled_by_the_multiplier() {
        let g = TorusGrid::new(2, 16).unwrap();
        let m = MollifierSpec::new(0.4, 1.0).unwrap();
        let f = SpectralField::from_fn(g, |x| (3.0 * x[0] + 4.0 * x[1]).cos());
        let out = mollify(&f, &m);
        let factor = m.multiplier(2, 5.0);
        assert!(factor.abs() <= 1.0);
        for (a, b) in out.physical().iter().zip(f.physical()) {
            assert!((a - factor * b).abs() < 1e-12);
        }
    }

    #[test]
    fn convergence_as_epsilon_halves() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = SpectralField::from_fn(g, |x| (x[0].sin() + 0.5 * (2.0 * x[1]).cos()).exp());
        let mut last = f64::INFINITY;
        let mut eps = 0.5;
        for _ in 0..14 {
            let diff = mollify(&f, &MollifierSpec::new(eps, 1.0).unwrap()).try_sub(&f).unwrap();
            let err = sobolev_norm(&diff, 0.0);
            assert!(err < last, "eps={eps}: {err} !< {last}");
            last = err;
            eps *= 0.5;
        }
        assert!(last < 1e-6, "{last}");
    }

    #[test]
    fn resolution_check() {
        let g = TorusGrid::new(1, 4096).unwrap();
        let c = 0.25f64;
        let n = 4.0;
        let squared = MollifierSpec::new((c / n).powi(2), 1.0).unwrap();
        assert!(squared.check_resolved(&g).is_ok());
        let tiny = MollifierSpec::new(1e-4, 1.0).unwrap();
        assert!(matches!(tiny.check_resolved(&g), Err(Error::UnresolvableScale { .. })));
    }

    proptest! {
        #[test]
        fn mollification_contracts_every_sobolev_norm(seed in 0u64..200, eps in 0.01f64..2.0, s in -1.0f64..2.0) {
            let g = TorusGrid::new(2, 16).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = SpectralField::from_physical(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let m = MollifierSpec::new(eps, 1.0).unwrap();
            prop_assert!(m.shell_multipliers(&g).iter().all(|v| v.is_nan() || v.abs() <= 1.0 + 1e-12));
            prop_assert!(sobolev_norm(&mollify(&f, &m), s) <= sobolev_norm(&f, s) * (1.0 + 1e-12));
        }
    }
}
