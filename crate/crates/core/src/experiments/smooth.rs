use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};
use crate::wave::WaveState;

/// A seeded band-limited pair `(u₀, u₁)`. The same seed describes the same
/// trigonometric polynomial on every grid that can hold it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothDataSpec {
    pub seed: u64,
    /// Largest `|kᵢ|` per axis.
    pub max_wavenumber: i64,
    pub amplitude: f64,
}

impl Default for SmoothDataSpec {
    fn default() -> Self {
        Self {
            seed: 20240611,
            max_wavenumber: 3,
            amplitude: 0.5,
        }
    }
}

impl SmoothDataSpec {
    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// One representative per `±k` pair with its `(û_k, ∂ₜû_k)`.
    pub fn coefficients(&self, dim: usize) -> Vec<([i64; 3], Complex64, Complex64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let k_max = self.max_wavenumber;
        let span = (2 * k_max + 1) as usize;
        let total = span.pow(dim as u32);
        let mut out = Vec::new();
        for flat in 0..total {
            let mut k = [0i64; 3];
            let mut rest = flat;
            for axis in (0..dim).rev() {
                k[axis] = (rest % span) as i64 - k_max;
                rest /= span;
            }
            // keep k with first non-zero component positive, plus k = 0
            let lead = k.iter().copied().find(|&c| c != 0).unwrap_or(0);
            if lead < 0 {
                continue;
            }
            let decay = self.amplitude / (1.0 + (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).powf(1.5);
            let mut draw = |real: bool| {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                Complex64::new(re, if real { 0.0 } else { im }) * decay
            };
            let zero = lead == 0;
            let a = draw(zero);
            let b = draw(zero);
            out.push((k, a, b));
        }
        out
    }

    pub fn state(&self, grid: TorusGrid) -> Result<WaveState> {
        if self.is_zero() {
            return Ok(WaveState::zeros(grid));
        }
        if 2 * self.max_wavenumber >= grid.points() as i64 {
            return Err(Error::UnresolvableScale {
                what: "smooth data band",
                cells: grid.points() as f64,
                required: (2 * self.max_wavenumber + 1) as f64,
            });
        }
        let mut u = vec![Complex64::default(); grid.len()];
        let mut ut = vec![Complex64::default(); grid.len()];
        let n = grid.points() as i64;
        let index = |k: [i64; 3]| {
            let mut idx = [0usize; 3];
            for a in 0..grid.dim() {
                idx[a] = k[a].rem_euclid(n) as usize;
            }
            grid.flatten(idx)
        };
        for (k, a, b) in self.coefficients(grid.dim()) {
            let i = index(k);
            let m = index([-k[0], -k[1], -k[2]]);
            u[i] = a;
            ut[i] = b;
            u[m] = a.conj();
            ut[m] = b.conj();
        }
        Ok(WaveState {
            u: SpectralField::from_spectral(grid, u),
            ut: SpectralField::from_spectral(grid, ut),
            time: 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_function_on_every_grid() {
        let spec = SmoothDataSpec::default();
        let coarse = spec.state(TorusGrid::new(2, 16).unwrap()).unwrap();
        let fine = spec.state(TorusGrid::new(2, 32).unwrap()).unwrap();
        // node (i, j) of the coarse grid is node (2i, 2j) of the fine grid
        for i in 0..16 {
            for j in 0..16 {
                let c = coarse.u.physical()[i * 16 + j];
                let f = fine.u.physical()[(2 * i) * 32 + 2 * j];
                assert!((c - f).abs() < 1e-13);
            }
        }
        assert!(coarse.u.hermitian_defect() < 1e-15);
    }

    #[test]
    fn zero_and_band_checks() {
        let g = TorusGrid::new(3, 8).unwrap();
        let z = SmoothDataSpec::zero().state(g).unwrap();
        assert!(z.u.physical().iter().all(|&v| v == 0.0));
        let wide = SmoothDataSpec {
            max_wavenumber: 4,
            ..SmoothDataSpec::default()
        };
        assert!(wide.state(g).is_err());
    }
}
