use crate::error::{Error, Result};
use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;

/// Default ratio between the plateau radius and the support radius of the
/// localizing cutoff: `χ ≡ 1` inside `2/3` of the radius. Called with the
/// radius `r/2` this gives the cutoff that is one on `B(r/3)` and vanishes
/// outside `B(r/2)`.
pub const DEFAULT_CUTOFF_SHARPNESS: f64 = 2.0 / 3.0;

/// Tabulates `f(|k|^2)` for every squared wavenumber that occurs on the grid.
/// Entries for shells that do not occur are left as NaN.
pub fn shell_table(grid: &TorusGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let half = grid.points() / 2;
    let mut table = vec![f64::NAN; grid.max_wavenumber_sq() + 1];
    let mut fill = |k2: usize| {
        if table[k2].is_nan() {
            table[k2] = f(k2 as f64);
        }
    };
    match grid.dim() {
        1 => (0..=half).for_each(|a| fill(a * a)),
        2 => {
            for a in 0..=half {
                for b in a..=half {
                    fill(a * a + b * b);
                }
            }
        }
        _ => {
            for a in 0..=half {
                for b in a..=half {
                    for c in b..=half {
                        fill(a * a + b * b + c * c);
                    }
                }
            }
        }
    }
    table
}

/// Weighted sum `Σ_k w(|k|^2) |c_k|^2` over a coefficient array.
pub(crate) fn weighted_energy(grid: &TorusGrid, coeffs: &[rustfft::num_complex::Complex64], table: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(grid.wavenumber_sq())
        .map(|(c, k2)| table[k2 as usize] * c.norm_sqr())
        .sum()
}

/// `‖u‖_{H^s} = (Σ_k (1+|k|^2)^s |û_k|^2)^{1/2}`; any real `s` is allowed.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let table = shell_table(field.grid(), |k2| (1.0 + k2).powf(s));
    weighted_energy(field.grid(), field.spectral(), &table).sqrt()
}

/// `(‖u‖²_{H^s} + ‖v‖²_{H^{s-1}})^{1/2}`, the norm of the pair `(u, v)`.
pub fn pair_norm(u: &SpectralField, v: &SpectralField, s: f64) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(sobolev_norm(u, s).hypot(sobolev_norm(v, s - 1.0)))
}

/// Smooth radial step: one on `[0, inner]`, zero on `[outer, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCutoff {
    inner: f64,
    outer: f64,
}

impl SmoothCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radii must satisfy 0 <= inner < outer (got {inner}, {outer})"
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let x = (r - self.inner) / (self.outer - self.inner);
        let a = transition(1.0 - x);
        let b = transition(x);
        a / (a + b)
    }
}

fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Samples of `χ(|x - center|)` where `χ` vanishes outside `radius` and is one
/// inside `sharpness * radius`.
pub fn cutoff_samples(grid: &TorusGrid, center: &[f64; 3], radius: f64, sharpness: f64) -> Result<Vec<f64>> {
    if !(sharpness > 0.0 && sharpness < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff sharpness must lie in (0, 1) (got {sharpness})"
        )));
    }
    let cells = grid.cells(radius);
    if cells <= 2.0 {
        return Err(Error::UnresolvableScale {
            what: "cutoff radius",
            cells,
            required: 2.0,
        });
    }
    let chi = SmoothCutoff::new(sharpness * radius, radius)?;
    Ok(grid
        .nodes()
        .map(|x| chi.value(grid.distance_sq(&x, center).sqrt()))
        .collect())
}

/// `χ·u` for the cutoff of [`cutoff_samples`].
pub fn localize(field: &SpectralField, center: &[f64; 3], radius: f64, sharpness: f64) -> Result<SpectralField> {
    let chi = cutoff_samples(field.grid(), center, radius, sharpness)?;
    let samples = field.physical().iter().zip(&chi).map(|(u, c)| u * c).collect();
    Ok(SpectralField::from_physical(*field.grid(), samples))
}

/// `(1-χ)·u` for the cutoff of [`cutoff_samples`].
pub fn localize_complement(
    field: &SpectralField,
    center: &[f64; 3],
    radius: f64,
    sharpness: f64,
) -> Result<SpectralField> {
    let chi = cutoff_samples(field.grid(), center, radius, sharpness)?;
    let samples = field.physical().iter().zip(&chi).map(|(u, c)| u * (1.0 - c)).collect();
    Ok(SpectralField::from_physical(*field.grid(), samples))
}

/// `‖χ_{center,radius} u‖_{H^s}`.
pub fn restrict_ball_norm(
    field: &SpectralField,
    center: &[f64; 3],
    radius: f64,
    s: f64,
    sharpness: f64,
) -> Result<f64> {
    Ok(sobolev_norm(&localize(field, center, radius, sharpness)?, s))
}
