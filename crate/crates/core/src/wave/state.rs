use crate::error::{Error, Result};
use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;
use crate::spectral::sobolev::pair_norm;

/// `(u, ∂ₜu)` at a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: SpectralField,
    pub ut: SpectralField,
    pub time: f64,
}

impl WaveState {
    pub fn new(u: SpectralField, ut: SpectralField, time: f64) -> Result<Self> {
        if u.grid() != ut.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, ut, time })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            u: SpectralField::zeros(grid),
            ut: SpectralField::zeros(grid),
            time: 0.0,
        }
    }

    /// Displacement only, zero velocity.
    pub fn at_rest(u: SpectralField) -> Self {
        let ut = SpectralField::zeros(*u.grid());
        Self { u, ut, time: 0.0 }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    /// Norm of the pair in `H^s × H^{s-1}`.
    pub fn pair_norm(&self, s: f64) -> f64 {
        pair_norm(&self.u, &self.ut, s).expect("components share a grid")
    }

    /// Componentwise `a·self + b·other`, stamped with `self.time`.
    pub fn combine(&self, a: f64, other: &WaveState, b: f64) -> Result<WaveState> {
        Ok(WaveState {
            u: SpectralField::linear_combination(&[(a, &self.u), (b, &other.u)])?,
            ut: SpectralField::linear_combination(&[(a, &self.ut), (b, &other.ut)])?,
            time: self.time,
        })
    }

    /// Same data with the velocity reversed.
    pub fn reversed(&self) -> WaveState {
        WaveState {
            u: self.u.clone(),
            ut: self.ut.scaled(-1.0),
            time: self.time,
        }
    }

    /// Largest sample difference over both components.
    pub fn max_abs_diff(&self, other: &WaveState) -> f64 {
        let du = self
            .u
            .physical()
            .iter()
            .zip(other.u.physical())
            .map(|(a, b)| (a - b).abs());
        let dv = self
            .ut
            .physical()
            .iter()
            .zip(other.ut.physical())
            .map(|(a, b)| (a - b).abs());
        du.chain(dv).fold(0.0, f64::max)
    }
}
