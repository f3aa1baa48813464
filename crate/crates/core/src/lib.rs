//! Numerical laboratory for norm inflation in the energy-supercritical
//! defocusing wave equation `∂ₜ²u − Δu + |u|^{2σ}u = 0` on the torus.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod regime;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
pub use profile::{BumpSpec, ProfileSolution};
pub use regime::{ParameterSchedule, RegimeCheck};
pub use spectral::{SpectralField, TorusGrid};
pub use wave::{SolverConfig, WaveState};
