//! Discrete torus, Fourier transforms, Sobolev norms, mollification and the
//! exact linear wave propagator.

pub mod fft;
pub mod field;
pub mod grid;
pub mod mollifier;
pub mod propagator;
pub mod sobolev;

pub use field::{to_spectral, SpectralField};
pub use grid::TorusGrid;
pub use mollifier::{mollify, MollifierSpec};
pub use propagator::apply_linear_propagator;
pub use sobolev::{cutoff_samples, pair_norm, restrict_ball_norm, sobolev_norm, SmoothCutoff};
