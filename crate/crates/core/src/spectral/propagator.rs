use rustfft::num_complex::Complex64;

use crate::spectral::field::SpectralField;
use crate::wave::state::WaveState;

/// Exact free evolution `S(t)(f, g) = cos(t√-Δ) f + sin(t√-Δ)/√-Δ g`, with the
/// velocity carried along consistently. Mode `k` rotates with frequency
/// `|k|`; the zero mode drifts linearly.
pub fn apply_linear_propagator(state: &WaveState, t: f64) -> WaveState {
    let grid = *state.grid();
    let n = grid.len();
    let mut u = Vec::with_capacity(n);
    let mut ut = Vec::with_capacity(n);
    for ((a, b), k2) in state
        .u
        .spectral()
        .iter()
        .zip(state.ut.spectral())
        .zip(grid.wavenumber_sq())
    {
        let (na, nb) = rotate(*a, *b, k2.sqrt(), t);
        u.push(na);
        ut.push(nb);
    }
    WaveState {
        u: SpectralField::from_spectral(grid, u),
        ut: SpectralField::from_spectral(grid, ut),
        time: state.time + t,
    }
}

/// One mode of the free flow.
#[inline]
pub(crate) fn rotate(a: Complex64, b: Complex64, omega: f64, t: f64) -> (Complex64, Complex64) {
    if omega == 0.0 {
        return (a + b * t, b);
    }
    let (s, c) = (omega * t).sin_cos();
    (a * c + b * (s / omega), b * c - a * (omega * s))
}

/// `Σ_k |∂ₜû_k|² + |k|²|û_k|²`, conserved by the free flow.
pub fn linear_energy(state: &WaveState) -> f64 {
    state
        .u
        .spectral()
        .iter()
        .zip(state.ut.spectral())
        .zip(state.grid().wavenumber_sq())
        .map(|((a, b), k2)| b.norm_sqr() + k2 * a.norm_sqr())
        .sum()
}
