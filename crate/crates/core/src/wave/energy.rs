use serde::{Deserialize, Serialize};

use crate::spectral::sobolev::{shell_table, weighted_energy};
use crate::wave::state::WaveState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReading {
    pub time: f64,
    pub total_energy: f64,
    pub gradient_part: f64,
    pub kinetic_part: f64,
    pub potential_part: f64,
}

/// `½∫(∂ₜu)² + ½∫|∇u|² + (2σ+2)^{-1}∫|u|^{2σ+2}` over the torus.
///
/// The derivative parts are exact Parseval sums, the potential part is the
/// trapezoid rule on the grid.
pub fn hamiltonian(state: &WaveState, sigma: f64) -> EnergyReading {
    let grid = state.grid();
    let volume = grid.volume();
    let gradient_part = 0.5
        * volume
        * state
            .u
            .spectral()
            .iter()
            .zip(grid.wavenumber_sq())
            .map(|(c, k2)| k2 * c.norm_sqr())
            .sum::<f64>();
    let kinetic_part = 0.5 * volume * state.ut.spectral().iter().map(|c| c.norm_sqr()).sum::<f64>();
    let p = 2.0 * sigma + 2.0;
    let potential_part = state.u.integrate(|v| v.abs().powf(p)) / p;
    EnergyReading {
        time: state.time,
        total_energy: gradient_part + kinetic_part + potential_part,
        gradient_part,
        kinetic_part,
        potential_part,
    }
}

/// `n^{−2(1−s)}(‖∂ₜw‖²_{L²} + ‖∇w‖²_{L²}) + n^{−2(2−s)}(‖∂ₜw‖²_{H¹} + ‖∇w‖²_{H¹})`
/// with the coefficient-normalized norms used throughout the crate.
pub fn semiclassical_energy(w: &WaveState, n: f64, s: f64) -> f64 {
    let grid = w.grid();
    let low = n.powf(-2.0 * (1.0 - s));
    let high = n.powf(-2.0 * (2.0 - s));
    let weight = shell_table(grid, |k2| low + high * (1.0 + k2));
    let grad_weight = shell_table(grid, |k2| k2 * (low + high * (1.0 + k2)));
    weighted_energy(grid, w.ut.spectral(), &weight) + weighted_energy(grid, w.u.spectral(), &grad_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{SpectralField, TorusGrid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_state() {
        let grid = TorusGrid::new(3, 8).unwrap();
        for sigma in [0.5, 1.0, 2.0] {
            let a = 1.3f64;
            let e = hamiltonian(&WaveState::at_rest(SpectralField::constant(grid, a)), sigma);
            let p = 2.0 * sigma + 2.0;
            let want = (2.0 * PI).powi(3) * a.powf(p) / p;
            assert!((e.total_energy - want).abs() < 1e-12 * want);
            assert_eq!(e.gradient_part, 0.0);
            assert_eq!(e.kinetic_part, 0.0);
        }
    }

    #[test]
    fn cosine_gradient_part() {
        let grid = TorusGrid::new(3, 8).unwrap();
        let e = hamiltonian(&WaveState::at_rest(SpectralField::from_fn(grid, |x| x[0].cos())), 1.7);
        let want = 0.5 * (2.0 * PI).powi(3) * 0.5;
        assert!((e.gradient_part - want).abs() < 1e-12);
    }

    #[test]
    fn semiclassical_zero_and_cosine() {
        let grid = TorusGrid::new(3, 8).unwrap();
        assert_eq!(semiclassical_energy(&WaveState::zeros(grid), 4.0, 0.3), 0.0);
        // w = (cos x₁, 0): only |k| = 1 with |ŵ|² = 1/4 twice, so
        // ‖∇w‖²_{L²} = 1/2 and ‖∇w‖²_{H¹} = 1.
        let w = WaveState::at_rest(SpectralField::from_fn(grid, |x| x[0].cos()));
        let (n, s) = (8.0f64, 0.3f64);
        let mut direct = 0.0;
        for k in grid.modes() {
            let c = w.u.coefficient(k).norm_sqr();
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            direct += n.powf(-2.0 * (1.0 - s)) * k2 * c + n.powf(-2.0 * (2.0 - s)) * (1.0 + k2) * k2 * c;
        }
        let closed = n.powf(-2.0 * (1.0 - s)) * 0.5 + n.powf(-2.0 * (2.0 - s)) * 1.0;
        let got = semiclassical_energy(&w, n, s);
        assert!((got - direct).abs() < 1e-15 && (got - closed).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn parts_add_up_and_scale(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -3.0f64..3.0) {
            let grid = TorusGrid::new(2, 8).unwrap();
            let u = SpectralField::from_fn(grid, |x| a * x[0].sin() + b * (x[1] + x[0]).cos());
            let ut = SpectralField::from_fn(grid, |x| b * x[1].sin() - a);
            let st = WaveState::new(u, ut, 0.0).unwrap();
            let e = hamiltonian(&st, 1.0);
            let sum = e.gradient_part + e.kinetic_part + e.potential_part;
            prop_assert!((e.total_energy - sum).abs() <= 1e-12 * e.total_energy.max(1e-300));
            let scaled = WaveState::new(st.u.scaled(c), st.ut.scaled(c), 0.0).unwrap();
            let e1 = semiclassical_energy(&st, 6.0, 0.3);
            let e2 = semiclassical_energy(&scaled, 6.0, 0.3);
            prop_assert!((e2 - c * c * e1).abs() <= 1e-12 * (1.0 + e2.abs()));
        }
    }
}
