//! The periodic profile `V'' + |V|^{2σ}V = 0`, `V(0) = 1`, `V'(0) = 0`, and
//! the concentrated data built from it.

mod bump;
mod data;

pub use bump::BumpSpec;
pub use data::{build_profile_data, evaluate_ode_profile, evaluate_ode_profile_state, MIN_BUMP_CELLS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri_step, oscillator_energy, PowerForce};
use crate::quadrature::tanh_sinh_unit;

/// Table nodes per period.
pub const NODES_PER_PERIOD: usize = 4096;
const SUBSTEPS: usize = 2;
const CHECKED_PERIODS: usize = 10;

/// `T(σ) = 4√(σ+1) ∫₀¹ (1 − v^{2σ+2})^{-1/2} dv`, the period of `V`.
pub fn profile_period(sigma: f64) -> f64 {
    assert!(sigma > 0.0, "profile period needs sigma > 0");
    let m = 2.0 * sigma + 2.0;
    // 1 - v^m written through the complement w = 1 - v
    let integrand = |_v: f64, w: f64| {
        let gap = -(m * (-w).ln_1p()).exp_m1();
        1.0 / gap.sqrt()
    };
    4.0 * (sigma + 1.0).sqrt() * tanh_sinh_unit(integrand, 1e-15)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Off-node evaluation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    /// Quintic Hermite through `V, V', V''` (sixth order).
    QuinticHermite,
}

/// Accuracy measured while building the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    /// Largest `|E(t) − 1/(2σ+2)|` over the checked periods.
    pub energy_drift: f64,
    /// Largest `|V'' + |V|^{2σ}V|` of the interpolant at interval midpoints.
    pub residual: f64,
    /// Period located from the sign change of `V'`.
    pub detected_period: f64,
    /// `max(|V(10T) − 1|, |V'(10T)|)`.
    pub periodicity_defect: f64,
}

/// A tabulated period of `V` with Hermite interpolation.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    sigma: f64,
    period: f64,
    samples: Vec<ProfileSample>,
    interpolation: Interpolation,
    diagnostics: ProfileDiagnostics,
    force: PowerForce,
}

/// Integrates `V` over ten periods and tabulates the first.
pub fn solve_profile(sigma: f64, tolerance: f64) -> Result<ProfileSolution> {
    if !(0.5..=2.0).contains(&sigma) {
        return Err(Error::InvalidArgument(format!(
            "profile exponent must lie in [1/2, 2] (got {sigma})"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive (got {tolerance})"
        )));
    }
    let force = PowerForce::new(sigma);
    let period = profile_period(sigma);
    let h = period / NODES_PER_PERIOD as f64;
    let dh = h / SUBSTEPS as f64;
    let e0 = oscillator_energy(sigma, 1.0, 0.0);

    let mut samples = Vec::with_capacity(NODES_PER_PERIOD + 1);
    samples.push(ProfileSample {
        t: 0.0,
        value: 1.0,
        derivative: 0.0,
    });
    let mut y = [1.0, 0.0];
    let mut drift: f64 = 0.0;
    let mut detected = f64::NAN;
    let total = NODES_PER_PERIOD * CHECKED_PERIODS;
    for node in 1..=total {
        let start = y;
        for _ in 0..SUBSTEPS {
            y = dopri_step(force, y, dh).0;
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::NonConvergence(format!(
                "profile trajectory became non-finite at node {node}"
            )));
        }
        drift = drift.max((oscillator_energy(sigma, y[0], y[1]) - e0).abs());
        if node <= NODES_PER_PERIOD {
            samples.push(ProfileSample {
                t: node as f64 * h,
                value: y[0],
                derivative: y[1],
            });
        }
        // V' turns from positive to non-positive once per period, at its end.
        if detected.is_nan() && node > NODES_PER_PERIOD / 2 && start[1] > 0.0 && y[1] <= 0.0 {
            detected = (node - 1) as f64 * h + locate_turn(force, start, h);
        }
    }
    // close the table exactly on the initial condition
    let last = samples.last_mut().expect("table is non-empty");
    let periodicity_defect = (y[0] - 1.0).abs().max(y[1].abs());
    let table_defect = (last.value - 1.0).abs().max(last.derivative.abs());
    last.t = period;
    last.value = 1.0;
    last.derivative = 0.0;

    let mut solution = ProfileSolution {
        sigma,
        period,
        samples,
        interpolation: Interpolation::QuinticHermite,
        diagnostics: ProfileDiagnostics {
            energy_drift: drift,
            residual: 0.0,
            detected_period: detected,
            periodicity_defect,
        },
        force,
    };
    solution.diagnostics.residual = solution.midpoint_residual();

    let d = solution.diagnostics;
    let worst = d.energy_drift.max(d.residual).max(table_defect);
    if !(worst <= tolerance) {
        return Err(Error::NonConvergence(format!(
            "profile for sigma = {sigma}: energy drift {:.3e}, residual {:.3e}, table defect {table_defect:.3e} vs tolerance {tolerance:.1e}",
            d.energy_drift, d.residual
        )));
    }
    if !((d.detected_period - period).abs() <= 1e-6) {
        return Err(Error::NonConvergence(format!(
            "detected period {} disagrees with quadrature period {period}",
            d.detected_period
        )));
    }
    Ok(solution)
}

/// Bisects for the zero of `V'` inside one step of length `h` from `start`.
fn locate_turn(force: PowerForce, start: [f64; 2], h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    let deriv_at = |tau: f64| {
        let sub = 8;
        let mut y = start;
        for _ in 0..sub {
            y = dopri_step(force, y, tau / sub as f64).0;
        }
        y[1]
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if deriv_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl ProfileSolution {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn diagnostics(&self) -> ProfileDiagnostics {
        self.diagnostics
    }

    #[inline]
    fn accel(&self, v: f64) -> f64 {
        self.force.eval(v)
    }

    /// `V'''` from differentiating the ODE.
    #[inline]
    fn jerk(&self, v: f64, dv: f64) -> f64 {
        -(2.0 * self.sigma + 1.0) * v.abs().powf(2.0 * self.sigma) * dv
    }

    /// `(V(t), V'(t))` for any real `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let m = self.samples.len() - 1;
        let h = self.period / m as f64;
        let tau = t.rem_euclid(self.period);
        let idx = ((tau / h) as usize).min(m - 1);
        let x = (tau - idx as f64 * h) / h;
        let a = self.samples[idx];
        let b = self.samples[idx + 1];
        let (a2, b2) = (self.accel(a.value), self.accel(b.value));
        let value = hermite5(x, h, [a.value, a.derivative, a2], [b.value, b.derivative, b2]);
        let derivative = hermite5(
            x,
            h,
            [a.derivative, a2, self.jerk(a.value, a.derivative)],
            [b.derivative, b2, self.jerk(b.value, b.derivative)],
        );
        (value, derivative)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    fn midpoint_residual(&self) -> f64 {
        let m = self.samples.len() - 1;
        let h = self.period / m as f64;
        let mut worst: f64 = 0.0;
        for idx in 0..m {
            let a = self.samples[idx];
            let b = self.samples[idx + 1];
            let (a2, b2) = (self.accel(a.value), self.accel(b.value));
            let second = hermite5_second(0.5, h, [a.value, a.derivative, a2], [b.value, b.derivative, b2]);
            let v = hermite5(0.5, h, [a.value, a.derivative, a2], [b.value, b.derivative, b2]);
            worst = worst.max((second - self.accel(v)).abs());
        }
        worst
    }
}

/// Quintic Hermite interpolant at `x ∈ [0, 1]` of an interval of length `h`.
#[inline]
fn hermite5(x: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    let x4 = x3 * x;
    let x5 = x4 * x;
    let h00 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
    let h01 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
    let h02 = 0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
    let h10 = 10.0 * x3 - 15.0 * x4 + 6.0 * x5;
    let h11 = -4.0 * x3 + 7.0 * x4 - 3.0 * x5;
    let h12 = 0.5 * x3 - x4 + 0.5 * x5;
    h00 * left[0]
        + h * h01 * left[1]
        + h * h * h02 * left[2]
        + h10 * right[0]
        + h * h11 * right[1]
        + h * h * h12 * right[2]
}

/// Second derivative (in the physical variable) of [`hermite5`].
fn hermite5_second(x: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    let h00 = -60.0 * x + 180.0 * x2 - 120.0 * x3;
    let h01 = -36.0 * x + 96.0 * x2 - 60.0 * x3;
    let h02 = 1.0 - 9.0 * x + 18.0 * x2 - 10.0 * x3;
    let h10 = 60.0 * x - 180.0 * x2 + 120.0 * x3;
    let h11 = -24.0 * x + 84.0 * x2 - 60.0 * x3;
    let h12 = 3.0 * x - 12.0 * x2 + 10.0 * x3;
    (h00 * left[0] + h10 * right[0]) / (h * h) + (h01 * left[1] + h11 * right[1]) / h + h02 * left[2] + h12 * right[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    /// Closed form of the period through the Beta function.
    fn beta_period(sigma: f64) -> f64 {
        let m = 2.0 * sigma + 2.0;
        4.0 * (sigma + 1.0).sqrt() * beta(1.0 / m, 0.5) / m
    }

    /// Adaptive Simpson on `v = 1 − u²`, which removes the endpoint singularity.
    fn simpson_period(sigma: f64) -> f64 {
        let m = 2.0 * sigma + 2.0;
        let g = |u: f64| {
            if u == 0.0 {
                return 2.0 / m.sqrt();
            }
            let v: f64 = 1.0 - u * u;
            2.0 * u / (1.0 - v.powf(m)).sqrt()
        };
        #[allow(clippy::too_many_arguments)]
        fn rec(
            g: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (g(lm), g(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fm, fb) = (g(0.0), g(0.5), g(1.0));
        let whole = (fa + 4.0 * fm + fb) / 6.0;
        4.0 * (sigma + 1.0).sqrt() * rec(&g, 0.0, 1.0, fa, fm, fb, whole, 1e-14, 50)
    }

    #[test]
    fn period_matches_independent_oracles() {
        for sigma in [0.5, 1.0, 1.5, 2.0] {
            let t = profile_period(sigma);
            assert!(
                (t - beta_period(sigma)).abs() < 1e-10,
                "sigma {sigma}: {t} vs {}",
                beta_period(sigma)
            );
            assert!((t - simpson_period(sigma)).abs() < 1e-9, "sigma {sigma}");
        }
        assert!((profile_period(1.0) - 7.4163).abs() < 5e-5);
    }

    #[test]
    fn period_approaches_linear_limit() {
        let t = profile_period(1e-6);
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn initial_condition_and_energy() {
        for sigma in [0.5, 1.0, 1.5, 2.0] {
            let p = solve_profile(sigma, 1e-10).unwrap();
            assert_eq!(p.value(0.0), 1.0);
            assert_eq!(p.derivative(0.0), 0.0);
            let e = 1.0 / (2.0 * sigma + 2.0);
            for s in p.samples() {
                assert!((oscillator_energy(sigma, s.value, s.derivative) - e).abs() < 1e-10);
            }
            let d = p.diagnostics();
            assert!((d.detected_period - p.period()).abs() < 1e-6, "{d:?}");
            assert!(d.periodicity_defect < 1e-9, "{d:?}");
        }
    }

    #[test]
    fn interpolation_is_periodic_and_accurate() {
        let p = solve_profile(1.0, 1e-10).unwrap();
        let force = PowerForce::new(1.0);
        // reference at an off-node time by direct fine integration
        let t = 1.2345;
        let mut y = [1.0, 0.0];
        let steps = 20_000;
        for _ in 0..steps {
            y = dopri_step(force, y, t / steps as f64).0;
        }
        let (v, dv) = p.eval(t);
        assert!((v - y[0]).abs() < 1e-12 && (dv - y[1]).abs() < 1e-12);
        let (w, dw) = p.eval(t + 7.0 * p.period());
        assert!((w - v).abs() < 1e-10 && (dw - dv).abs() < 1e-10);
        assert!((p.value(-t) - v).abs() < 1e-10);
    }

    #[test]
    fn rejects_out_of_range_exponent() {
        assert!(matches!(solve_profile(0.3, 1e-10), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_profile(1.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reports_non_convergence() {
        assert!(matches!(solve_profile(1.0, 1e-30), Err(Error::NonConvergence(_))));
    }
}
