//! The concentration schedule `κₙ, εₙ, tₙ, λₙ` and the admissible windows
//! for `(s, σ, δ₁, δ₂, θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA1: f64 = 0.05;
pub const DEFAULT_DELTA2: f64 = 0.5;
pub const DEFAULT_C_MOLL: f64 = 0.01;
pub const DEFAULT_DIM: usize = 3;

/// Schedule for one concentration index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub n: f64,
    pub s: f64,
    pub sigma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub c_moll: f64,
    pub dim: usize,
    /// `(log n)^{−δ₁}`
    pub kappa_n: f64,
    /// `c_moll / n`
    pub eps_n: f64,
    /// `((log n)^{δ₂} n^{−(d/2−s)})^σ`
    pub t_n: f64,
    /// `(κₙ n^{d/2−s})^σ`
    pub lambda_n: f64,
    pub theta: Option<f64>,
}

/// Schedule on the three-dimensional torus.
pub fn make_schedule(n: f64, s: f64, sigma: f64, delta1: f64, delta2: f64, c_moll: f64) -> Result<ParameterSchedule> {
    make_schedule_in(DEFAULT_DIM, n, s, sigma, delta1, delta2, c_moll)
}

/// Schedule with the concentration exponent `d/2 − s` of dimension `dim`.
pub fn make_schedule_in(
    dim: usize,
    n: f64,
    s: f64,
    sigma: f64,
    delta1: f64,
    delta2: f64,
    c_moll: f64,
) -> Result<ParameterSchedule> {
    if !(0.0 < delta1 && delta1 < delta2 && delta2 < 1.0) {
        return Err(Error::InvalidDeltas { delta1, delta2 });
    }
    if !(n >= 3.0) {
        return Err(Error::InvalidIndex(n));
    }
    if !(c_moll > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c_moll must be positive (got {c_moll})"
        )));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 1, 2 or 3 (got {dim})"
        )));
    }
    let log_n = n.ln();
    let alpha = dim as f64 / 2.0 - s;
    let kappa_n = log_n.powf(-delta1);
    Ok(ParameterSchedule {
        n,
        s,
        sigma,
        delta1,
        delta2,
        c_moll,
        dim,
        kappa_n,
        eps_n: c_moll / n,
        t_n: (log_n.powf(delta2) * n.powf(-alpha)).powf(sigma),
        lambda_n: (kappa_n * n.powf(alpha)).powf(sigma),
        theta: None,
    })
}

impl ParameterSchedule {
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    /// `d/2 − s`
    pub fn concentration_exponent(&self) -> f64 {
        self.dim as f64 / 2.0 - self.s
    }

    /// Peak of the concentrated data, `κₙ n^{d/2−s} = λₙ^{1/σ}`.
    pub fn amplitude(&self) -> f64 {
        self.kappa_n * self.n.powf(self.concentration_exponent())
    }

    /// `(log n)^{σ(δ₂−δ₁)}`, which equals `λₙ tₙ`.
    pub fn phase_budget(&self) -> f64 {
        self.n.ln().powf(self.sigma * (self.delta2 - self.delta1))
    }

    /// The same schedule with `t_n` forced to zero.
    pub fn at_initial_time(mut self) -> Self {
        self.t_n = 0.0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub s: f64,
    pub sigma: f64,
    /// `3/2 − 1/σ`
    pub s_c: f64,
    /// `max{0, 3/2 − 2/(2σ−1)}`
    pub lower: f64,
    pub valid: bool,
    pub reasons: Vec<String>,
}

/// Checks `1/2 ≤ σ ≤ 2` and `max{0, 3/2 − 2/(2σ−1)} < s < 3/2 − 1/σ`.
pub fn validate_regime(s: f64, sigma: f64) -> RegimeCheck {
    let s_c = 1.5 - 1.0 / sigma;
    // 2σ − 1 ≤ 0 sends the second bound to +∞ on the wrong side; only 0 binds.
    let lower = if 2.0 * sigma - 1.0 > 0.0 {
        (1.5 - 2.0 / (2.0 * sigma - 1.0)).max(0.0)
    } else {
        0.0
    };
    let mut reasons = Vec::new();
    if !(0.5..=2.0).contains(&sigma) {
        reasons.push(format!("sigma = {sigma} lies outside [1/2, 2]"));
    }
    if !(lower < s_c) {
        reasons.push(format!("regime window is empty: lower bound {lower} >= s_c = {s_c}"));
    }
    if !(s > lower) {
        reasons.push(format!("s = {s} is not above the lower bound {lower}"));
    }
    if !(s < s_c) {
        reasons.push(format!("s = {s} is not below the critical index s_c = {s_c}"));
    }
    RegimeCheck {
        s,
        sigma,
        s_c,
        lower,
        valid: reasons.is_empty(),
        reasons,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheck {
    pub valid: bool,
    /// `sσ(δ₂−δ₁) − δ₁`, the predicted growth exponent in `log nₖ`.
    pub margin: f64,
}

/// `sσ(δ₂−δ₁) > δ₁`.
pub fn validate_inflation_deltas(s: f64, sigma: f64, delta1: f64, delta2: f64) -> DeltaCheck {
    let margin = s * sigma * (delta2 - delta1) - delta1;
    DeltaCheck {
        valid: margin > 0.0,
        margin,
    }
}

/// Upper end of the admissible `θ` window, `σ(3/2−s)/2 − 1/2`.
pub fn theta_upper(s: f64, sigma: f64) -> f64 {
    sigma * (1.5 - s) / 2.0 - 0.5
}

/// `0 < θ < σ(3/2−s)/2 − 1/2`.
pub fn validate_theta(s: f64, sigma: f64, theta: f64) -> bool {
    theta > 0.0 && theta < theta_upper(s, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_n_equal_to_e() {
        let n = std::f64::consts::E.exp();
        let sch = make_schedule(n, 0.3, 1.0, 0.1, 0.5, 0.01).unwrap();
        assert!((sch.kappa_n - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn reference_schedule_values() {
        // Frozen from a 50-digit recomputation of the defining formulas
        // (log 16 = 2.7725887222397812376689284858327062723020005374410...).
        let sch = make_schedule(16.0, 0.3, 1.0, 0.1, 0.5, 0.01).unwrap();
        let expect = [
            (sch.kappa_n, 0.90304928844983689476),
            (sch.eps_n, 0.000625),
            (sch.t_n, 0.059772132017627721222),
            (sch.lambda_n, 25.156802135813427172),
        ];
        for (got, want) in expect {
            assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(sch.n, 16.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            make_schedule(16.0, 0.3, 1.0, 0.5, 0.5, 0.01),
            Err(Error::InvalidDeltas { .. })
        ));
        assert!(matches!(
            make_schedule(16.0, 0.3, 1.0, 0.0, 0.5, 0.01),
            Err(Error::InvalidDeltas { .. })
        ));
        assert!(matches!(
            make_schedule(16.0, 0.3, 1.0, 0.1, 1.0, 0.01),
            Err(Error::InvalidDeltas { .. })
        ));
        assert!(matches!(
            make_schedule(2.0, 0.3, 1.0, 0.1, 0.5, 0.01),
            Err(Error::InvalidIndex(_))
        ));
    }

    #[test]
    fn regime_examples() {
        let ok = validate_regime(0.3, 1.0);
        assert!(ok.valid);
        assert_eq!(ok.lower, 0.0);
        assert!((ok.s_c - 0.5).abs() < 1e-15);
        let bad = validate_regime(0.6, 2.0);
        assert!(!bad.valid);
        assert!((bad.lower - 5.0 / 6.0).abs() < 1e-15);
        for s in [-0.5, 0.0, 0.1, 0.5, 1.0] {
            let r = validate_regime(s, 0.6);
            assert!(!r.valid);
            assert!(r.reasons.iter().any(|m| m.contains("empty")));
        }
    }

    #[test]
    fn delta_examples() {
        let d = validate_inflation_deltas(0.3, 1.0, 0.05, 0.5);
        assert!(d.valid);
        assert!((d.margin - 0.085).abs() < 1e-15);
        let d = validate_inflation_deltas(0.3, 1.0, 0.2, 0.2);
        assert!(!d.valid);
        assert!((d.margin + 0.2).abs() < 1e-15);
        // δ₁ = sσ(δ₂ − δ₁) with s = 1/2, σ = 1, δ₂ = 3/4 gives δ₁ = 1/4
        let d = validate_inflation_deltas(0.5, 1.0, 0.25, 0.75);
        assert!(!d.valid);
    }

    #[test]
    fn theta_examples() {
        assert!((theta_upper(0.3, 1.0) - 0.1).abs() < 1e-15);
        assert!(validate_theta(0.3, 1.0, 0.05));
        assert!(!validate_theta(0.3, 1.0, 0.2));
        assert!(!validate_theta(0.3, 1.0, 0.0));
    }

    #[test]
    fn monotone_in_n() {
        let mut prev: Option<ParameterSchedule> = None;
        for n in 4..=64 {
            let sch = make_schedule(n as f64, 0.3, 1.0, 0.05, 0.5, 0.01).unwrap();
            if let Some(p) = prev {
                assert!(sch.kappa_n < p.kappa_n);
                assert!(sch.lambda_n > p.lambda_n);
                assert!(sch.t_n < p.t_n);
                assert!(sch.lambda_n * sch.t_n > p.lambda_n * p.t_n);
            }
            prev = Some(sch);
        }
    }

    #[test]
    fn phase_budget_is_eventually_sub_power() {
        // (log n)^{σ(δ₂−δ₁)} / n^{0.1} turns over once log n > 10σ(δ₂−δ₁).
        let slow = |n: f64| {
            let x = make_schedule(n, 0.3, 1.0, 0.05, 0.5, 0.01).unwrap();
            x.lambda_n * x.t_n / n.powf(0.1)
        };
        let mut prev = slow(100.0);
        for e in 1..=40 {
            let n = 100.0 * 1.5f64.powi(e);
            let cur = slow(n);
            assert!(cur < prev, "n = {n}");
            prev = cur;
        }
    }

    proptest! {
        #[test]
        fn schedule_identities(
            n in 3.0f64..1e6,
            s in 0.0f64..1.5,
            sigma in 0.5f64..2.0,
            d1 in 0.01f64..0.5,
            gap in 0.01f64..0.49,
            c in 1e-3f64..1.0,
            dim in 1usize..=3,
        ) {
            let sch = make_schedule_in(dim, n, s, sigma, d1, d1 + gap, c).unwrap();
            let id = sch.lambda_n * sch.t_n;
            prop_assert!(((id - sch.phase_budget()) / id).abs() < 1e-12);
            prop_assert!(((sch.n * sch.eps_n - c) / c).abs() < 1e-15);
            prop_assert!(((sch.amplitude().powf(sigma) - sch.lambda_n) / sch.lambda_n).abs() < 1e-12);
        }

        #[test]
        fn regime_validity_matches_window(s in -1.0f64..2.0, sigma in 0.2f64..2.5) {
            let r = validate_regime(s, sigma);
            let lower = if 2.0 * sigma > 1.0 { (1.5 - 2.0 / (2.0 * sigma - 1.0)).max(0.0) } else { 0.0 };
            let expect = (0.5..=2.0).contains(&sigma) && lower < s && s < 1.5 - 1.0 / sigma;
            prop_assert_eq!(r.valid, expect);
            prop_assert_eq!(r.valid, r.reasons.is_empty());
        }
    }
}
