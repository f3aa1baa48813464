//! Desk-scale experiments: each returns an [`ExperimentReport`] with a
//! sample table, fitted quantities and verdicts tied to acceptance criteria.

mod coarea;
mod eps_squared;
mod fsp;
mod inflation;
mod pathological;
mod perturbation;
mod profile_bounds;
mod smooth;

pub use coarea::{coarea_integral, run_coarea_check, CoareaOptions, PeriodicWeight};
pub use eps_squared::run_eps_squared_variant;
pub use fsp::{interior_discrepancy, run_fsp_check, FspCase, FspOptions};
pub use inflation::{run_inflation_sweep, InflationOptions};
pub use pathological::{build_pathological_data, BumpRecord, IndexSchedule, PathologicalData, PathologicalDataSpec};
pub use perturbation::{run_perturbation_check, PerturbationOptions};
pub use profile_bounds::{run_profile_bound_check, ProfileBoundOptions};
pub use smooth::SmoothDataSpec;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regime::{
    make_schedule_in, validate_inflation_deltas, validate_regime, validate_theta, ParameterSchedule, DEFAULT_C_MOLL,
    DEFAULT_DELTA1, DEFAULT_DELTA2,
};
use crate::spectral::MollifierSpec;

/// Acceptance criteria that verdicts refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    ProfileFidelity,
    SolverCorrectness,
    ProfileRatios,
    NoDecay,
    PerturbationTrend,
    FiniteSpeed,
    NormInflation,
    Determinism,
}

impl Criterion {
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ProfileFidelity => "profile-fidelity",
            Criterion::SolverCorrectness => "solver-correctness",
            Criterion::ProfileRatios => "profile-ratios",
            Criterion::NoDecay => "no-decay",
            Criterion::PerturbationTrend => "perturbation-trend",
            Criterion::FiniteSpeed => "finite-speed",
            Criterion::NormInflation => "norm-inflation",
            Criterion::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.number(), self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: Criterion,
    /// Short identifier of the check within the criterion.
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(criterion: Criterion, check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            criterion,
            check: check.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Result of one experiment.
///
/// `wall_clock_seconds` is informational and never written to hashed outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    /// Column names of `rows`; the first column is the sweep variable.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fits: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    pub steps: usize,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: serde_json::Value, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: BTreeMap::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            steps: 0,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// True when every verdict passed (and there is at least one).
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

/// `(s, σ, δ₁, δ₂, θ)` plus the mollifier constants shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSettings {
    pub s: f64,
    pub sigma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta: f64,
    pub c_moll: f64,
    /// Support radius of the unscaled mollifier.
    pub support_radius: f64,
}

impl Default for RegimeSettings {
    fn default() -> Self {
        Self {
            s: 0.3,
            sigma: 1.0,
            delta1: DEFAULT_DELTA1,
            delta2: DEFAULT_DELTA2,
            theta: 0.05,
            c_moll: DEFAULT_C_MOLL,
            support_radius: 1.0,
        }
    }
}

impl RegimeSettings {
    /// Every violated constraint, empty when the settings are usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = validate_regime(self.s, self.sigma).reasons;
        if !(0.0 < self.delta1 && self.delta1 < self.delta2 && self.delta2 < 1.0) {
            out.push(format!(
                "schedule exponents must satisfy 0 < delta1 < delta2 < 1 (got {}, {})",
                self.delta1, self.delta2
            ));
        }
        if !(self.c_moll > 0.0) {
            out.push(format!("c_moll must be positive (got {})", self.c_moll));
        }
        if !(self.support_radius > 0.0) {
            out.push(format!(
                "mollifier support radius must be positive (got {})",
                self.support_radius
            ));
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::PreconditionViolated(v.join("; ")))
        }
    }

    pub fn theta_violation(&self) -> Option<String> {
        (!validate_theta(self.s, self.sigma, self.theta)).then(|| {
            format!(
                "theta = {} is outside (0, {})",
                self.theta,
                crate::regime::theta_upper(self.s, self.sigma)
            )
        })
    }

    pub fn delta_violation(&self) -> Option<String> {
        let d = validate_inflation_deltas(self.s, self.sigma, self.delta1, self.delta2);
        (!d.valid).then(|| format!("s*sigma*(delta2-delta1) - delta1 = {} is not positive", d.margin))
    }

    pub fn schedule(&self, dim: usize, n: f64) -> Result<ParameterSchedule> {
        Ok(make_schedule_in(dim, n, self.s, self.sigma, self.delta1, self.delta2, self.c_moll)?.with_theta(self.theta))
    }

    pub fn mollifier(&self, epsilon: f64) -> Result<MollifierSpec> {
        MollifierSpec::new(epsilon, self.support_radius)
    }
}

/// Kendall rank correlation (τ-a) between `x` and `y`.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut score = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let s = (x[j] - x[i]).signum() * (y[j] - y[i]).signum();
            if (x[j] - x[i]) != 0.0 && (y[j] - y[i]) != 0.0 {
                score += s;
            }
        }
    }
    score / (n * (n - 1) / 2) as f64
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// `max/min` of positive values; infinite if any value is not positive.
pub fn spread_ratio(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Runs `count` independent jobs on up to `jobs` threads; results come back
/// in index order.
pub fn map_jobs<T: Send>(jobs: usize, count: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

/// Evenly spaced sample times in `[0, t]`, both ends included.
pub(crate) fn sample_times(t: f64, count: usize) -> Vec<f64> {
    if count <= 1 || t == 0.0 {
        return vec![t];
    }
    (0..count).map(|i| t * i as f64 / (count - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert!((kendall_tau(&[1.0, 2.0, 3.0], &[2.0, 3.0, 1.0]) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.7)).collect();
        assert!((log_log_slope(&x, &y) + 0.7).abs() < 1e-12);
    }

    #[test]
    fn criteria_are_numbered() {
        assert_eq!(Criterion::ProfileFidelity.number(), 1);
        assert_eq!(Criterion::Determinism.number(), 8);
        assert_eq!(Criterion::NormInflation.to_string(), "7 norm-inflation");
    }

    #[test]
    fn default_regime_is_admissible() {
        let r = RegimeSettings::default();
        assert!(r.violations().is_empty());
        assert!(r.theta_violation().is_none());
        assert!(r.delta_violation().is_none());
        let bad = RegimeSettings { sigma: 0.6, ..r };
        assert!(!bad.violations().is_empty());
    }

    #[test]
    fn jobs_preserve_order() {
        let serial = map_jobs(1, 20, |i| i * i);
        let parallel = map_jobs(4, 20, |i| i * i);
        assert_eq!(serial, parallel);
    }

    proptest! {
        #[test]
        fn kendall_is_antisymmetric(v in proptest::collection::vec(-10.0f64..10.0, 2..12)) {
            let x: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            let neg: Vec<f64> = v.iter().map(|a| -a).collect();
            let t = kendall_tau(&x, &v);
            prop_assert!((-1.0..=1.0).contains(&t));
            prop_assert!((t + kendall_tau(&x, &neg)).abs() < 1e-15);
        }
    }
}
