use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{log_log_slope, Criterion, ExperimentReport, Verdict};
use crate::profile::{solve_profile, BumpSpec, ProfileSolution};
use crate::quadrature::GaussLegendre;

/// Smallest acceptable log-log slope of `g(λ)`.
pub const MIN_SLOPE: f64 = -0.05;

/// The periodic factor `W` in `‖∇ψ |ψ|^σ W(λψ)‖_{L²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PeriodicWeight {
    Zero,
    Constant {
        value: f64,
    },
    /// `V'` of the profile with the run's `σ`.
    ProfileDerivative,
    Cosine {
        period: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaOptions {
    pub dim: usize,
    /// Relative change between panel doublings that counts as converged.
    pub tolerance: f64,
    pub max_panels: usize,
}

impl Default for CoareaOptions {
    fn default() -> Self {
        Self {
            dim: 3,
            tolerance: 1e-10,
            max_panels: 1 << 20,
        }
    }
}

enum Weight<'a> {
    Plain(PeriodicWeight),
    Profile(&'a ProfileSolution),
}

impl Weight<'_> {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Weight::Plain(PeriodicWeight::Zero) => 0.0,
            Weight::Plain(PeriodicWeight::Constant { value }) => *value,
            Weight::Plain(PeriodicWeight::Cosine { period }) => (2.0 * PI * x / period).cos(),
            Weight::Plain(PeriodicWeight::ProfileDerivative) => unreachable!("resolved to a profile"),
            Weight::Profile(p) => p.derivative(x),
        }
    }

    fn period(&self) -> f64 {
        match self {
            Weight::Plain(PeriodicWeight::Cosine { period }) => *period,
            Weight::Profile(p) => p.period(),
            _ => f64::INFINITY,
        }
    }
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `g(λ) = ‖∇ψ |ψ|^σ W(λψ)‖_{L²(ℝ^d)}` by radial Gauss-Legendre quadrature,
/// doubling the panel count until successive values agree. Returns the value
/// and the panel count used.
fn g_of_lambda(
    bump: &BumpSpec,
    weight: &Weight<'_>,
    sigma: f64,
    lambda: f64,
    options: &CoareaOptions,
) -> Result<(f64, usize)> {
    let gl = GaussLegendre::new(20);
    let dim = options.dim;
    let integrand = |r: f64| {
        let phi = bump.value(r);
        let dphi = bump.radial_derivative(r);
        let w = weight.eval(lambda * phi);
        dphi * dphi * phi.powf(2.0 * sigma) * w * w * r.powi(dim as i32 - 1)
    };
    // about two panels per oscillation of W(λφ(r)) over φ ∈ [0, 1]
    let oscillations = if weight.period().is_finite() {
        lambda / weight.period()
    } else {
        0.0
    };
    let mut panels = (2.0 * oscillations).ceil().max(16.0) as usize;
    let mut prev = gl.integrate_composite(0.0, 1.0, panels, integrand);
    loop {
        let next_panels = panels * 2;
        if next_panels > options.max_panels {
            return Err(Error::UnresolvedOscillation {
                lambda,
                panels: options.max_panels,
            });
        }
        let next = gl.integrate_composite(0.0, 1.0, next_panels, integrand);
        panels = next_panels;
        let done = (next - prev).abs() <= options.tolerance * next.abs() || next == 0.0 && prev == 0.0;
        prev = next;
        if done {
            break;
        }
    }
    Ok(((sphere_area(dim) * prev).max(0.0).sqrt(), panels))
}

/// `g(λ)` for a single `λ` with `W = V'` for the given `σ`.
pub fn coarea_integral(weight: PeriodicWeight, sigma: f64, lambda: f64, options: &CoareaOptions) -> Result<f64> {
    let profile;
    let w = match weight {
        PeriodicWeight::ProfileDerivative => {
            profile = solve_profile(sigma, 1e-10)?;
            Weight::Profile(&profile)
        }
        other => Weight::Plain(other),
    };
    Ok(g_of_lambda(&BumpSpec, &w, sigma, lambda, options)?.0)
}

/// Tabulates `g(λ)` over `lambdas` and checks it neither vanishes nor decays.
pub fn run_coarea_check(
    bump: BumpSpec,
    weight: PeriodicWeight,
    sigma: f64,
    lambdas: &[f64],
    options: &CoareaOptions,
) -> Result<ExperimentReport> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "lambda list must be positive and increasing".into(),
        ));
    }
    if !(1..=3).contains(&options.dim) {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 1, 2 or 3 (got {})",
            options.dim
        )));
    }
    let profile = match weight {
        PeriodicWeight::ProfileDerivative => Some(solve_profile(sigma, 1e-10)?),
        _ => None,
    };
    let w = match &profile {
        Some(p) => Weight::Profile(p),
        None => Weight::Plain(weight),
    };
    let mut report = ExperimentReport::new(
        "coarea",
        json!({
            "bump": BumpSpec::FORMULA,
            "weight": weight,
            "sigma": sigma,
            "lambdas": lambdas,
            "options": options,
        }),
        &["lambda", "g", "panels"],
    );
    for &lambda in lambdas {
        let (g, panels) = g_of_lambda(&bump, &w, sigma, lambda, options)?;
        report.push_row(vec![lambda, g, panels as f64]);
    }
    let g = report.column("g").unwrap_or_default();
    let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope = if min > 0.0 && lambdas.len() > 1 {
        log_log_slope(lambdas, &g)
    } else {
        f64::NAN
    };
    report.fits.insert("g_min".into(), min);
    report.fits.insert("log_log_slope".into(), slope);
    report.verdicts.push(Verdict::new(
        Criterion::NoDecay,
        "positive-minimum",
        min > 0.0,
        format!("min g = {min:.6e}"),
    ));
    report.verdicts.push(Verdict::new(
        Criterion::NoDecay,
        "no-decay-slope",
        slope >= MIN_SLOPE,
        format!("slope {slope:.6} (threshold {MIN_SLOPE})"),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_gives_zero() {
        let rep = run_coarea_check(BumpSpec, PeriodicWeight::Zero, 1.0, &[10.0, 100.0], &Default::default()).unwrap();
        assert!(rep.column("g").unwrap().iter().all(|&g| g == 0.0));
        assert!(!rep.passed());
    }

    #[test]
    fn constant_weight_is_lambda_independent() {
        let rep = run_coarea_check(
            BumpSpec,
            PeriodicWeight::Constant { value: 1.0 },
            1.0,
            &[10.0, 100.0, 1000.0],
            &Default::default(),
        )
        .unwrap();
        let g = rep.column("g").unwrap();
        assert!(g.iter().all(|&v| (v - g[0]).abs() < 1e-14 * g[0]));
        assert!(rep.passed());
    }

    #[test]
    fn constant_weight_matches_cartesian_quadrature() {
        // ∫_{ℝ²} |∇φ|² φ² dx on a Cartesian Gauss product rule.
        let opts = CoareaOptions {
            dim: 2,
            ..Default::default()
        };
        let g = coarea_integral(PeriodicWeight::Constant { value: 1.0 }, 1.0, 5.0, &opts).unwrap();
        let b = BumpSpec;
        let gl = GaussLegendre::new(30);
        let total = gl.integrate_composite(-1.0, 1.0, 20, |x| {
            gl.integrate_composite(-1.0, 1.0, 20, |y| {
                let r = (x * x + y * y).sqrt();
                let d = b.radial_derivative(r);
                d * d * b.value(r).powi(2)
            })
        });
        assert!((g - total.sqrt()).abs() < 1e-8 * g, "{g} vs {}", total.sqrt());
    }

    #[test]
    fn large_lambda_approaches_period_average() {
        // W(λψ)² averages to the period mean of V'², which for σ = 1 is
        // (4/T)∫₀¹ ((1 − v⁴)/2)^{1/2} dv
        let t = crate::profile::profile_period(1.0);
        let mean = 4.0 / t * crate::quadrature::tanh_sinh_unit(|v, _| ((1.0 - v.powi(4)) / 2.0).sqrt(), 1e-14);
        let opts = CoareaOptions::default();
        let flat = coarea_integral(PeriodicWeight::Constant { value: 1.0 }, 1.0, 1.0, &opts).unwrap();
        let g = coarea_integral(PeriodicWeight::ProfileDerivative, 1.0, 1e4, &opts).unwrap();
        assert!(
            (g - flat * mean.sqrt()).abs() < 1e-3 * g,
            "{g} vs {}",
            flat * mean.sqrt()
        );
    }

    #[test]
    fn rejects_bad_lambda_list() {
        assert!(run_coarea_check(BumpSpec, PeriodicWeight::Zero, 1.0, &[10.0, 5.0], &Default::default()).is_err());
    }

    #[test]
    fn budget_exhaustion() {
        let opts = CoareaOptions {
            max_panels: 32,
            ..Default::default()
        };
        let res = coarea_integral(PeriodicWeight::Cosine { period: 1.0 }, 1.0, 1e4, &opts);
        assert!(matches!(res, Err(Error::UnresolvedOscillation { .. })));
    }
}
