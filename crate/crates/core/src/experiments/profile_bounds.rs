use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{map_jobs, sample_times, spread_ratio, Criterion, ExperimentReport, RegimeSettings, Verdict};
use crate::profile::{build_profile_data, evaluate_ode_profile, solve_profile, ProfileSolution};
use crate::regime::ParameterSchedule;
use crate::spectral::{mollify, sobolev_norm, SpectralField, TorusGrid};

/// Largest allowed `max/min` of a ratio across the sweep.
pub const RATIO_BAND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBoundOptions {
    /// Sample times in `[0, tₙ]`, ends included.
    pub time_samples: usize,
    /// Mollify at `εₙ²` instead of `εₙ`.
    pub squared_epsilon: bool,
    /// Evaluate at `t = 0` only.
    pub zero_time: bool,
    /// Thread count; never part of a report.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for ProfileBoundOptions {
    fn default() -> Self {
        Self {
            time_samples: 9,
            squared_epsilon: false,
            zero_time: false,
            jobs: 1,
        }
    }
}

pub(crate) const COLUMNS: [&str; 14] = [
    "n",
    "kappa_n",
    "lambda_n",
    "t_n",
    "epsilon",
    "resolved",
    "hs_norm_at_t_n",
    "ratio1_lower",
    "ratio2_h0",
    "ratio2_h1",
    "ratio2_h2",
    "ratio3_sup",
    "ratio4_gradient",
    "predicted_hs",
];

struct Entry {
    row: Vec<f64>,
    note: Option<String>,
}

/// Measures the four profile ratios for each `n`.
pub fn run_profile_bound_check(
    regime: &RegimeSettings,
    n_list: &[f64],
    grid: TorusGrid,
    options: &ProfileBoundOptions,
) -> Result<ExperimentReport> {
    regime.check()?;
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    let profile = solve_profile(regime.sigma, 1e-10)?;
    let entries = map_jobs(options.jobs, n_list.len(), |i| {
        measure(regime, n_list[i], grid, options, &profile)
    });
    let name = if options.squared_epsilon {
        "eps-squared"
    } else {
        "profile-bound"
    };
    let mut report = ExperimentReport::new(
        name,
        json!({
            "regime": regime,
            "n_list": n_list,
            "grid": grid,
            "options": options,
            "profile_period": profile.period(),
        }),
        &COLUMNS,
    );
    for e in entries {
        let e = e?;
        if let Some(n) = e.note {
            report.notes.push(n);
        }
        report.push_row(e.row);
    }
    judge(&mut report);
    Ok(report)
}

fn measure(
    regime: &RegimeSettings,
    n: f64,
    grid: TorusGrid,
    options: &ProfileBoundOptions,
    profile: &ProfileSolution,
) -> Result<Entry> {
    let mut sch = regime.schedule(grid.dim(), n)?;
    if options.zero_time {
        sch = sch.at_initial_time();
    }
    let epsilon = if options.squared_epsilon {
        sch.eps_n * sch.eps_n
    } else {
        sch.eps_n
    };
    let moll = regime.mollifier(epsilon)?;
    if options.squared_epsilon {
        if let Err(e) = moll.check_resolved(&grid) {
            let mut row = vec![f64::NAN; COLUMNS.len()];
            row[..6].copy_from_slice(&[n, sch.kappa_n, sch.lambda_n, sch.t_n, epsilon, 0.0]);
            return Ok(Entry {
                row,
                note: Some(format!("n = {n} skipped: {e}")),
            });
        }
    }
    let v0 = mollify(&build_profile_data(&sch, grid, [0.0; 3])?, &moll);
    let ratios = profile_ratios(&sch, &v0, profile, options.time_samples);
    let mut row = vec![n, sch.kappa_n, sch.lambda_n, sch.t_n, epsilon, 1.0];
    row.extend_from_slice(&ratios);
    let growth = if sch.t_n == 0.0 {
        1.0
    } else {
        (sch.lambda_n * sch.t_n).powf(sch.s)
    };
    row.push(sch.kappa_n * growth);
    Ok(Entry { row, note: None })
}

/// `[‖v(tₙ)‖_{H^s}, ratio 1, ratio 2 (k = 0, 1, 2), ratio 3, ratio 4]` for
/// the ODE flow of the mollified data `v0`.
pub(crate) fn profile_ratios(
    sch: &ParameterSchedule,
    v0: &SpectralField,
    profile: &ProfileSolution,
    samples: usize,
) -> [f64; 7] {
    let sigma = sch.sigma;
    let phase = sch.lambda_n * sch.t_n;
    // tₙ = 0 reduces every phase factor to V(0) = 1
    let growth = |k: f64| if sch.t_n == 0.0 { 1.0 } else { phase.powf(k) };
    let amp = sch.lambda_n.powf(1.0 / sigma);
    let gradient = v0.gradient();
    let grad0: Vec<f64> = (0..v0.physical().len())
        .map(|j| gradient.iter().map(|g| g.physical()[j].powi(2)).sum::<f64>().sqrt())
        .collect();

    let mut hk = [0.0f64; 3];
    let mut sup: f64 = 0.0;
    let mut grad_ratio: f64 = 0.0;
    let mut hs_final = 0.0;
    for t in sample_times(sch.t_n, samples) {
        let v = evaluate_ode_profile(v0, t, profile);
        for (k, slot) in hk.iter_mut().enumerate() {
            *slot = slot.max(sobolev_norm(&v, k as f64));
        }
        sup = sup.max(v.sup_norm());
        // ∇[a V(t|a|^σ)] = ∇a (V(τ) + στV'(τ)), τ = t|a|^σ
        let mut g: f64 = 0.0;
        for (&a, &da) in v0.physical().iter().zip(&grad0) {
            let tau = t * a.abs().powf(sigma);
            let (val, der) = profile.eval(tau);
            g = g.max(da * (val + sigma * tau * der).abs());
        }
        grad_ratio = grad_ratio.max(g / (amp * sch.n * (1.0 + sch.lambda_n * t)));
        if t == sch.t_n {
            hs_final = sobolev_norm(&v, sch.s);
        }
    }
    let ratio2 = |k: usize| hk[k] / (sch.kappa_n * growth(k as f64) * sch.n.powf(k as f64 - sch.s));
    [
        hs_final,
        hs_final / (sch.kappa_n * growth(sch.s)),
        ratio2(0),
        ratio2(1),
        ratio2(2),
        sup / amp,
        grad_ratio,
    ]
}

fn judge(report: &mut ExperimentReport) {
    let resolved: Vec<usize> = report
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r[5] == 1.0)
        .map(|(i, _)| i)
        .collect();
    let col = |name: &str| -> Vec<f64> {
        let idx = COLUMNS.iter().position(|c| *c == name).unwrap();
        resolved.iter().map(|&i| report.rows[i][idx]).collect()
    };
    let r1 = col("ratio1_lower");
    let lower = r1.iter().cloned().fold(f64::INFINITY, f64::min);
    report.fits.insert("ratio1_min".into(), lower);
    report.fits.insert("ratio1_spread".into(), spread_ratio(&r1));
    let has_data = !resolved.is_empty();
    report.verdicts.push(Verdict::new(
        Criterion::ProfileRatios,
        "ratio1-lower-bound",
        has_data && lower > 0.0 && spread_ratio(&r1) < RATIO_BAND,
        format!("min {lower:.6e}, spread {:.4} (band {RATIO_BAND})", spread_ratio(&r1)),
    ));
    for name in ["ratio2_h0", "ratio2_h1", "ratio2_h2", "ratio3_sup", "ratio4_gradient"] {
        let v = col(name);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = spread_ratio(&v);
        report.fits.insert(format!("{name}_max"), hi);
        report.fits.insert(format!("{name}_spread"), spread);
        report.verdicts.push(Verdict::new(
            Criterion::ProfileRatios,
            format!("{name}-upper-bound"),
            has_data && hi.is_finite() && spread < RATIO_BAND,
            format!("max {hi:.6e}, spread {spread:.4} (band {RATIO_BAND})"),
        ));
    }
}
