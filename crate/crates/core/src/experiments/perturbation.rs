use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{kendall_tau, map_jobs, Criterion, ExperimentReport, RegimeSettings, SmoothDataSpec, Verdict};
use crate::profile::{build_profile_data, evaluate_ode_profile_state, solve_profile, ProfileSolution};
use crate::spectral::{apply_linear_propagator, mollify, sobolev_norm, SpectralField, TorusGrid};
use crate::wave::{evolve, semiclassical_energy, Snapshot, SolverConfig, WaveState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOptions {
    pub solver: SolverConfig,
    /// Add the concentrated profile to the data; off leaves only the smooth pair.
    pub include_profile: bool,
    /// Thread count; never part of a report.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig {
                dt: 1e-2,
                ..SolverConfig::default()
            },
            include_profile: true,
            jobs: 1,
        }
    }
}

const COLUMNS: [&str; 15] = [
    "n",
    "t_n",
    "epsilon",
    "steps",
    "observations",
    "defect_h0",
    "defect_h1",
    "defect_h2",
    "defect_hs",
    "rescaled_h0",
    "rescaled_h1",
    "rescaled_h2",
    "rescaled_hs",
    "energy_max",
    "energy_final",
];

/// Tracks `wₙ(t) = uₙ(t) − ρ∗S(t)(u₀,u₁) − vₙ(t)` along the full evolution for
/// each `n` and tests that the rescaled defect does not grow with `n`.
pub fn run_perturbation_check(
    regime: &RegimeSettings,
    smooth: &SmoothDataSpec,
    n_list: &[f64],
    grid: TorusGrid,
    options: &PerturbationOptions,
) -> Result<ExperimentReport> {
    regime.check()?;
    if let Some(v) = regime.theta_violation() {
        return Err(Error::PreconditionViolated(v));
    }
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    if options.solver.sigma != regime.sigma {
        return Err(Error::InvalidArgument(format!(
            "solver sigma {} differs from regime sigma {}",
            options.solver.sigma, regime.sigma
        )));
    }
    options.solver.validate()?;
    let profile = solve_profile(regime.sigma, 1e-10)?;
    let smooth_state = smooth.state(grid)?;
    let rows = map_jobs(options.jobs, n_list.len(), |i| {
        measure(regime, &smooth_state, n_list[i], grid, options, &profile)
    });
    let mut report = ExperimentReport::new(
        "perturbation",
        json!({
            "regime": regime,
            "smooth_data": smooth,
            "n_list": n_list,
            "grid": grid,
            "options": options,
        }),
        &COLUMNS,
    );
    for row in rows {
        let (row, steps) = row?;
        report.steps += steps;
        report.push_row(row);
    }
    let n = report.column("n").unwrap_or_default();
    for (label, col) in [
        ("h0", "rescaled_h0"),
        ("h1", "rescaled_h1"),
        ("h2", "rescaled_h2"),
        ("hs", "rescaled_hs"),
    ] {
        let values = report.column(col).unwrap_or_default();
        let tau = kendall_tau(&n, &values);
        report.fits.insert(format!("kendall_tau_{label}"), tau);
        report.verdicts.push(Verdict::new(
            Criterion::PerturbationTrend,
            format!("trend-{label}"),
            tau <= 0.0 && values.iter().all(|v| v.is_finite()),
            format!("Kendall tau {tau:.4} over {} samples", values.len()),
        ));
    }
    report
        .notes
        .push("trend test over the accessible n sweep, not an asymptotic bound".into());
    Ok(report)
}

struct Defect {
    sup: [f64; 4],
    energy_max: f64,
    energy_final: f64,
    observations: usize,
}

fn measure(
    regime: &RegimeSettings,
    smooth: &WaveState,
    n: f64,
    grid: TorusGrid,
    options: &PerturbationOptions,
    profile: &ProfileSolution,
) -> Result<(Vec<f64>, usize)> {
    let sch = regime.schedule(grid.dim(), n)?;
    let moll = regime.mollifier(sch.eps_n)?;
    let bump = if options.include_profile {
        mollify(&build_profile_data(&sch, grid, [0.0; 3])?, &moll)
    } else {
        SpectralField::zeros(grid)
    };
    let linear0 = WaveState {
        u: mollify(&smooth.u, &moll),
        ut: mollify(&smooth.ut, &moll),
        time: 0.0,
    };
    let initial = WaveState {
        u: linear0.u.try_add(&bump)?,
        ut: linear0.ut.clone(),
        time: 0.0,
    };
    let orders = [0.0, 1.0, 2.0, regime.s];
    let mut d = Defect {
        sup: [0.0; 4],
        energy_max: 0.0,
        energy_final: 0.0,
        observations: 0,
    };
    let mut observer = |snap: &Snapshot<'_>| -> Result<()> {
        let t = snap.time();
        let u = snap.state();
        let lin = apply_linear_propagator(&linear0, t);
        let v = evaluate_ode_profile_state(&bump, t, profile);
        let w = WaveState {
            u: SpectralField::linear_combination(&[(1.0, &u.u), (-1.0, &lin.u), (-1.0, &v.u)])?,
            ut: SpectralField::linear_combination(&[(1.0, &u.ut), (-1.0, &lin.ut), (-1.0, &v.ut)])?,
            time: t,
        };
        for (slot, &nu) in d.sup.iter_mut().zip(&orders) {
            *slot = slot.max(sobolev_norm(&w.u, nu));
        }
        let e = semiclassical_energy(&w, n, regime.s);
        d.energy_max = d.energy_max.max(e);
        d.energy_final = e;
        d.observations += 1;
        Ok(())
    };
    let evo = evolve(&initial, sch.t_n, &options.solver, &mut [&mut observer])?;
    let theta = regime.theta;
    let rescaled: Vec<f64> = d
        .sup
        .iter()
        .zip(&orders)
        .map(|(v, nu)| v * n.powf(theta - (nu - regime.s)))
        .collect();
    let mut row = vec![n, sch.t_n, sch.eps_n, evo.steps as f64, d.observations as f64];
    row.extend_from_slice(&d.sup);
    row.extend_from_slice(&rescaled);
    row.push(d.energy_max);
    row.push(d.energy_final);
    Ok((row, evo.steps))
}
