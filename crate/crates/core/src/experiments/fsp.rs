use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{map_jobs, Criterion, ExperimentReport, SmoothDataSpec, Verdict};
use crate::profile::BumpSpec;
use crate::spectral::{SpectralField, TorusGrid};
use crate::wave::{evolve, Snapshot, SolverConfig, WaveState};

/// Two data sets that agree on `B(center, radius)`: a shared background
/// (smooth pair plus a bump at the center) and, for the second set only, a
/// bump placed just outside the ball along the first axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FspCase {
    pub center: [f64; 3],
    pub radius: f64,
    pub horizon: f64,
    pub background: SmoothDataSpec,
    pub inner_amplitude: f64,
    pub inner_radius: f64,
    /// Zero makes both data sets identical.
    pub difference_amplitude: f64,
    pub difference_radius: f64,
    /// Distance from the ball to the support of the difference bump;
    /// negative values make the data differ inside the ball.
    pub difference_gap: f64,
}

impl Default for FspCase {
    fn default() -> Self {
        Self {
            center: [std::f64::consts::PI; 3],
            radius: 0.5,
            horizon: 0.25,
            background: SmoothDataSpec::default(),
            inner_amplitude: 1.0,
            inner_radius: 0.4,
            difference_amplitude: 1.0,
            // wide enough that its spectral tail is negligible at N = 128
            difference_radius: 2.4,
            difference_gap: 0.1,
        }
    }
}

impl FspCase {
    pub fn difference_center(&self) -> [f64; 3] {
        let mut c = self.center;
        c[0] += self.radius + self.difference_gap + self.difference_radius;
        c
    }

    pub fn states(&self, grid: TorusGrid) -> Result<(WaveState, WaveState)> {
        let bump = BumpSpec;
        let smooth = self.background.state(grid)?;
        let inner = SpectralField::from_fn(grid, |x| {
            self.inner_amplitude * bump.value(grid.distance_sq(x, &self.center).sqrt() / self.inner_radius)
        });
        let a = WaveState {
            u: smooth.u.try_add(&inner)?,
            ut: smooth.ut,
            time: 0.0,
        };
        if self.difference_amplitude == 0.0 {
            return Ok((a.clone(), a));
        }
        let dc = self.difference_center();
        let diff = SpectralField::from_fn(grid, |x| {
            self.difference_amplitude * bump.value(grid.distance_sq(x, &dc).sqrt() / self.difference_radius)
        });
        let b = WaveState {
            u: a.u.try_add(&diff)?,
            ut: a.ut.clone(),
            time: 0.0,
        };
        Ok((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FspOptions {
    /// Run with fixed steps so both evolutions share their time levels.
    pub solver: SolverConfig,
    /// Compare every this many steps (and at the end).
    pub observer_stride: usize,
    /// Grid size at which the tolerance applies.
    pub working_points: usize,
    pub tolerance: f64,
    /// Required discrepancy reduction per doubling of the grid.
    pub min_shrink: f64,
    /// Discrepancies below this are treated as converged to roundoff.
    pub roundoff_floor: f64,
    /// Thread count; never part of a report.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for FspOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::new(1e-2, 1.0).fixed_step(),
            observer_stride: 5,
            working_points: 128,
            tolerance: 1e-6,
            min_shrink: 4.0,
            roundoff_floor: 1e-12,
            jobs: 1,
        }
    }
}

/// `sup |a.u − b.u|` over the grid nodes in `B(center, radius)`.
pub fn interior_discrepancy(a: &WaveState, b: &WaveState, center: &[f64; 3], radius: f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *a.grid();
    Ok(ball_nodes(&grid, center, radius)
        .into_iter()
        .map(|i| (a.u.physical()[i] - b.u.physical()[i]).abs())
        .fold(0.0, f64::max))
}

pub(crate) fn ball_nodes(grid: &TorusGrid, center: &[f64; 3], radius: f64) -> Vec<usize> {
    let r2 = radius * radius;
    grid.nodes()
        .enumerate()
        .filter(|(_, x)| grid.distance_sq(x, center) <= r2)
        .map(|(i, _)| i)
        .collect()
}

/// Evolves both data sets of `case` on grids of size `points` and records the
/// largest discrepancy on `B(center, 0.9(r₀ − t))` over the observed times.
pub fn run_fsp_check(case: &FspCase, dim: usize, points: &[usize], options: &FspOptions) -> Result<ExperimentReport> {
    if points.is_empty() || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid sizes must be increasing".into()));
    }
    if !(case.radius > 0.0 && case.horizon >= 0.0) {
        return Err(Error::InvalidArgument(
            "ball radius must be positive and horizon non-negative".into(),
        ));
    }
    if options.solver.max_phase.is_some() {
        return Err(Error::InvalidArgument("finite-speed runs need fixed steps".into()));
    }
    let grids = points
        .iter()
        .map(|&p| TorusGrid::new(dim, p))
        .collect::<Result<Vec<_>>>()?;
    let results = map_jobs(options.jobs, grids.len(), |i| measure(case, grids[i], options));
    let mut report = ExperimentReport::new(
        "fsp",
        json!({
            "case": case,
            "dim": dim,
            "points": points,
            "options": options,
        }),
        &["points", "discrepancy", "steps"],
    );
    for (p, r) in points.iter().zip(results) {
        let (disc, steps) = r?;
        report.steps += steps;
        report.push_row(vec![*p as f64, disc, steps as f64]);
    }
    let disc = report.column("discrepancy").unwrap_or_default();
    if case.horizon >= case.radius {
        report.notes.push(format!(
            "horizon {} reaches the ball radius {}: report only",
            case.horizon, case.radius
        ));
        return Ok(report);
    }
    if let Some(i) = points.iter().position(|&p| p == options.working_points) {
        report.verdicts.push(Verdict::new(
            Criterion::FiniteSpeed,
            "interior-tolerance",
            disc[i] < options.tolerance,
            format!(
                "discrepancy {:.3e} at N = {} (tolerance {:.0e})",
                disc[i], options.working_points, options.tolerance
            ),
        ));
    } else {
        report
            .notes
            .push(format!("working grid N = {} not in the sweep", options.working_points));
    }
    if disc.len() > 1 {
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for w in disc.windows(2) {
            if w[1] <= options.roundoff_floor {
                continue;
            }
            let shrink = w[0] / w[1];
            worst = worst.min(shrink);
            ok &= shrink >= options.min_shrink;
        }
        report.fits.insert("min_shrink".into(), worst);
        report.verdicts.push(Verdict::new(
            Criterion::FiniteSpeed,
            "resolution-decay",
            ok,
            format!(
                "smallest reduction per doubling {worst:.3} (required {})",
                options.min_shrink
            ),
        ));
    }
    Ok(report)
}

fn measure(case: &FspCase, grid: TorusGrid, options: &FspOptions) -> Result<(f64, usize)> {
    let (a, b) = case.states(grid)?;
    let inside = interior_discrepancy(&a, &b, &case.center, case.radius)?;
    let scale = a.u.sup_norm().max(1.0);
    if inside > 1e-14 * scale {
        return Err(Error::PreconditionViolated(format!(
            "data differ by {inside:.3e} inside the ball"
        )));
    }
    let solver = options.solver.with_stride(options.observer_stride);
    // ball samples of the first run at every observed time
    let mut first: Vec<(f64, Vec<usize>, Vec<f64>)> = Vec::new();
    let mut obs_a = |snap: &Snapshot<'_>| -> Result<()> {
        let t = snap.time();
        let r = 0.9 * (case.radius - t);
        let state = snap.state();
        let nodes = if r > 0.0 {
            ball_nodes(&grid, &case.center, r)
        } else {
            Vec::new()
        };
        let values = nodes.iter().map(|&i| state.u.physical()[i]).collect();
        first.push((t, nodes, values));
        Ok(())
    };
    let evo_a = evolve(&a, case.horizon, &solver, &mut [&mut obs_a])?;
    drop(a);
    let mut worst: f64 = 0.0;
    let mut index = 0;
    let mut obs_b = |snap: &Snapshot<'_>| -> Result<()> {
        let (t, nodes, values) = &first[index];
        debug_assert!((snap.time() - t).abs() <= 1e-12 * t.max(1.0));
        let state = snap.state();
        for (&i, v) in nodes.iter().zip(values) {
            worst = worst.max((state.u.physical()[i] - v).abs());
        }
        index += 1;
        Ok(())
    };
    let evo_b = evolve(&b, case.horizon, &solver, &mut [&mut obs_b])?;
    Ok((worst, evo_a.steps + evo_b.steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_data_give_zero() {
        let case = FspCase {
            difference_amplitude: 0.0,
            ..Default::default()
        };
        let rep = run_fsp_check(&case, 1, &[64, 128], &Default::default()).unwrap();
        assert!(rep.column("discrepancy").unwrap().iter().all(|&d| d == 0.0));
        assert!(rep.passed());
    }

    #[test]
    fn rejects_data_differing_inside() {
        let case = FspCase {
            difference_gap: -0.3,
            ..Default::default()
        };
        let res = run_fsp_check(&case, 1, &[64], &Default::default());
        assert!(matches!(res, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn horizon_beyond_radius_is_report_only() {
        let case = FspCase {
            horizon: 0.6,
            ..Default::default()
        };
        let rep = run_fsp_check(&case, 1, &[64], &Default::default()).unwrap();
        assert!(rep.verdicts.is_empty());
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn needs_fixed_steps() {
        let opts = FspOptions {
            solver: SolverConfig::new(1e-2, 1.0),
            ..Default::default()
        };
        assert!(run_fsp_check(&FspCase::default(), 1, &[64], &opts).is_err());
    }
}
