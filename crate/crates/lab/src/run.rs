use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use inflation_core::experiments::{
    run_coarea_check, run_eps_squared_variant, run_fsp_check, run_inflation_sweep, run_perturbation_check,
    run_profile_bound_check, CoareaOptions, ExperimentReport, FspOptions, IndexSchedule, InflationOptions,
    PathologicalDataSpec, PerturbationOptions, ProfileBoundOptions,
};
use inflation_core::spectral::TorusGrid;
use inflation_core::BumpSpec;

use crate::config::{parse_str, ConfigError, Experiment, RunConfig};
use crate::plot::{plot_specs, reference_values, render_svg};
use crate::store::{read_manifest, read_table, FileKind, Manifest, ResultStore, CONFIG, FAILED, RESULTS};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "INFLATION_LAB_OUT";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("experiment failed: {error} (partial results in {})", dir.display())]
    Experiment { error: inflation_core::Error, dir: PathBuf },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: ExperimentReport,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// Output root: the explicit choice, then the config, then the environment,
/// then `./inflation-lab-out`.
pub fn output_root(explicit: Option<&Path>, config: &RunConfig) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if !config.output.directory.is_empty() {
        return PathBuf::from(&config.output.directory);
    }
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("inflation-lab-out"), PathBuf::from)
}

/// The configuration as recorded with the results. The output location is
/// left out so that runs written to different places hash identically.
pub fn snapshot(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.output.directory.clear();
    c.to_toml()
}

/// Runs the selected experiment and persists its outputs under
/// `root/<experiment>/`.
pub fn run(config: &RunConfig, root: &Path, jobs: usize) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let dir = root.join(config.experiment.name());
    let mut store = ResultStore::create(&dir)?;
    store.write(CONFIG, FileKind::Config, snapshot(config).as_bytes())?;
    let start = Instant::now();
    let result = execute(config, jobs.max(1));
    let mut report = match result {
        Ok(r) => r,
        Err(error) => {
            store.write(FAILED, FileKind::FailureMarker, format!("{error}\n").as_bytes())?;
            store.finish(config.experiment.name(), "error", &[])?;
            return Err(RunError::Experiment { error, dir });
        }
    };
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    store.write_table(&report)?;
    store.write_summary(&report)?;
    if config.output.plots {
        write_plots(
            &mut store,
            config.experiment,
            config.regime.s,
            config.regime.theta,
            &report.columns,
            &report.rows,
        )?;
    }
    let status = if report.passed() { "passed" } else { "failed" };
    let manifest = store.finish(config.experiment.name(), status, &report.columns)?;
    Ok(RunOutcome { dir, report, manifest })
}

fn execute(config: &RunConfig, jobs: usize) -> inflation_core::Result<ExperimentReport> {
    let regime = config.regime_settings();
    let grid = TorusGrid::new(config.grid.dim, config.grid.points)?;
    let solver = config.solver_config();
    let sweep = &config.sweep;
    match config.experiment {
        Experiment::ProfileBound | Experiment::EpsSquared => {
            let options = ProfileBoundOptions {
                time_samples: sweep.time_samples,
                jobs,
                ..Default::default()
            };
            if config.experiment == Experiment::EpsSquared {
                run_eps_squared_variant(&regime, &sweep.n_list, grid, &options)
            } else {
                run_profile_bound_check(&regime, &sweep.n_list, grid, &options)
            }
        }
        Experiment::Coarea => {
            let options = CoareaOptions {
                dim: config.grid.dim,
                tolerance: config.coarea.tolerance,
                ..Default::default()
            };
            run_coarea_check(
                BumpSpec,
                config.coarea.weight(),
                regime.sigma,
                &sweep.lambdas(),
                &options,
            )
        }
        Experiment::Perturbation => {
            let options = PerturbationOptions {
                solver,
                include_profile: true,
                jobs,
            };
            run_perturbation_check(&regime, &config.smooth_data(), &sweep.n_list, grid, &options)
        }
        Experiment::Fsp => {
            let options = FspOptions {
                solver,
                observer_stride: config.solver.observer_stride.max(1),
                working_points: config.grid.points,
                tolerance: config.fsp.tolerance,
                jobs,
                ..Default::default()
            };
            run_fsp_check(&config.fsp_case(), config.grid.dim, &sweep.fsp_points, &options)
        }
        Experiment::Inflation => {
            let spec = PathologicalDataSpec {
                k_first: sweep.k_first,
                k_last: sweep.k_last,
                schedule: IndexSchedule::Geometric { n0: sweep.n0 },
            };
            let options = InflationOptions {
                solver,
                jobs,
                ..Default::default()
            };
            run_inflation_sweep(&regime, &config.smooth_data(), &spec, grid, &options)
        }
    }
}

fn write_plots(
    store: &mut ResultStore,
    experiment: Experiment,
    s: f64,
    theta: f64,
    columns: &[String],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    let column = |name: &str| -> Option<Vec<f64>> {
        let i = columns.iter().position(|c| c == name)?;
        Some(rows.iter().map(|r| r[i]).collect())
    };
    let Some(x_label) = columns.first() else {
        return Ok(());
    };
    let x = column(x_label).unwrap_or_default();
    for spec in plot_specs(experiment, s, theta) {
        let Some(y) = column(spec.column) else {
            continue;
        };
        let reference = reference_values(&spec, &x, &y, column);
        let title = format!("{experiment}: {}", spec.column);
        let svg = render_svg(&title, x_label, &x, &y, &spec, reference.as_deref());
        store.write(&format!("{}.svg", spec.column), FileKind::Plot, svg.as_bytes())?;
    }
    Ok(())
}

/// Re-renders the charts of a finished run from its stored table and
/// configuration, then rewrites the manifest.
pub fn rerender(dir: &Path) -> Result<Manifest, RunError> {
    let manifest = read_manifest(dir)?;
    let config = parse_str(&std::fs::read_to_string(dir.join(CONFIG))?)?;
    let (columns, rows) = read_table(&dir.join(RESULTS))?;
    let mut store = ResultStore::adopt(dir, &manifest)?;
    write_plots(
        &mut store,
        config.experiment,
        config.regime.s,
        config.regime.theta,
        &columns,
        &rows,
    )?;
    Ok(store.finish(&manifest.experiment, &manifest.status, &columns)?)
}
