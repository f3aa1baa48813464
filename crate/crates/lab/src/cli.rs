use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_str, ConfigError, Experiment, RunConfig};
use crate::run::{output_root, rerender, run, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "inflation-lab",
    version,
    about = "Desk-scale norm inflation experiments for the nonlinear wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Profile ratios of the concentrated ODE solution.
    ProfileCheck(Common),
    /// Profile ratios with mollification at the squared scale.
    EpsSquaredCheck(Common),
    /// Oscillatory L² quantity over a range of frequencies.
    CoareaCheck(Common),
    /// Growth of the defect between the full solution and its approximation.
    PerturbationCheck(Common),
    /// Finite propagation speed of the discretization.
    FspCheck(Common),
    /// Norm inflation sweep over the concentrated bumps.
    InflationSweep(Common),
    /// Parse and validate a configuration without running anything.
    Validate(Common),
    /// Redraw the charts of a finished run from its stored table.
    Report {
        /// Run directory (the one holding manifest.json).
        dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root (overrides the config and INFLATION_LAB_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Torus dimension (1, 2 or 3).
    #[arg(long)]
    dim: Option<usize>,
    /// Skip SVG charts.
    #[arg(long)]
    no_plots: bool,
    /// Sweep entries run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn load(&self, experiment: Option<Experiment>) -> Result<RunConfig, ConfigError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                parse_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(e) = experiment {
            config.experiment = e;
        }
        if let Some(n) = self.grid {
            config.grid.points = n;
        }
        if let Some(d) = self.dim {
            config.grid.dim = d;
        }
        if self.no_plots {
            config.output.plots = false;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 when every verdict passed, 1 on a failed verdict or experiment error,
/// 2 on a configuration or usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (common, experiment) = match cli.command {
        Command::ProfileCheck(c) => (c, Experiment::ProfileBound),
        Command::EpsSquaredCheck(c) => (c, Experiment::EpsSquared),
        Command::CoareaCheck(c) => (c, Experiment::Coarea),
        Command::PerturbationCheck(c) => (c, Experiment::Perturbation),
        Command::FspCheck(c) => (c, Experiment::Fsp),
        Command::InflationSweep(c) => (c, Experiment::Inflation),
        Command::Validate(c) => {
            return match c.load(None) {
                Ok(config) => {
                    println!("configuration is valid ({})", config.experiment);
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_USAGE
                }
            };
        }
        Command::Report { dir } => {
            return match rerender(&dir) {
                Ok(m) => {
                    println!("redrew charts in {} ({} files)", dir.display(), m.files.len());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let config = match common.load(Some(experiment)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let root = output_root(common.out.as_deref(), &config);
    match run(&config, &root, common.jobs) {
        Ok(outcome) => {
            for v in &outcome.report.verdicts {
                println!(
                    "{} {} [{}] {}",
                    if v.passed { "PASS" } else { "FAIL" },
                    v.criterion,
                    v.check,
                    v.detail
                );
            }
            for n in &outcome.report.notes {
                println!("note: {n}");
            }
            println!(
                "results in {} ({:.1} s)",
                outcome.dir.display(),
                outcome.report.wall_clock_seconds
            );
            if outcome.passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_FAILED
        }
    }
}
