//! Run configuration: a TOML file with one table per concern. Every field
//! has a default, and the resolved configuration (defaults included) is what
//! gets written next to the results.

use std::fmt;
use std::path::{Path, PathBuf};

use inflation_core::experiments::{FspCase, PeriodicWeight, RegimeSettings, SmoothDataSpec};
use inflation_core::profile::MIN_BUMP_CELLS;
use inflation_core::regime::{DEFAULT_C_MOLL, DEFAULT_DELTA1, DEFAULT_DELTA2};
use inflation_core::spectral::TorusGrid;
use inflation_core::wave::SolverConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ProfileBound,
    EpsSquared,
    Coarea,
    Perturbation,
    Fsp,
    Inflation,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::ProfileBound,
        Experiment::EpsSquared,
        Experiment::Coarea,
        Experiment::Perturbation,
        Experiment::Fsp,
        Experiment::Inflation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ProfileBound => "profile-bound",
            Experiment::EpsSquared => "eps-squared",
            Experiment::Coarea => "coarea",
            Experiment::Perturbation => "perturbation",
            Experiment::Fsp => "fsp",
            Experiment::Inflation => "inflation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeBlock {
    pub s: f64,
    pub sigma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta: f64,
}

impl Default for RegimeBlock {
    fn default() -> Self {
        Self {
            s: 0.3,
            sigma: 1.0,
            delta1: DEFAULT_DELTA1,
            delta2: DEFAULT_DELTA2,
            theta: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub dim: usize,
    pub points: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { dim: 3, points: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub dt: f64,
    pub padding: f64,
    /// Bound on `dt·‖u‖_∞^σ`; zero means fixed steps.
    pub max_phase: f64,
    /// Zero selects the solver's default guard.
    pub blowup_guard: f64,
    pub observer_stride: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            padding: 1.5,
            max_phase: 0.1,
            blowup_guard: 0.0,
            observer_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub n_list: Vec<f64>,
    pub k_first: u32,
    pub k_last: u32,
    pub n0: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    /// Grid sizes of the resolution sweep in the finite-speed check.
    pub fsp_points: Vec<usize>,
    /// Sample times per entry in the profile-bound check.
    pub time_samples: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            n_list: vec![4.0, 8.0, 16.0],
            k_first: 1,
            k_last: 3,
            n0: 4.0,
            lambda_min: 1e2,
            lambda_max: 1e4,
            lambda_count: 20,
            fsp_points: vec![64, 128],
            time_samples: 9,
        }
    }
}

impl SweepBlock {
    /// `lambda_count` log-spaced values in `[lambda_min, lambda_max]`.
    pub fn lambdas(&self) -> Vec<f64> {
        if self.lambda_count == 1 {
            return vec![self.lambda_min];
        }
        let (a, b) = (self.lambda_min.ln(), self.lambda_max.ln());
        (0..self.lambda_count)
            .map(|i| (a + (b - a) * i as f64 / (self.lambda_count - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierBlock {
    pub c_moll: f64,
    pub support_radius: f64,
}

impl Default for MollifierBlock {
    fn default() -> Self {
        Self {
            c_moll: DEFAULT_C_MOLL,
            support_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothBlock {
    pub amplitude: f64,
    pub max_wavenumber: i64,
}

impl Default for SmoothBlock {
    fn default() -> Self {
        let d = SmoothDataSpec::default();
        Self {
            amplitude: d.amplitude,
            max_wavenumber: d.max_wavenumber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Zero,
    Constant,
    ProfileDerivative,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoareaBlock {
    pub weight: WeightKind,
    /// Value of the constant weight or period of the cosine.
    pub parameter: f64,
    pub tolerance: f64,
}

impl Default for CoareaBlock {
    fn default() -> Self {
        Self {
            weight: WeightKind::ProfileDerivative,
            parameter: 1.0,
            tolerance: 1e-10,
        }
    }
}

impl CoareaBlock {
    pub fn weight(&self) -> PeriodicWeight {
        match self.weight {
            WeightKind::Zero => PeriodicWeight::Zero,
            WeightKind::Constant => PeriodicWeight::Constant { value: self.parameter },
            WeightKind::ProfileDerivative => PeriodicWeight::ProfileDerivative,
            WeightKind::Cosine => PeriodicWeight::Cosine { period: self.parameter },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FspBlock {
    pub radius: f64,
    pub horizon: f64,
    pub inner_amplitude: f64,
    pub inner_radius: f64,
    pub difference_amplitude: f64,
    pub difference_radius: f64,
    pub difference_gap: f64,
    pub tolerance: f64,
}

impl Default for FspBlock {
    fn default() -> Self {
        let c = FspCase::default();
        Self {
            radius: c.radius,
            horizon: c.horizon,
            inner_amplitude: c.inner_amplitude,
            inner_radius: c.inner_radius,
            difference_amplitude: c.difference_amplitude,
            difference_radius: c.difference_radius,
            difference_gap: c.difference_gap,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    /// Output root; empty defers to `--out`, then `INFLATION_LAB_OUT`.
    pub directory: String,
    pub plots: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: String::new(),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Seed of the smooth data; TOML integers cap it at `i64::MAX`.
    pub seed: u64,
    pub regime: RegimeBlock,
    pub grid: GridBlock,
    pub solver: SolverBlock,
    pub sweep: SweepBlock,
    pub mollifier: MollifierBlock,
    pub smooth: SmoothBlock,
    pub coarea: CoareaBlock,
    pub fsp: FspBlock,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::ProfileBound,
            seed: SmoothDataSpec::default().seed,
            regime: RegimeBlock::default(),
            grid: GridBlock::default(),
            solver: SolverBlock::default(),
            sweep: SweepBlock::default(),
            mollifier: MollifierBlock::default(),
            smooth: SmoothBlock::default(),
            coarea: CoareaBlock::default(),
            fsp: FspBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

impl RunConfig {
    pub fn regime_settings(&self) -> RegimeSettings {
        RegimeSettings {
            s: self.regime.s,
            sigma: self.regime.sigma,
            delta1: self.regime.delta1,
            delta2: self.regime.delta2,
            theta: self.regime.theta,
            c_moll: self.mollifier.c_moll,
            support_radius: self.mollifier.support_radius,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.solver.dt,
            sigma: self.regime.sigma,
            splitting_order: 2,
            dealias_padding: self.solver.padding,
            max_phase: (self.solver.max_phase > 0.0).then_some(self.solver.max_phase),
            blowup_guard: (self.solver.blowup_guard > 0.0).then_some(self.solver.blowup_guard),
            observer_stride: self.solver.observer_stride,
        }
    }

    pub fn smooth_data(&self) -> SmoothDataSpec {
        SmoothDataSpec {
            seed: self.seed,
            max_wavenumber: self.smooth.max_wavenumber,
            amplitude: self.smooth.amplitude,
        }
    }

    pub fn fsp_case(&self) -> FspCase {
        FspCase {
            radius: self.fsp.radius,
            horizon: self.fsp.horizon,
            background: self.smooth_data(),
            inner_amplitude: self.fsp.inner_amplitude,
            inner_radius: self.fsp.inner_radius,
            difference_amplitude: self.fsp.difference_amplitude,
            difference_radius: self.fsp.difference_radius,
            difference_gap: self.fsp.difference_gap,
            ..FspCase::default()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Every violated constraint for the selected experiment.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.seed > i64::MAX as u64 {
            out.push(format!("seed {} exceeds the TOML integer range", self.seed));
        }
        let regime = self.regime_settings();
        out.extend(regime.violations());
        let grid = match TorusGrid::new(self.grid.dim, self.grid.points) {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(format!("grid: {e}"));
                None
            }
        };
        if let Err(e) = self.solver_config().validate() {
            out.push(format!("solver: {e}"));
        }
        let smooth_band = 2 * self.smooth.max_wavenumber;
        if self.smooth.max_wavenumber < 0 || !self.smooth.amplitude.is_finite() {
            out.push("smooth: max_wavenumber must be non-negative and amplitude finite".into());
        }
        let sweep = &self.sweep;
        let check_n_list = |out: &mut Vec<String>, resolve: bool| {
            if sweep.n_list.is_empty() {
                out.push("sweep: n_list is empty".into());
            }
            for &n in &sweep.n_list {
                if !(n >= 3.0) {
                    out.push(format!("sweep: n = {n} is below 3"));
                } else if let (true, Some(g)) = (resolve, grid) {
                    let cells = g.cells(2.0 / n);
                    if cells < MIN_BUMP_CELLS {
                        out.push(format!(
                            "sweep: bump for n = {n} spans {cells:.2} cells on N = {}, need {MIN_BUMP_CELLS}",
                            g.points()
                        ));
                    }
                }
            }
        };
        let smooth_fits = |out: &mut Vec<String>, points: usize| {
            if self.smooth.amplitude != 0.0 && smooth_band >= points as i64 {
                out.push(format!(
                    "smooth: band |k| <= {} does not fit N = {points}",
                    self.smooth.max_wavenumber
                ));
            }
        };
        match self.experiment {
            Experiment::ProfileBound => {
                check_n_list(&mut out, true);
                if sweep.time_samples == 0 {
                    out.push("sweep: time_samples must be positive".into());
                }
            }
            Experiment::EpsSquared => {
                check_n_list(&mut out, true);
                if self.regime.sigma < 1.0 {
                    out.push(format!(
                        "regime: mollification at eps_n^2 needs sigma >= 1 (got {})",
                        self.regime.sigma
                    ));
                }
            }
            Experiment::Coarea => {
                if !(sweep.lambda_min > 0.0 && sweep.lambda_max > sweep.lambda_min && sweep.lambda_count >= 1) {
                    out.push("sweep: need 0 < lambda_min < lambda_max and lambda_count >= 1".into());
                }
                if !(self.coarea.tolerance > 0.0) {
                    out.push("coarea: tolerance must be positive".into());
                }
                if matches!(self.coarea.weight, WeightKind::Cosine) && !(self.coarea.parameter > 0.0) {
                    out.push("coarea: cosine period must be positive".into());
                }
            }
            Experiment::Perturbation => {
                check_n_list(&mut out, true);
                if let Some(v) = regime.theta_violation() {
                    out.push(format!("regime: {v}"));
                }
                smooth_fits(&mut out, self.grid.points);
            }
            Experiment::Fsp => {
                let pts = &sweep.fsp_points;
                if pts.is_empty() || pts.windows(2).any(|w| w[1] <= w[0]) {
                    out.push("sweep: fsp_points must be a non-empty increasing list".into());
                }
                for &p in pts {
                    if let Err(e) = TorusGrid::new(self.grid.dim, p) {
                        out.push(format!("sweep: fsp grid {p}: {e}"));
                    }
                    smooth_fits(&mut out, p);
                }
                if !(self.fsp.radius > 0.0 && self.fsp.horizon >= 0.0) {
                    out.push("fsp: radius must be positive and horizon non-negative".into());
                }
                if self.fsp.difference_gap < 0.0 {
                    out.push("fsp: difference data must vanish on the ball (difference_gap >= 0)".into());
                }
                if self.solver.max_phase > 0.0 {
                    out.push("solver: the finite-speed check needs fixed steps (max_phase = 0)".into());
                }
            }
            Experiment::Inflation => {
                if let Some(v) = regime.delta_violation() {
                    out.push(format!("regime: {v}"));
                }
                if sweep.k_first == 0 || sweep.k_last < sweep.k_first {
                    out.push("sweep: need 1 <= k_first <= k_last".into());
                } else if let Some(g) = grid {
                    for k in sweep.k_first..=sweep.k_last {
                        let n = sweep.n0 * 2f64.powi(k as i32);
                        let cells = g.cells(2.0 / n);
                        if !(n >= 3.0) {
                            out.push(format!("sweep: n_{k} = {n} is below 3"));
                        } else if cells < MIN_BUMP_CELLS {
                            out.push(format!(
                                "sweep: bump k = {k} (n = {n}) spans {cells:.2} cells, need {MIN_BUMP_CELLS}"
                            ));
                        }
                    }
                }
                smooth_fits(&mut out, self.grid.points);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(v))
        }
    }
}

/// Parses TOML text without validating it.
pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (0, 0),
        };
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let config = parse_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// One-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_gives_documented_defaults() {
        let c = parse_str("").unwrap();
        assert_eq!(c.regime.delta1, 0.05);
        assert_eq!(c.regime.delta2, 0.5);
        assert_eq!(c.mollifier.c_moll, 0.01);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn small_sigma_is_rejected_with_reason() {
        let c = parse_str("[regime]\nsigma = 0.6\n").unwrap();
        let Err(ConfigError::Validation(v)) = c.validate() else {
            panic!("expected validation failure");
        };
        assert!(v.iter().any(|m| m.contains("empty")), "{v:?}");
    }

    #[test]
    fn all_violations_are_listed() {
        let c = parse_str("[grid]\npoints = 7\n[mollifier]\nc_moll = -1.0\n[sweep]\nn_list = []\n").unwrap();
        let v = c.violations();
        assert!(v.len() >= 3, "{v:?}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_str("seed = 1\n[regime]\ns = \"x\"\n").unwrap_err();
        match err {
            ConfigError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 5);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(
            parse_str("[regime]\nsgima = 1.0\n"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn unresolvable_bump_is_reported() {
        let c = parse_str("[grid]\ndim = 3\npoints = 32\n[sweep]\nn_list = [64.0]\n").unwrap();
        assert!(c.violations().iter().any(|m| m.contains("cells")));
    }

    #[test]
    fn lambdas_are_log_spaced() {
        let l = SweepBlock::default().lambdas();
        assert_eq!(l.len(), 20);
        assert!((l[0] - 1e2).abs() < 1e-9 && (l[19] - 1e4).abs() < 1e-7);
        assert!((l[1] / l[0] - l[19] / l[18]).abs() < 1e-12);
    }

    fn experiment() -> impl Strategy<Value = Experiment> {
        proptest::sample::select(Experiment::ALL.to_vec())
    }

    prop_compose! {
        fn config()(
            experiment in experiment(),
            seed in 0..=i64::MAX as u64,
            s in 0.0f64..1.5,
            sigma in 0.5f64..3.0,
            theta in 0.0f64..0.5,
            dim in 1usize..=3,
            points in (4usize..64).prop_map(|p| 2 * p),
            n_list in proptest::collection::vec(3.0f64..200.0, 0..5),
            dt in 1e-4f64..1e-1,
            plots in any::<bool>(),
            dir in "[a-z]{0,8}",
        ) -> RunConfig {
            RunConfig {
                experiment,
                seed,
                regime: RegimeBlock { s, sigma, theta, ..Default::default() },
                grid: GridBlock { dim, points },
                solver: SolverBlock { dt, ..Default::default() },
                sweep: SweepBlock { n_list, ..Default::default() },
                output: OutputBlock { directory: dir, plots },
                ..Default::default()
            }
        }
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(c in config()) {
            let text = c.to_toml();
            prop_assert_eq!(parse_str(&text).unwrap(), c);
        }
    }
}
