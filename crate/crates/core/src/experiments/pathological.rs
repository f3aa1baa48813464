use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::RegimeSettings;
use crate::profile::build_profile_data;
use crate::regime::ParameterSchedule;
use crate::spectral::{sobolev_norm, SpectralField, TorusGrid};

/// How the concentration index grows with `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IndexSchedule {
    /// `n_k = n₀ 2^k`
    Geometric { n0: f64 },
    /// `n_k = e^{e^k}`; too fast for any grid beyond the first terms.
    DoubleExponential,
}

impl IndexSchedule {
    pub fn index(&self, k: u32) -> f64 {
        match self {
            IndexSchedule::Geometric { n0 } => n0 * 2f64.powi(k as i32),
            IndexSchedule::DoubleExponential => (k as f64).exp().exp(),
        }
    }

    pub fn formula(&self) -> String {
        match self {
            IndexSchedule::Geometric { n0 } => format!("{n0} * 2^k"),
            IndexSchedule::DoubleExponential => "exp(exp(k))".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologicalDataSpec {
    pub k_first: u32,
    pub k_last: u32,
    pub schedule: IndexSchedule,
}

impl Default for PathologicalDataSpec {
    fn default() -> Self {
        Self {
            k_first: 1,
            k_last: 3,
            schedule: IndexSchedule::Geometric { n0: 4.0 },
        }
    }
}

impl PathologicalDataSpec {
    pub fn ks(&self) -> impl Iterator<Item = u32> {
        self.k_first..=self.k_last
    }

    /// `z^k = (1/k, 0, 0)`
    pub fn center(k: u32) -> [f64; 3] {
        [1.0 / k as f64, 0.0, 0.0]
    }

    /// `r_k = 1/k³`
    pub fn ball_radius(k: u32) -> f64 {
        (k as f64).powi(-3)
    }

    /// The index `n_k` of the double-exponential schedule, for reports.
    pub fn reference_index(k: u32) -> f64 {
        IndexSchedule::DoubleExponential.index(k)
    }
}

/// Placement and size of one bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpRecord {
    pub k: u32,
    pub n: f64,
    pub center: [f64; 3],
    pub ball_radius: f64,
    /// `1/n` plus the mollifier reach.
    pub support_radius: f64,
    pub schedule: ParameterSchedule,
    pub hs_norm: f64,
    pub l2_norm: f64,
}

#[derive(Debug, Clone)]
pub struct PathologicalData {
    pub field: SpectralField,
    pub bumps: Vec<BumpRecord>,
    /// `(k₁, k₂, |z^{k₁}−z^{k₂}| − 1/n_{k₁} − 1/n_{k₂})` for every pair.
    pub margins: Vec<(u32, u32, f64)>,
    /// `|‖v₀‖²_{L²} − Σ_k ‖v_{0,k}‖²_{L²}|` relative to `‖v₀‖²_{L²}`.
    pub l2_additivity_defect: f64,
}

impl PathologicalData {
    pub fn bump(&self, k: u32) -> Option<&BumpRecord> {
        self.bumps.iter().find(|b| b.k == k)
    }
}

/// Concentrated bump number `k` alone.
pub fn single_bump(
    regime: &RegimeSettings,
    spec: &PathologicalDataSpec,
    k: u32,
    grid: TorusGrid,
) -> Result<SpectralField> {
    let sch = regime.schedule(grid.dim(), spec.schedule.index(k))?;
    build_profile_data(&sch, grid, PathologicalDataSpec::center(k))
}

/// `v₀ = Σ_k v_{0,k}` with disjointness and containment checked first.
pub fn build_pathological_data(
    regime: &RegimeSettings,
    spec: &PathologicalDataSpec,
    grid: TorusGrid,
) -> Result<PathologicalData> {
    if spec.k_first == 0 || spec.k_last < spec.k_first {
        return Err(Error::InvalidArgument(format!(
            "k range [{}, {}] must be non-empty and start at 1 or later",
            spec.k_first, spec.k_last
        )));
    }
    let mut records = Vec::new();
    for k in spec.ks() {
        let n = spec.schedule.index(k);
        let schedule = regime.schedule(grid.dim(), n)?;
        let reach = regime.mollifier(schedule.eps_n)?.scaled_radius();
        let record = BumpRecord {
            k,
            n,
            center: PathologicalDataSpec::center(k),
            ball_radius: PathologicalDataSpec::ball_radius(k),
            support_radius: 1.0 / n + reach,
            schedule,
            hs_norm: 0.0,
            l2_norm: 0.0,
        };
        records.push(record);
    }
    let mut margins = Vec::new();
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            let dist = grid.distance_sq(&a.center, &b.center).sqrt();
            let margin = dist - 1.0 / a.n - 1.0 / b.n;
            if margin <= 0.0 {
                return Err(Error::OverlapDetected {
                    first: a.k as usize,
                    second: b.k as usize,
                    margin,
                });
            }
            margins.push((a.k, b.k, margin));
        }
    }
    for r in &records {
        if r.support_radius > r.ball_radius {
            return Err(Error::PreconditionViolated(format!(
                "bump {} reaches {:.4e} beyond its ball radius {:.4e}",
                r.k, r.support_radius, r.ball_radius
            )));
        }
    }
    let mut total = vec![0.0; grid.len()];
    let mut sum_sq = 0.0;
    for r in records.iter_mut() {
        let bump = build_profile_data(&r.schedule, grid, r.center)?;
        r.hs_norm = sobolev_norm(&bump, regime.s);
        r.l2_norm = sobolev_norm(&bump, 0.0);
        sum_sq += r.l2_norm * r.l2_norm;
        for (t, v) in total.iter_mut().zip(bump.physical()) {
            *t += v;
        }
    }
    let field = SpectralField::from_physical(grid, total);
    let l2 = sobolev_norm(&field, 0.0);
    Ok(PathologicalData {
        field,
        bumps: records,
        margins,
        l2_additivity_defect: (l2 * l2 - sum_sq).abs() / (l2 * l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, 1024).unwrap()
    }

    #[test]
    fn single_bump_matches_profile_data() {
        let regime = RegimeSettings::default();
        let spec = PathologicalDataSpec {
            k_first: 2,
            k_last: 2,
            ..Default::default()
        };
        let data = build_pathological_data(&regime, &spec, grid()).unwrap();
        let direct = single_bump(&regime, &spec, 2, grid()).unwrap();
        assert_eq!(data.field.physical(), direct.physical());
        assert!(data.margins.is_empty());
    }

    #[test]
    fn disjoint_bumps_add_in_l2() {
        let data = build_pathological_data(&RegimeSettings::default(), &Default::default(), grid()).unwrap();
        assert!(data.l2_additivity_defect < 1e-12, "{}", data.l2_additivity_defect);
        let total = sobolev_norm(&data.field, 0.3);
        let sum: f64 = data.bumps.iter().map(|b| b.hs_norm).sum();
        assert!(total <= sum);
        assert_eq!(data.margins.len(), 3);
    }

    #[test]
    fn dropping_last_bump_removes_its_l2_share() {
        let regime = RegimeSettings::default();
        let full = build_pathological_data(&regime, &Default::default(), grid()).unwrap();
        let spec = PathologicalDataSpec {
            k_last: 2,
            ..Default::default()
        };
        let short = build_pathological_data(&regime, &spec, grid()).unwrap();
        let a = sobolev_norm(&full.field, 0.0).powi(2);
        let b = sobolev_norm(&short.field, 0.0).powi(2);
        let last = full.bump(3).unwrap().l2_norm.powi(2);
        assert!((a - b - last).abs() < 1e-10 * a);
    }

    #[test]
    fn overlapping_bumps_are_rejected() {
        let spec = PathologicalDataSpec {
            k_first: 5,
            k_last: 6,
            schedule: IndexSchedule::Geometric { n0: 0.2 },
        };
        let res = build_pathological_data(&RegimeSettings::default(), &spec, TorusGrid::new(1, 4096).unwrap());
        assert!(matches!(
            res,
            Err(Error::OverlapDetected {
                first: 5,
                second: 6,
                ..
            })
        ));
    }

    #[test]
    fn support_must_fit_its_ball() {
        let spec = PathologicalDataSpec {
            k_first: 3,
            k_last: 3,
            schedule: IndexSchedule::Geometric { n0: 1.0 },
        };
        let res = build_pathological_data(&RegimeSettings::default(), &spec, grid());
        assert!(matches!(res, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn double_exponential_schedule_values() {
        assert!((IndexSchedule::DoubleExponential.index(1) - 1f64.exp().exp()).abs() < 1e-12);
        assert_eq!(IndexSchedule::Geometric { n0: 4.0 }.index(3), 32.0);
    }
}
