use crate::error::{Error, Result};
use crate::experiments::{run_profile_bound_check, ExperimentReport, ProfileBoundOptions, RegimeSettings};
use crate::spectral::TorusGrid;

/// The profile-bound check with mollification at `εₙ²`. Entries whose
/// mollifier the grid cannot resolve are reported and skipped.
pub fn run_eps_squared_variant(
    regime: &RegimeSettings,
    n_list: &[f64],
    grid: TorusGrid,
    options: &ProfileBoundOptions,
) -> Result<ExperimentReport> {
    if regime.sigma < 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "mollification at eps_n^2 needs sigma >= 1 (got {})",
            regime.sigma
        )));
    }
    let options = ProfileBoundOptions {
        squared_epsilon: true,
        ..*options
    };
    run_profile_bound_check(regime, n_list, grid, &options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sigma_rejected() {
        let regime = RegimeSettings {
            s: 0.5,
            sigma: 0.9,
            ..Default::default()
        };
        let res = run_eps_squared_variant(&regime, &[4.0], TorusGrid::new(1, 4096).unwrap(), &Default::default());
        assert!(matches!(res, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn resolved_entries_measured_rest_skipped() {
        let regime = RegimeSettings {
            c_moll: 0.25,
            ..Default::default()
        };
        let rep = run_eps_squared_variant(
            &regime,
            &[4.0, 8.0],
            TorusGrid::new(1, 4096).unwrap(),
            &Default::default(),
        )
        .unwrap();
        let resolved = rep.column("resolved").unwrap();
        assert_eq!(resolved, vec![1.0, 0.0]);
        assert_eq!(rep.notes.len(), 1);
        assert!(rep.column("ratio1_lower").unwrap()[0] > 0.0);
    }
}
