use crate::error::{Error, Result};
use crate::profile::{BumpSpec, ProfileSolution};
use crate::regime::ParameterSchedule;
use crate::spectral::{SpectralField, TorusGrid};
use crate::wave::WaveState;

/// Cells the bump support diameter `2/n` must span.
pub const MIN_BUMP_CELLS: f64 = 2.0;

/// `κₙ n^{d/2−s} φ(n(x − center))`, the concentrated initial profile.
pub fn build_profile_data(schedule: &ParameterSchedule, grid: TorusGrid, center: [f64; 3]) -> Result<SpectralField> {
    let n = schedule.n;
    if !(n >= 2.0) {
        return Err(Error::InvalidIndex(n));
    }
    let cells = grid.cells(2.0 / n);
    if cells < MIN_BUMP_CELLS {
        return Err(Error::UnresolvableScale {
            what: "bump support diameter",
            cells,
            required: MIN_BUMP_CELLS,
        });
    }
    let amplitude = schedule.amplitude();
    let bump = BumpSpec;
    Ok(SpectralField::from_fn(grid, |x| {
        amplitude * bump.value(n * grid.distance_sq(x, &center).sqrt())
    }))
}

/// Pointwise ODE flow of `v0`: `a ↦ a·V(t|a|^σ)`.
pub fn evaluate_ode_profile(v0: &SpectralField, t: f64, profile: &ProfileSolution) -> SpectralField {
    let sigma = profile.sigma();
    v0.map_physical(|a| {
        if a == 0.0 {
            0.0
        } else {
            a * profile.value(t * a.abs().powf(sigma))
        }
    })
}

/// Position and velocity of the pointwise ODE flow, stamped at `t`.
pub fn evaluate_ode_profile_state(v0: &SpectralField, t: f64, profile: &ProfileSolution) -> WaveState {
    let sigma = profile.sigma();
    let grid = *v0.grid();
    let mut u = Vec::with_capacity(grid.len());
    let mut ut = Vec::with_capacity(grid.len());
    for &a in v0.physical() {
        if a == 0.0 {
            u.push(0.0);
            ut.push(0.0);
            continue;
        }
        let rate = a.abs().powf(sigma);
        let (v, dv) = profile.eval(t * rate);
        u.push(a * v);
        ut.push(a * rate * dv);
    }
    WaveState {
        u: SpectralField::from_physical(grid, u),
        ut: SpectralField::from_physical(grid, ut),
        time: t,
    }
}
