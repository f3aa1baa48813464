//! Strang splitting for `∂ₜ²u − Δu + |u|^{2σ}u = 0`.
//!
//! The pair `(u, ∂ₜu)` is packed as `Z = û + i·∂ₜû`, so one complex inverse
//! transform yields both fields in physical space. Each step is
//! `L(dt/2) K(dt) L(dt/2)`: `L` is the free wave flow, rotating every mode
//! exactly, and `K` is the exact flow of `∂ₜu = 0, ∂ₜ(∂ₜu) = −|u|^{2σ}u`,
//! the kick `∂ₜu ← ∂ₜu − dt·|u|^{2σ}u` at each grid point.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate_adaptive, PowerForce};
use crate::spectral::fft;
use crate::spectral::grid::TorusGrid;
use crate::spectral::sobolev::shell_table;
use crate::spectral::SpectralField;
use crate::wave::state::WaveState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest step.
    pub dt: f64,
    /// `σ`; zero switches the nonlinearity off.
    pub sigma: f64,
    /// Only Strang (second order) is implemented.
    pub splitting_order: u32,
    /// Physical grid is this factor finer than the spectral one during the kick.
    pub dealias_padding: f64,
    /// Bound on `dt·‖u‖_{L^∞}^σ`; `None` keeps `dt` fixed.
    pub max_phase: Option<f64>,
    /// Sup-norm threshold for [`Error::BlowupDetected`]; `None` uses
    /// `10³·max(1, ‖u₀‖_{L^∞})`.
    pub blowup_guard: Option<f64>,
    /// Observers are called every this many steps (and at both ends).
    pub observer_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            sigma: 1.0,
            splitting_order: 2,
            dealias_padding: 1.5,
            max_phase: Some(0.1),
            blowup_guard: None,
            observer_stride: 1,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, sigma: f64) -> Self {
        Self {
            dt,
            sigma,
            ..Self::default()
        }
    }

    pub fn fixed_step(mut self) -> Self {
        self.max_phase = None;
        self
    }

    pub fn with_padding(mut self, padding: f64) -> Self {
        self.dealias_padding = padding;
        self
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.blowup_guard = Some(guard);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.observer_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            problems.push(format!("sigma must be non-negative (got {})", self.sigma));
        }
        if self.splitting_order != 2 {
            problems.push(format!(
                "only splitting order 2 is available (got {})",
                self.splitting_order
            ));
        }
        if !(self.dealias_padding >= 1.0 && self.dealias_padding <= 4.0) {
            problems.push(format!(
                "dealias padding must lie in [1, 4] (got {})",
                self.dealias_padding
            ));
        }
        if let Some(p) = self.max_phase {
            if !(p > 0.0) {
                problems.push(format!("max phase must be positive (got {p})"));
            }
        }
        if self.observer_stride == 0 {
            problems.push("observer stride must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    /// Grid size used for the pointwise stage.
    pub fn padded_points(&self, points: usize) -> usize {
        let m = (self.dealias_padding * points as f64 - 1e-9).ceil() as usize;
        m.max(points).next_multiple_of(2)
    }
}

/// Read-only view of the solver at a step boundary.
pub struct Snapshot<'a> {
    grid: TorusGrid,
    packed: &'a [Complex64],
    time: f64,
    step: usize,
}

impl Snapshot<'_> {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Coefficients of `u`.
    pub fn displacement_coefficients(&self) -> Vec<Complex64> {
        let (u, _) = unpack(&self.grid, self.packed);
        u
    }

    /// `‖u‖_{H^s}` at this instant.
    pub fn displacement_norm(&self, s: f64) -> f64 {
        let table = shell_table(&self.grid, |k2| (1.0 + k2).powf(s));
        let mut sum = 0.0;
        for_each_pair(&self.grid, |i, m, k2| {
            let (a, _) = split(self.packed[i], self.packed[m]);
            let w = table[k2] * a.norm_sqr();
            sum += if i == m { w } else { 2.0 * w };
        });
        sum.sqrt()
    }

    /// The full state as fields.
    pub fn state(&self) -> WaveState {
        let (u, ut) = unpack(&self.grid, self.packed);
        WaveState {
            u: SpectralField::from_spectral(self.grid, u),
            ut: SpectralField::from_spectral(self.grid, ut),
            time: self.time,
        }
    }
}

/// Receives snapshots during [`evolve`].
pub trait Observer {
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> Result<()>;
}

impl<F: FnMut(&Snapshot<'_>) -> Result<()>> Observer for F {
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> Result<()> {
        self(snapshot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    /// `‖u‖_{L^∞}` on the padded grid after the nonlinear stage.
    pub sup_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: WaveState,
    pub steps: usize,
    pub trajectory: Vec<TrajectorySample>,
}

/// Evolves `initial` by `horizon`.
pub fn evolve(
    initial: &WaveState,
    horizon: f64,
    config: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Evolution> {
    config.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be non-negative (got {horizon})"
        )));
    }
    let grid = *initial.grid();
    if initial.ut.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let padded = grid.with_points(config.padded_points(grid.points()))?;
    let padding = if padded.points() == grid.points() {
        None
    } else {
        Some(Padding::new(&grid, &padded))
    };

    let mut z: Vec<Complex64> = initial
        .u
        .spectral()
        .iter()
        .zip(initial.ut.spectral())
        .map(|(a, b)| a + Complex64::i() * b)
        .collect();
    let mut work = vec![Complex64::default(); padded.len()];

    let sup0 = initial.u.sup_norm();
    let guard = config.blowup_guard.unwrap_or(1e3 * sup0.max(1.0));
    let force = PowerForce::new(config.sigma);
    let linear_only = config.sigma == 0.0;

    let mut rotation = RotationTable::default();
    let mut time = initial.time;
    let end = initial.time + horizon;
    let mut step = 0;
    let mut sup = sup0;
    let mut trajectory = Vec::new();

    notify(observers, &grid, &z, time, step)?;
    // fixed mode: equal steps that land on the horizon
    let fixed_dt = horizon / (horizon / config.dt).ceil().max(1.0);
    while end - time > 1e-14 * horizon.max(1.0) {
        let mut dt = match config.max_phase {
            Some(phase) if !linear_only && sup > 0.0 => config.dt.min(phase / sup.powf(config.sigma)),
            Some(_) => config.dt,
            None => fixed_dt,
        };
        if time + dt > end || (config.max_phase.is_some() && end - (time + dt) < 1e-3 * dt) {
            dt = end - time;
        }

        rotation.prepare(&grid, 0.5 * dt);
        rotation.apply(&grid, &mut z);
        if !linear_only {
            match &padding {
                Some(p) => p.spread(&z, &mut work),
                None => work.copy_from_slice(&z),
            }
            fft::inverse(&padded, &mut work);
            sup = kick(&mut work, force, dt, time)?;
            fft::forward(&padded, &mut work);
            match &padding {
                Some(p) => p.gather(&work, &mut z),
                None => z.copy_from_slice(&work),
            }
        }
        rotation.apply(&grid, &mut z);

        step += 1;
        time += dt;
        if linear_only {
            sup = f64::NAN;
        }
        trajectory.push(TrajectorySample {
            step,
            time,
            dt,
            sup_norm: sup,
        });
        if !linear_only && sup > guard {
            return Err(Error::BlowupDetected {
                time,
                sup_norm: sup,
                guard,
            });
        }
        let last = end - time <= 1e-14 * horizon.max(1.0);
        if step % config.observer_stride == 0 || last {
            notify(observers, &grid, &z, time, step)?;
        }
    }
    if z.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite(time));
    }
    let (u, ut) = unpack(&grid, &z);
    drop(z);
    drop(work);
    Ok(Evolution {
        state: WaveState {
            u: SpectralField::from_spectral(grid, u),
            ut: SpectralField::from_spectral(grid, ut),
            time: end,
        },
        steps: step,
        trajectory,
    })
}

fn notify(
    observers: &mut [&mut dyn Observer],
    grid: &TorusGrid,
    z: &[Complex64],
    time: f64,
    step: usize,
) -> Result<()> {
    if observers.is_empty() {
        return Ok(());
    }
    let snap = Snapshot {
        grid: *grid,
        packed: z,
        time,
        step,
    };
    for obs in observers.iter_mut() {
        obs.observe(&snap)?;
    }
    Ok(())
}

/// Applies the nonlinear kick to packed physical values; returns `‖u‖_{L^∞}`.
fn kick(values: &mut [Complex64], force: PowerForce, dt: f64, time: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for v in values.iter_mut() {
        sup = sup.max(v.re.abs());
        v.im += dt * force.eval(v.re);
    }
    if !sup.is_finite() {
        return Err(Error::NonFinite(time));
    }
    Ok(sup)
}

#[inline]
fn point_flow(force: PowerForce, sigma: f64, a: f64, b: f64, dt: f64, tol: f64) -> Option<(f64, f64)> {
    if a == 0.0 && b == 0.0 {
        return Some((0.0, 0.0));
    }
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    let out = integrate_adaptive(sigma, force, [a, b], dt, tol)?;
    Some((out.state[0], out.state[1]))
}

/// Exact flow of `∂ₜ²u = −|u|^{2σ}u` at every grid point for time `dt`.
pub fn nonlinear_pointwise_step(state: &WaveState, dt: f64, sigma: f64) -> Result<WaveState> {
    let grid = *state.grid();
    let mut u = Vec::with_capacity(grid.len());
    let mut ut = Vec::with_capacity(grid.len());
    if sigma == 0.0 {
        return Ok(WaveState {
            time: state.time + dt,
            ..state.clone()
        });
    }
    let force = PowerForce::new(sigma);
    for (&a, &b) in state.u.physical().iter().zip(state.ut.physical()) {
        let (na, nb) = point_flow(force, sigma, a, b, dt, 1e-13).ok_or(Error::NonFinite(state.time))?;
        u.push(na);
        ut.push(nb);
    }
    Ok(WaveState {
        u: SpectralField::from_physical(grid, u),
        ut: SpectralField::from_physical(grid, ut),
        time: state.time + dt,
    })
}

/// `(û_k, ∂ₜû_k)` from the packed coefficients at `k` and `−k`.
#[inline]
fn split(zk: Complex64, zm: Complex64) -> (Complex64, Complex64) {
    let zc = zm.conj();
    let a = (zk + zc) * 0.5;
    // (zk − zc)/(2i)
    let d = zk - zc;
    let b = Complex64::new(0.5 * d.im, -0.5 * d.re);
    (a, b)
}

fn unpack(grid: &TorusGrid, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut u = vec![Complex64::default(); z.len()];
    let mut ut = vec![Complex64::default(); z.len()];
    for_each_pair(grid, |i, m, _| {
        let (a, b) = split(z[i], z[m]);
        u[i] = a;
        ut[i] = b;
        u[m] = a.conj();
        ut[m] = b.conj();
    });
    (u, ut)
}

/// Visits each pair `{k, −k}` once as `(flat k, flat −k, |k|²)`.
fn for_each_pair(grid: &TorusGrid, mut f: impl FnMut(usize, usize, usize)) {
    let n = grid.points();
    let d = grid.dim();
    let extent = |axis: usize| if axis + d >= 3 { n } else { 1 };
    let (n0, n1, n2) = (extent(0), extent(1), extent(2));
    let mirror = |j: usize, len: usize| if j == 0 { 0 } else { len - j };
    let wave = |j: usize, len: usize| -> i64 {
        if j <= len / 2 {
            j as i64
        } else {
            j as i64 - len as i64
        }
    };
    for j0 in 0..n0 {
        let (m0, k0) = (mirror(j0, n0), wave(j0, n0));
        for j1 in 0..n1 {
            let (m1, k1) = (mirror(j1, n1), wave(j1, n1));
            let base = (j0 * n1 + j1) * n2;
            let mbase = (m0 * n1 + m1) * n2;
            let k01 = (k0 * k0 + k1 * k1) as usize;
            for j2 in 0..n2 {
                let i = base + j2;
                let m = mbase + mirror(j2, n2);
                if i > m {
                    continue;
                }
                let k2 = wave(j2, n2);
                f(i, m, k01 + (k2 * k2) as usize);
            }
        }
    }
}

/// Per-shell `(cos ωt, sin ωt / ω, ω sin ωt)` for the current half step.
#[derive(Default)]
struct RotationTable {
    t: f64,
    table: Vec<(f64, f64, f64)>,
}

impl RotationTable {
    fn prepare(&mut self, grid: &TorusGrid, t: f64) {
        if !self.table.is_empty() && self.t == t {
            return;
        }
        self.t = t;
        let len = grid.max_wavenumber_sq() + 1;
        self.table = (0..len)
            .map(|k2| {
                let omega = (k2 as f64).sqrt();
                if k2 == 0 {
                    (1.0, t, 0.0)
                } else {
                    let (s, c) = (omega * t).sin_cos();
                    (c, s / omega, omega * s)
                }
            })
            .collect();
    }

    fn apply(&self, grid: &TorusGrid, z: &mut [Complex64]) {
        let i_unit = Complex64::i();
        for_each_pair(grid, |i, m, k2| {
            let (a, b) = split(z[i], z[m]);
            let (c, s_over, s_times) = self.table[k2];
            let na = a * c + b * s_over;
            let nb = b * c - a * s_times;
            z[i] = na + i_unit * nb;
            if i != m {
                z[m] = na.conj() + i_unit * nb.conj();
            }
        });
    }
}

/// Zero-padding between the spectral grid and the finer physical grid. A
/// Nyquist coefficient is shared equally between `±N/2`; gathering sums the
/// two back.
struct Padding {
    coarse: TorusGrid,
    fine: TorusGrid,
    /// Per coarse axis index: fine indices and weights.
    targets: Vec<Vec<(usize, f64)>>,
}

impl Padding {
    fn new(coarse: &TorusGrid, fine: &TorusGrid) -> Self {
        let n = coarse.points();
        let m = fine.points();
        let targets = (0..n)
            .map(|j| {
                let k = coarse.wavenumber(j);
                let place = |k: i64| if k >= 0 { k as usize } else { (m as i64 + k) as usize };
                if j == n / 2 {
                    vec![(place(k), 0.5), (place(-k), 0.5)]
                } else {
                    vec![(place(k), 1.0)]
                }
            })
            .collect();
        Self {
            coarse: *coarse,
            fine: *fine,
            targets,
        }
    }

    fn axes(&self) -> ([usize; 3], [usize; 3]) {
        let d = self.coarse.dim();
        let (n, m) = (self.coarse.points(), self.fine.points());
        let mut cn = [1; 3];
        let mut fm = [1; 3];
        for a in 3 - d..3 {
            cn[a] = n;
            fm[a] = m;
        }
        (cn, fm)
    }

    fn axis_targets(&self, axis_len: usize, j: usize) -> &[(usize, f64)] {
        const UNIT: &[(usize, f64)] = &[(0, 1.0)];
        if axis_len == 1 {
            UNIT
        } else {
            &self.targets[j]
        }
    }

    fn spread(&self, coarse: &[Complex64], fine: &mut [Complex64]) {
        fine.iter_mut().for_each(|v| *v = Complex64::default());
        let (cn, fm) = self.axes();
        for j0 in 0..cn[0] {
            for j1 in 0..cn[1] {
                for j2 in 0..cn[2] {
                    let v = coarse[(j0 * cn[1] + j1) * cn[2] + j2];
                    for &(f0, w0) in self.axis_targets(cn[0], j0) {
                        for &(f1, w1) in self.axis_targets(cn[1], j1) {
                            for &(f2, w2) in self.axis_targets(cn[2], j2) {
                                fine[(f0 * fm[1] + f1) * fm[2] + f2] += v * (w0 * w1 * w2);
                            }
                        }
                    }
                }
            }
        }
    }

    fn gather(&self, fine: &[Complex64], coarse: &mut [Complex64]) {
        let (cn, fm) = self.axes();
        for j0 in 0..cn[0] {
            for j1 in 0..cn[1] {
                for j2 in 0..cn[2] {
                    let mut acc = Complex64::default();
                    for &(f0, _) in self.axis_targets(cn[0], j0) {
                        for &(f1, _) in self.axis_targets(cn[1], j1) {
                            for &(f2, _) in self.axis_targets(cn[2], j2) {
                                acc += fine[(f0 * fm[1] + f1) * fm[2] + f2];
                            }
                        }
                    }
                    coarse[(j0 * cn[1] + j1) * cn[2] + j2] = acc;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{dopri_fixed, oscillator_energy};
    use crate::profile::solve_profile;
    use crate::spectral::apply_linear_propagator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_state(grid: TorusGrid, seed: u64) -> WaveState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for _ in 0..6 {
            let k: [f64; 3] = [
                rng.gen_range(-2..=2) as f64,
                rng.gen_range(-2..=2) as f64,
                rng.gen_range(-2..=2) as f64,
            ];
            terms.push((
                k,
                rng.gen_range(-0.3..0.3),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-0.3..0.3),
            ));
        }
        let eval = |x: &[f64; 3], vel: bool| {
            terms
                .iter()
                .map(|(k, a, ph, b)| {
                    let arg = k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph;
                    if vel {
                        b * arg.sin()
                    } else {
                        a * arg.cos()
                    }
                })
                .sum::<f64>()
        };
        WaveState::new(
            SpectralField::from_fn(grid, |x| 0.5 + eval(x, false)),
            SpectralField::from_fn(grid, |x| eval(x, true)),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let out = evolve(&WaveState::zeros(grid), 0.5, &SolverConfig::new(0.05, 1.0), &mut []).unwrap();
        assert!(out.state.u.physical().iter().all(|&v| v == 0.0));
        assert!(out.state.ut.physical().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_mode_matches_propagator() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let st = smooth_state(grid, 3);
        let out = evolve(&st, 1.0, &SolverConfig::new(0.1, 0.0), &mut []).unwrap();
        let exact = apply_linear_propagator(&st, 1.0);
        assert!(out.state.max_abs_diff(&exact) < 1e-12);
        assert!((out.state.time - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_data_follows_the_profile() {
        let p = solve_profile(1.0, 1e-10).unwrap();
        let grid = TorusGrid::new(1, 8).unwrap();
        let a = 1.6;
        let st = WaveState::at_rest(SpectralField::constant(grid, a));
        let want = a * p.value(a);
        let err = |dt: f64| {
            let out = evolve(&st, 1.0, &SolverConfig::new(dt, 1.0).fixed_step(), &mut []).unwrap();
            let spread = out
                .state
                .u
                .physical()
                .iter()
                .fold(0.0f64, |m, v| m.max((v - out.state.u.physical()[0]).abs()));
            assert!(spread < 1e-11, "{spread}");
            (out.state.u.physical()[0] - want).abs()
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e2 < 1e-6, "{e2}");
        assert!((3.4..=4.6).contains(&(e1 / e2)), "{}", e1 / e2);
    }

    #[test]
    fn pointwise_step_examples() {
        let p = solve_profile(1.0, 1e-10).unwrap();
        let grid = TorusGrid::new(1, 8).unwrap();
        let st = WaveState::at_rest(SpectralField::constant(grid, 1.0));
        let out = nonlinear_pointwise_step(&st, 0.3, 1.0).unwrap();
        let (v, dv) = p.eval(0.3);
        assert!((out.u.physical()[0] - v).abs() < 1e-11);
        assert!((out.ut.physical()[0] - dv).abs() < 1e-11);

        let z = nonlinear_pointwise_step(&WaveState::zeros(grid), 0.3, 1.5).unwrap();
        assert!(z.u.physical().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pointwise_step_against_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = TorusGrid::new(1, 16).unwrap();
        for sigma in [0.5, 1.0, 1.5, 2.0] {
            let u: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ut: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let st = WaveState::new(
                SpectralField::from_physical(grid, u.clone()),
                SpectralField::from_physical(grid, ut.clone()),
                0.0,
            )
            .unwrap();
            let out = nonlinear_pointwise_step(&st, 0.01, sigma).unwrap();
            let force = PowerForce::new(sigma);
            for j in 0..16 {
                // Richardson-refined tiny-step reference
                let coarse = dopri_fixed(force, [u[j], ut[j]], 0.01, 50);
                let fine = dopri_fixed(force, [u[j], ut[j]], 0.01, 100);
                let refined = [
                    fine[0] + (fine[0] - coarse[0]) / 31.0,
                    fine[1] + (fine[1] - coarse[1]) / 31.0,
                ];
                assert!((out.u.physical()[j] - refined[0]).abs() < 1e-9);
                assert!((out.ut.physical()[j] - refined[1]).abs() < 1e-9);
                let e0 = oscillator_energy(sigma, u[j], ut[j]);
                let e1 = oscillator_energy(sigma, out.u.physical()[j], out.ut.physical()[j]);
                assert!((e1 - e0).abs() < 1e-10 * e0.max(1.0));
            }
        }
    }

    #[test]
    fn time_reversal() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let st = smooth_state(grid, 5);
        let cfg = SolverConfig::new(0.02, 1.0).fixed_step();
        let fwd = evolve(&st, 0.6, &cfg, &mut []).unwrap();
        let back = evolve(&fwd.state.reversed(), 0.6, &cfg, &mut []).unwrap();
        let ret = back.state.reversed();
        assert!(ret.max_abs_diff(&st) < 1e-9, "{}", ret.max_abs_diff(&st));
    }

    #[test]
    fn second_order_in_time() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let st = smooth_state(grid, 9);
        let run = |dt: f64| {
            evolve(&st, 0.5, &SolverConfig::new(dt, 1.0).fixed_step(), &mut [])
                .unwrap()
                .state
        };
        let reference = run(0.5 / 1024.0);
        let e1 = run(0.5 / 16.0).max_abs_diff(&reference);
        let e2 = run(0.5 / 32.0).max_abs_diff(&reference);
        let ratio = e1 / e2;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn observers_see_every_stride() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let st = smooth_state(grid, 1);
        let mut times = Vec::new();
        let mut norms = Vec::new();
        let mut obs = |s: &Snapshot<'_>| {
            times.push(s.time());
            let full = s.state();
            norms.push((s.displacement_norm(0.7), crate::spectral::sobolev_norm(&full.u, 0.7)));
            Ok(())
        };
        let cfg = SolverConfig::new(0.1, 1.0).fixed_step().with_stride(2);
        let out = evolve(&st, 1.0, &cfg, &mut [&mut obs]).unwrap();
        assert_eq!(out.steps, 10);
        assert_eq!(times.len(), 6);
        assert!((times[5] - 1.0).abs() < 1e-12);
        for (a, b) in norms {
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn padding_round_trip_is_identity() {
        for dim in 1..=3 {
            let grid = TorusGrid::new(dim, 8).unwrap();
            let fine = grid.with_points(12).unwrap();
            let pad = Padding::new(&grid, &fine);
            let st = smooth_state(grid, 2);
            let z: Vec<Complex64> =
                st.u.spectral()
                    .iter()
                    .zip(st.ut.spectral())
                    .map(|(a, b)| a + Complex64::i() * b)
                    .collect();
            let mut work = vec![Complex64::default(); fine.len()];
            pad.spread(&z, &mut work);
            // the padded field samples the same trigonometric polynomial
            let mut phys = work.clone();
            fft::inverse(&fine, &mut phys);
            for (j, x) in fine.nodes().enumerate().step_by(7) {
                let mut direct = Complex64::default();
                for k in grid.modes() {
                    let i = grid.flatten([
                        k[0].rem_euclid(8) as usize,
                        k[1].rem_euclid(8) as usize,
                        k[2].rem_euclid(8) as usize,
                    ]);
                    let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
                    // Nyquist modes are real cosines on the coarse grid
                    let nyq = k.iter().filter(|&&c| c == 4).count() as i32;
                    let basis = if nyq == 0 {
                        Complex64::from_polar(1.0, phase)
                    } else {
                        let mut b = Complex64::new(1.0, 0.0);
                        for (a, &c) in k.iter().enumerate().take(3) {
                            let xa = x[a];
                            b *= if c == 4 {
                                Complex64::new((4.0 * xa).cos(), 0.0)
                            } else {
                                Complex64::from_polar(1.0, c as f64 * xa)
                            };
                        }
                        b
                    };
                    direct += z[i] * basis;
                }
                assert!((phys[j] - direct).norm() < 1e-12, "dim {dim}");
            }
            let mut back = vec![Complex64::default(); grid.len()];
            pad.gather(&work, &mut back);
            for (a, b) in back.iter().zip(&z) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn blowup_guard_trips() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let st = smooth_state(grid, 4);
        let cfg = SolverConfig::new(0.01, 1.0).with_guard(1e-3);
        assert!(matches!(
            evolve(&st, 0.1, &cfg, &mut []),
            Err(Error::BlowupDetected { .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let mut cfg = SolverConfig::new(0.01, 1.0);
        cfg.dealias_padding = 0.5;
        assert!(matches!(
            evolve(&WaveState::zeros(grid), 0.1, &cfg, &mut []),
            Err(Error::InvalidArgument(_))
        ));
        assert!(evolve(&WaveState::zeros(grid), -1.0, &SolverConfig::default(), &mut []).is_err());
    }
}
