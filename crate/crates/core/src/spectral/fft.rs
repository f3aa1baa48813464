//! Multi-dimensional complex FFTs on row-major buffers.
//!
//! Plans are shared process-wide; lookups go through a mutex-guarded cache so
//! concurrent sweeps can reuse them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::spectral::grid::TorusGrid;

/// Lines gathered per strided pass.
const BATCH: usize = 16;

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        })
    });
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let PlanCache { planner, plans } = &mut *guard;
    plans
        .entry((len, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// Physical samples to coefficients: `û_k = N^{-d} Σ_j u_j e^{-ik·x_j}`.
pub fn forward(grid: &TorusGrid, data: &mut [Complex64]) {
    transform(grid, data, true);
    let scale = 1.0 / grid.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Coefficients to physical samples: `u_j = Σ_k û_k e^{ik·x_j}`.
pub fn inverse(grid: &TorusGrid, data: &mut [Complex64]) {
    transform(grid, data, false);
}

fn transform(grid: &TorusGrid, data: &mut [Complex64], forward: bool) {
    let n = grid.points();
    assert_eq!(data.len(), grid.len(), "buffer does not match grid");
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for axis in 0..grid.dim() {
        let inner = n.pow((grid.dim() - 1 - axis) as u32);
        if inner == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = n * inner;
        let mut lines = vec![Complex64::default(); n * BATCH];
        for chunk in data.chunks_mut(block) {
            let mut start = 0;
            while start < inner {
                let width = BATCH.min(inner - start);
                for j in 0..n {
                    let row = &chunk[j * inner + start..j * inner + start + width];
                    for (b, v) in row.iter().enumerate() {
                        lines[b * n + j] = *v;
                    }
                }
                fft.process_with_scratch(&mut lines[..width * n], &mut scratch);
                for j in 0..n {
                    let row = &mut chunk[j * inner + start..j * inner + start + width];
                    for (b, v) in row.iter_mut().enumerate() {
                        *v = lines[b * n + j];
                    }
                }
                start += width;
            }
        }
    }
}
