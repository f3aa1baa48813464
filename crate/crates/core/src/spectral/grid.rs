use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the torus `[0, 2π)^dim` with `points` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
}

impl TorusGrid {
    pub const SIDE: f64 = 2.0 * PI;

    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be even and at least 8 (got {points})"
            )));
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of nodes, `N^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        Self::SIDE / self.points as f64
    }

    /// Volume of one grid cell, the trapezoid weight.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        Self::SIDE.powi(self.dim as i32)
    }

    /// Same geometry with a different resolution.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.dim, points)
    }

    /// Signed wavenumber of storage index `j` along one axis.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage index of the node/mode `-j` along one axis.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }

    /// Per-axis multi-index of a flat storage index (axis 0 is slowest).
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.points;
            flat /= self.points;
        }
        out
    }

    pub fn flatten(&self, index: [usize; 3]) -> usize {
        index[..self.dim].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Flat index of the mode `-k` given the flat index of `k`.
    pub fn mirror_flat(&self, flat: usize) -> usize {
        let mut idx = self.unflatten(flat);
        for i in idx.iter_mut().take(self.dim) {
            *i = self.mirror_index(*i);
        }
        self.flatten(idx)
    }

    /// Physical coordinates of a node (unused axes are zero).
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Iterator over all nodes in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Squared minimal-image distance between two points on the torus.
    pub fn distance_sq(&self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        (0..self.dim)
            .map(|a| {
                let d = wrap(x[a] - y[a]);
                d * d
            })
            .sum()
    }

    /// Minimal-image displacement `x - y` on the torus.
    pub fn displacement(&self, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for a in 0..self.dim {
            d[a] = wrap(x[a] - y[a]);
        }
        d
    }

    /// Iterator over the integer wave vectors in storage order.
    pub fn modes(&self) -> Modes {
        Modes {
            grid: *self,
            counter: [0; 3],
            remaining: self.len(),
        }
    }

    /// `|k|^2` for every mode in storage order.
    pub fn wavenumber_sq(&self) -> impl Iterator<Item = f64> {
        self.modes().map(|k| k_sq(&k))
    }

    /// Largest `|k|^2` present on the grid.
    pub fn max_wavenumber_sq(&self) -> usize {
        self.dim * (self.points / 2).pow(2)
    }

    /// Number of cells spanned by a physical length.
    pub fn cells(&self, length: f64) -> f64 {
        length / self.spacing()
    }
}

/// Squared norm of an integer wave vector.
pub fn k_sq(k: &[i64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
}

fn wrap(d: f64) -> f64 {
    let side = TorusGrid::SIDE;
    d - side * (d / side).round()
}

/// Odometer over the storage-ordered wave vectors of a grid.
pub struct Modes {
    grid: TorusGrid,
    counter: [usize; 3],
    remaining: usize,
}

impl Iterator for Modes {
    type Item = [i64; 3];

    fn next(&mut self) -> Option<[i64; 3]> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let dim = self.grid.dim;
        let mut k = [0i64; 3];
        for (a, slot) in k.iter_mut().enumerate().take(dim) {
            *slot = self.grid.wavenumber(self.counter[a]);
        }
        for a in (0..dim).rev() {
            self.counter[a] += 1;
            if self.counter[a] < self.grid.points {
                break;
            }
            self.counter[a] = 0;
        }
        Some(k)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Modes {}
