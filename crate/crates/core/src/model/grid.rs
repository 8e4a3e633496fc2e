use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::species::{N_GAS, N_SOLID};

/// Number of differential states per cell: `C_s`, `C_a`, `U_s`, `U_a`.
pub const NX_CELL: usize = N_SOLID + N_GAS + 2;
/// Number of algebraic states per cell: `T_s`, `T_a`, `P`.
pub const NY_CELL: usize = 3;

pub const X_CS: usize = 0;
pub const X_CA: usize = N_SOLID;
pub const X_US: usize = N_SOLID + N_GAS;
pub const X_UA: usize = N_SOLID + N_GAS + 1;
pub const Y_TS: usize = 0;
pub const Y_TA: usize = 1;
pub const Y_P: usize = 2;

/// Axial and vertical discretization of the cooler.
///
/// Layer 0 is the bed and holds all solids; layers above it are gas-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub length: f64,
    pub height: f64,
    pub width: f64,
    pub n_v: usize,
    pub n_y: usize,
    /// Height of layer 0 when `n_y > 1`; ignored for a single layer.
    pub bed_layer_height: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let geo = |m: String| Err(ModelError::Geometry(m));
        if !(self.length > 0.0 && self.height > 0.0 && self.width > 0.0) {
            return geo("length, height and width must be positive".into());
        }
        if self.n_v == 0 || self.n_y == 0 {
            return geo("n_v and n_y must be at least 1".into());
        }
        if self.n_y > 1 && !(self.bed_layer_height > 0.0 && self.bed_layer_height < self.height) {
            return geo(format!("bed layer height {} m must lie in (0, {}) m", self.bed_layer_height, self.height));
        }
        Ok(())
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n_v as f64
    }

    pub fn layer_heights(&self) -> Vec<f64> {
        if self.n_y == 1 {
            return vec![self.height];
        }
        let upper = (self.height - self.bed_layer_height) / (self.n_y - 1) as f64;
        std::iter::once(self.bed_layer_height).chain(std::iter::repeat_n(upper, self.n_y - 1)).collect()
    }

    pub fn n_cells(&self) -> usize {
        self.n_v * self.n_y
    }

    /// Cell index of segment `k` and layer `j` (segment-major).
    pub fn cell(&self, k: usize, j: usize) -> usize {
        k * self.n_y + j
    }

    /// `(segment, layer)` of a cell index.
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.n_y, cell % self.n_y)
    }

    pub fn cell_volume(&self, j: usize) -> f64 {
        self.width * self.dz() * self.layer_heights()[j]
    }

    pub fn segment_volume(&self) -> f64 {
        self.width * self.height * self.dz()
    }

    /// Cells sharing a face with `cell`.
    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        let (k, j) = self.coords(cell);
        let mut out = Vec::with_capacity(4);
        if k > 0 {
            out.push(self.cell(k - 1, j));
        }
        if k + 1 < self.n_v {
            out.push(self.cell(k + 1, j));
        }
        if j > 0 {
            out.push(self.cell(k, j - 1));
        }
        if j + 1 < self.n_y {
            out.push(self.cell(k, j + 1));
        }
        out
    }

    /// Distance-2 coloring of the five-point stencil: no two cells of one
    /// color share a face or a neighbor.
    pub fn colors(&self) -> Vec<usize> {
        (0..self.n_cells())
            .map(|c| {
                let (k, j) = self.coords(c);
                (k + 2 * j) % 5
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_y: usize) -> GridSpec {
        GridSpec { length: 36.0, height: 3.0, width: 4.0, n_v: 10, n_y, bed_layer_height: 0.6 }
    }

    #[test]
    fn layers_sum_to_height() {
        for n_y in 1..5 {
            let g = grid(n_y);
            g.validate().unwrap();
            let sum: f64 = g.layer_heights().iter().sum();
            assert!((sum - 3.0).abs() < 1e-14);
            let vol: f64 = (0..n_y).map(|j| g.cell_volume(j)).sum();
            assert!((vol - g.segment_volume()).abs() < 1e-12);
        }
    }

    #[test]
    fn indexing_round_trips() {
        let g = grid(2);
        for c in 0..g.n_cells() {
            let (k, j) = g.coords(c);
            assert_eq!(g.cell(k, j), c);
        }
    }

    #[test]
    fn coloring_is_distance_two() {
        for n_y in 1..4 {
            let g = grid(n_y);
            let colors = g.colors();
            for c in 0..g.n_cells() {
                let mut hood = g.neighbors(c);
                hood.push(c);
                for (i, &a) in hood.iter().enumerate() {
                    for &b in &hood[i + 1..] {
                        assert_ne!(colors[a], colors[b], "cells {a} and {b} around {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut g = grid(2);
        g.bed_layer_height = 3.0;
        assert!(g.validate().is_err());
        g.n_y = 1;
        assert!(g.validate().is_ok());
        g.n_v = 0;
        assert!(g.validate().is_err());
    }
}
