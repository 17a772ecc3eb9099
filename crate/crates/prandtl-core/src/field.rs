//! Scalar fields sampled on a [`Grid`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Values at the `nx * ny` nodes, stored column by column: node `(i, j)`
/// lives at `i * ny + j`, so each x-column is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self::filled(grid, 0.0)
    }

    pub fn zeros_like(other: &Field) -> Self {
        other.map(|_| 0.0)
    }

    pub fn filled(grid: &Grid, value: f64) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            let x = grid.x(i);
            for j in 0..grid.ny() {
                values.push(f(x, grid.y(j)));
            }
        }
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            values,
        }
    }

    /// Samples `f(i, j)` at every node.
    pub fn from_index_fn(grid: &Grid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                values.push(f(i, j));
            }
        }
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            values,
        }
    }

    /// Wraps raw column-major values; fails if the length is wrong.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: (grid.nx(), grid.ny()),
                found: (values.len() / grid.ny().max(1), grid.ny()),
            });
        }
        Ok(Self {
            nx: grid.nx(),
            ny: grid.ny(),
            values,
        })
    }

    /// Broadcasts an x-array along y.
    pub fn from_row(grid: &Grid, row: &[f64]) -> Self {
        Self::from_index_fn(grid, |i, _| row[i])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.ny + j] = v;
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.ny..(i + 1) * self.ny]
    }

    pub fn column_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.ny..(i + 1) * self.ny]
    }

    /// The x-array at row `j` (`j = 0` is the wall trace).
    pub fn row(&self, j: usize) -> Vec<f64> {
        (0..self.nx).map(|i| self.at(i, j)).collect()
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        if self.nx != grid.nx() || self.ny != grid.ny() {
            return Err(Error::ShapeMismatch {
                expected: (grid.nx(), grid.ny()),
                found: (self.nx, self.ny),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Self {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Field) -> Self {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &Field) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Field) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Position and value of the smallest entry.
    pub fn argmin(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for (k, &v) in self.values.iter().enumerate() {
            if v < best.2 {
                best = (k / self.ny, k % self.ny, v);
            }
        }
        best
    }
}
