//! Weighted `L^2` and Sobolev norms.

use crate::calculus::{dx, dx_row, dy};
use crate::field::Field;
use crate::grid::{weight, Grid};

/// `|| (1 + y)^ell_eff f ||_{L^2}` over the strip.
pub fn weighted_norm(f: &Field, grid: &Grid, ell_eff: f64) -> f64 {
    weighted_norm_rows(f, grid, ell_eff, 0, grid.ny(), None)
}

/// Weighted norm restricted to rows `j_lo..j_hi` and, optionally, to nodes
/// where `mask` is true.
pub fn weighted_norm_rows(
    f: &Field,
    grid: &Grid,
    ell_eff: f64,
    j_lo: usize,
    j_hi: usize,
    mask: Option<&[bool]>,
) -> f64 {
    let ny = grid.ny();
    let w: alloc::vec::Vec<f64> = (0..ny).map(|j| weight(grid.y(j), 2.0 * ell_eff)).collect();
    let mut total = 0.0;
    for i in 0..grid.nx() {
        let col = f.column(i);
        let mut s = 0.0;
        for j in j_lo..j_hi {
            if let Some(m) = mask {
                if !m[i * ny + j] {
                    continue;
                }
            }
            s += grid.y_trapezoid_weight(j) * w[j] * col[j] * col[j];
        }
        total += s;
    }
    libm::sqrt(total * grid.hx() * grid.hy())
}

/// `sum_{a_x + sigma <= k} || (1 + y)^(ell + sigma) d_x^a_x d_y^sigma f ||`
/// (spatial derivatives only).
pub fn weighted_sobolev_norm(f: &Field, grid: &Grid, ell: f64, k: usize) -> f64 {
    let mut total = 0.0;
    for sigma in 0..=k {
        let fy = dy(f, grid, sigma);
        for a_x in 0..=(k - sigma) {
            let g = if a_x == 0 { fy.clone() } else { dx(&fy, grid, a_x) };
            total += weighted_norm(&g, grid, ell + sigma as f64);
        }
    }
    total
}

/// `H^k` norm of a periodic x-array.
pub fn trace_sobolev_norm(row: &[f64], grid: &Grid, k: usize) -> f64 {
    let mut total = 0.0;
    for b in 0..=k {
        let d = if b == 0 { row.to_vec() } else { dx_row(row, grid.hx(), b) };
        total += d.iter().map(|v| v * v).sum::<f64>() * grid.hx();
    }
    libm::sqrt(total)
}

/// Plain `L^2` norm of a wall-row array.
pub fn row_l2(row: &[f64], grid: &Grid) -> f64 {
    libm::sqrt(row.iter().map(|v| v * v).sum::<f64>() * grid.hx())
}
