//! Fitted algebraic decay of the vorticity tail.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub theta_hat: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
}

/// Least-squares slope of `ln omega` against `ln(1 + y)` per column over the
/// window; `theta_hat` is minus the median slope and the constants are the
/// extremes of `omega (1 + y)^theta_hat` on the window.
pub fn decay_fit(omega: &Field, grid: &Grid, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    let y_max = grid.y_max();
    let slack = 1e-12 * y_max;
    if !(lo < hi) || lo < 0.25 * y_max - slack || hi > 0.75 * y_max + slack {
        return Err(invalid(
            "window",
            format!("[{lo}, {hi}] must lie inside [y_max/4, 3 y_max/4] = [{}, {}]", 0.25 * y_max, 0.75 * y_max),
        ));
    }
    let rows: Vec<usize> = (0..grid.ny())
        .filter(|&j| grid.y(j) >= lo - slack && grid.y(j) <= hi + slack)
        .collect();
    if rows.len() < 2 {
        return Err(invalid("window", "fewer than two nodes inside the window"));
    }
    let mut slopes = Vec::with_capacity(grid.nx());
    for i in 0..grid.nx() {
        let mut pts = Vec::with_capacity(rows.len());
        for &j in &rows {
            let w = omega.at(i, j);
            if !(w > 0.0) {
                return Err(Error::NonPositiveVorticity { i, j, value: w });
            }
            pts.push((libm::log(1.0 + grid.y(j)), libm::log(w)));
        }
        slopes.push(ls_slope(&pts));
    }
    slopes.sort_by(f64::total_cmp);
    let n = slopes.len();
    let median = if n % 2 == 1 {
        slopes[n / 2]
    } else {
        0.5 * (slopes[n / 2 - 1] + slopes[n / 2])
    };
    let theta_hat = -median;
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    for i in 0..grid.nx() {
        for &j in &rows {
            let s = omega.at(i, j) * libm::pow(1.0 + grid.y(j), theta_hat);
            c1 = c1.min(s);
            c2 = c2.max(s);
        }
    }
    Ok(DecayFit {
        theta_hat,
        c1_hat: c1,
        c2_hat: c2,
    })
}

/// Ordinary least-squares slope through `(x, y)` pairs.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
