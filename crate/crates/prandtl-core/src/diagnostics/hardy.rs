//! Norm equivalence between `W_{alpha,sigma}` and `d^alpha d_y^sigma omega`.
//!
//! Since `W = d omega - d(u - U) u_yy/u_y`, a weighted Hardy inequality
//! bounds both norms by each other with
//! `c5 = (1 + 2 K / (2 ell - 1))^-1`, `K = sup |(1 + y) u_yy / u_y|`.

use crate::calculus::{dy, mixed_derivative, FlowHistory, Target};
use crate::diagnostics::norms::weighted_norm_rows;
use crate::diagnostics::transform::{compute_w, vorticity_mask};
use crate::error::Result;
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};

/// Relative size below which `W` counts as identically zero.
pub const DEGENERATE_RATIO: f64 = 1e-12;

/// Slack allowed around the bracket `[c5, 1/c5]`.
pub const BRACKET_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyCheck {
    pub idx: MultiIndex,
    pub w_norm: f64,
    pub omega_norm: f64,
    /// `||W|| / ||d omega||`
    pub w_over_omega: f64,
    /// `||d omega|| / ||W||`
    pub omega_over_w: f64,
    pub curvature_sup: f64,
    pub c5: f64,
    /// `W` vanishes relative to `d omega`; the ratios are then `(0, inf)`.
    pub degenerate: bool,
}

impl HardyCheck {
    /// Both ratios lie in `[c5 - slack, 1/c5 + slack]`.
    pub fn inside_bracket(&self) -> bool {
        let lo = self.c5 - BRACKET_SLACK;
        let hi = 1.0 / self.c5 + BRACKET_SLACK;
        !self.degenerate
            && (lo..=hi).contains(&self.w_over_omega)
            && (lo..=hi).contains(&self.omega_over_w)
    }
}

/// `sup |(1 + y) u_yy / u_y|` over trusted nodes.
pub fn curvature_sup(u: &Field, grid: &Grid) -> f64 {
    let uy = dy(u, grid, 1);
    let uyy = dy(u, grid, 2);
    let mask = vorticity_mask(&uy);
    let mut k: f64 = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            if mask[i * grid.ny() + j] {
                k = k.max(((1.0 + grid.y(j)) * uyy.at(i, j) / uy.at(i, j)).abs());
            }
        }
    }
    k
}

pub fn c5_from_curvature(ell: f64, curvature_sup: f64) -> f64 {
    1.0 / (1.0 + 2.0 * curvature_sup / (2.0 * ell - 1.0))
}

pub fn hardy_equivalence_check(
    history: &FlowHistory,
    euler: &EulerData,
    grid: &Grid,
    idx: MultiIndex,
    ell: f64,
) -> Result<HardyCheck> {
    let w = compute_w(history, euler, grid, idx)?;
    let d_omega = mixed_derivative(history, euler, grid, idx.plus_y(), Target::U)?;
    let ell_eff = ell + idx.sigma as f64;
    let ny = grid.ny();
    let w_norm = weighted_norm_rows(&w.values, grid, ell_eff, 0, ny, Some(&w.mask));
    let omega_norm = weighted_norm_rows(&d_omega, grid, ell_eff, 0, ny, Some(&w.mask));
    let k = curvature_sup(history.latest(), grid);
    let degenerate = w_norm <= DEGENERATE_RATIO * omega_norm;
    let (a, b) = if degenerate {
        (0.0, f64::INFINITY)
    } else {
        (w_norm / omega_norm, omega_norm / w_norm)
    };
    Ok(HardyCheck {
        idx,
        w_norm,
        omega_norm,
        w_over_omega: a,
        omega_over_w: b,
        curvature_sup: k,
        c5: c5_from_curvature(ell, k),
        degenerate,
    })
}

/// The two sides of `||(1+y)^(ell-1) f|| <= 2/(2 ell - 1) ||(1+y)^ell f_y||`
/// for `f` vanishing at infinity.
pub fn hardy_inequality_sides(f: &Field, grid: &Grid, ell: f64) -> (f64, f64) {
    let ny = grid.ny();
    let lhs = weighted_norm_rows(f, grid, ell - 1.0, 0, ny, None);
    let fy = dy(f, grid, 1);
    let rhs = 2.0 / (2.0 * ell - 1.0) * weighted_norm_rows(&fy, grid, ell, 0, ny, None);
    (lhs, rhs)
}
