//! The transformed variables `W_{alpha,sigma}` and the cached base
//! quantities every residual needs.

use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::{dx, dy, levels_for, mixed_derivative, reconstruct_v, time_derivative_of, FlowHistory, Target};
use crate::error::Result;
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};

/// Relative floor below which `u_y` is treated as underflowed.
pub const U_Y_FLOOR: f64 = 1e-10;

/// Stencil reach used to dilate the mask around underflowed nodes.
const MASK_REACH: usize = 3;

/// Nodes where division by `u_y` is trusted: `u_y >= floor * max u_y`, away
/// from any underflowed node by more than a stencil width.
pub fn vorticity_mask(uy: &Field) -> Vec<bool> {
    let ny = uy.ny();
    let cut = U_Y_FLOOR * uy.max();
    let raw: Vec<bool> = uy.values().iter().map(|&w| w >= cut && w > 0.0).collect();
    let mut mask = raw.clone();
    for i in 0..uy.nx() {
        for j in 0..ny {
            if !raw[i * ny + j] {
                let lo = j.saturating_sub(MASK_REACH);
                let hi = (j + MASK_REACH + 1).min(ny);
                for jj in lo..hi {
                    mask[i * ny + jj] = false;
                }
            }
        }
    }
    mask
}

/// `a / b` at trusted nodes, zero elsewhere.
pub(crate) fn masked_div(a: &Field, b: &Field, mask: &[bool]) -> Field {
    let mut out = a.clone();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        *v = if mask[k] { *v / b.values()[k] } else { 0.0 };
    }
    out
}

pub(crate) fn apply_mask(f: &mut Field, mask: &[bool]) {
    for (v, &m) in f.values_mut().iter_mut().zip(mask) {
        if !m {
            *v = 0.0;
        }
    }
}

/// `u_y d_y (f / u_y)`, zeroed at masked nodes.
pub fn quotient_transform(f: &Field, uy: &Field, mask: &[bool], grid: &Grid) -> Field {
    let ratio = masked_div(f, uy, mask);
    let mut w = uy.mul(&dy(&ratio, grid, 1));
    apply_mask(&mut w, mask);
    w
}

/// A transformed variable together with its trust mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WField {
    pub idx: MultiIndex,
    pub values: Field,
    pub mask: Vec<bool>,
    /// Number of masked nodes.
    pub masked: usize,
}

/// The inner derivative `d^alpha d_y^sigma` of `u - U` (`sigma = 0`) or `u`.
pub fn inner_derivative(history: &FlowHistory, euler: &EulerData, grid: &Grid, idx: MultiIndex) -> Result<Field> {
    let target = if idx.sigma == 0 { Target::Deviation } else { Target::U };
    mixed_derivative(history, euler, grid, idx, target)
}

/// `W_{alpha,sigma}` at the latest level of the history.
pub fn compute_w(history: &FlowHistory, euler: &EulerData, grid: &Grid, idx: MultiIndex) -> Result<WField> {
    let uy = dy(history.latest(), grid, 1);
    let mask = vorticity_mask(&uy);
    let f = inner_derivative(history, euler, grid, idx)?;
    let values = quotient_transform(&f, &uy, &mask, grid);
    let masked = mask.iter().filter(|m| !**m).count();
    Ok(WField {
        idx,
        values,
        mask,
        masked,
    })
}

/// Time derivative of `W_{alpha,sigma}` at the latest level.
pub fn w_time_derivative(history: &FlowHistory, euler: &EulerData, grid: &Grid, idx: MultiIndex) -> Result<Field> {
    time_derivative_of(history, 1, levels_for(idx.a_t), |h| {
        compute_w(h, euler, grid, idx).map(|w| w.values)
    })
}

/// Base quantities of the latest level, computed once.
#[derive(Debug, Clone)]
pub struct Probe {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub ux: Field,
    pub uy: Field,
    pub uyy: Field,
    pub uyyy: Field,
    pub uyx: Field,
    /// `u_yt`; needs at least two levels.
    pub uyt: Option<Field>,
    /// `u_yy / u_y`
    pub r: Field,
    pub mask: Vec<bool>,
}

impl Probe {
    pub fn new(history: &FlowHistory, grid: &Grid) -> Result<Self> {
        let u = history.latest().clone();
        let uy = dy(&u, grid, 1);
        let uyy = dy(&u, grid, 2);
        let uyyy = dy(&u, grid, 3);
        let mask = vorticity_mask(&uy);
        let uyt = if history.len() >= 2 {
            Some(time_derivative_of(history, 1, 1, |h| Ok(dy(h.latest(), grid, 1)))?)
        } else {
            None
        };
        Ok(Self {
            t: history.t_last(),
            v: reconstruct_v(&u, grid),
            ux: dx(&u, grid, 1),
            uyx: dx(&uy, grid, 1),
            r: masked_div(&uyy, &uy, &mask),
            u,
            uy,
            uyy,
            uyyy,
            uyt,
            mask,
        })
    }

    pub fn masked(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// `a / u_y` at trusted nodes.
    pub fn over_uy(&self, a: &Field) -> Field {
        masked_div(a, &self.uy, &self.mask)
    }

    /// `u_y d_y (a / u_y)`
    pub fn transform(&self, a: &Field, grid: &Grid) -> Field {
        quotient_transform(a, &self.uy, &self.mask, grid)
    }
}

/// `u_yy / u_y` at the latest level of a history (masked).
pub(crate) fn curvature_ratio(history: &FlowHistory, grid: &Grid) -> Result<Field> {
    let uy = dy(history.latest(), grid, 1);
    let mask = vorticity_mask(&uy);
    Ok(masked_div(&dy(history.latest(), grid, 2), &uy, &mask))
}

/// All-true mask of the grid's size.
pub(crate) fn full_mask(grid: &Grid) -> Vec<bool> {
    vec![true; grid.len()]
}
