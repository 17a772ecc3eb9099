//! Residuals of the nonlinear equation, of the transformed `W` system and of
//! the `omega_y` system, evaluated on stored time levels.
//!
//! For a forced flow `u_t + u u_x + v u_y + p_x - u_yy = F` the residuals
//! reduce to `u_y d_y(d^alpha d_y^sigma F / u_y)` in the interior and to the
//! wall trace of `d^alpha d_y^sigma F` on the boundary, which is what the
//! tests check against.

use alloc::vec::Vec;

use crate::calculus::{
    dt_stencil, dx_row, dy, levels_for, mixed_derivative, tail_integral, time_derivative_of, FlowHistory, Target,
};
use crate::diagnostics::norms::{row_l2, weighted_norm_rows};
use crate::diagnostics::transform::{compute_w, curvature_ratio, inner_derivative, w_time_derivative, Probe};
use crate::error::{Error, Result};
use crate::euler::{pressure_gradient, EulerData};
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};
use crate::wall::Wall;

/// Weighted residual norms; `boundary` is `None` where no closed boundary
/// relation is available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPair {
    pub interior: f64,
    pub boundary: Option<f64>,
    pub masked: usize,
}

/// Pointwise residuals behind a [`ResidualPair`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFields {
    pub interior: Field,
    pub boundary: Option<Vec<f64>>,
    pub mask: Vec<bool>,
}

impl ResidualFields {
    /// Norms over rows `1..ny-1` with weight `(1 + y)^ell_eff`.
    pub fn norms(&self, grid: &Grid, ell_eff: f64) -> ResidualPair {
        ResidualPair {
            interior: weighted_norm_rows(&self.interior, grid, ell_eff, 1, grid.ny() - 1, Some(&self.mask)),
            boundary: self.boundary.as_ref().map(|b| row_l2(b, grid)),
            masked: self.mask.iter().filter(|m| !**m).count(),
        }
    }
}

/// `u_t + u u_x + v u_y + p_x - u_yy` at the latest level.
pub fn pde_residual(history: &FlowHistory, euler: &EulerData, grid: &Grid) -> Result<Field> {
    let probe = Probe::new(history, grid)?;
    let ut = dt_stencil(history, 1)?;
    let px = pressure_gradient(euler, history.t_last(), grid);
    let mut r = ut;
    r = r.add(&probe.u.mul(&probe.ux));
    r = r.add(&probe.v.mul(&probe.uy));
    r = r.add(&px);
    Ok(r.sub(&probe.uyy))
}

/// Derivative sources shared by the commutator sums.
struct Sources<'a, 'b> {
    history: &'a FlowHistory<'b>,
    euler: &'a EulerData,
    grid: &'a Grid,
}

impl Sources<'_, '_> {
    fn u(&self, idx: MultiIndex) -> Result<Field> {
        mixed_derivative(self.history, self.euler, self.grid, idx, Target::U)
    }
    fn dev(&self, idx: MultiIndex) -> Result<Field> {
        mixed_derivative(self.history, self.euler, self.grid, idx, Target::Deviation)
    }
    fn v(&self, idx: MultiIndex) -> Result<Field> {
        mixed_derivative(self.history, self.euler, self.grid, idx, Target::V)
    }
    fn uy(&self, idx: MultiIndex) -> Result<Field> {
        self.u(idx.plus_y())
    }
    /// Closed-form derivative of the outer flow; zero for any y-derivative.
    fn outer(&self, idx: MultiIndex) -> Result<Field> {
        if idx.sigma > 0 {
            return Ok(Field::zeros(self.grid));
        }
        Ok(self.euler.field(idx.a_t, idx.a_x, self.history.t_last(), self.grid))
    }
}

/// `sum_{0 != b <= gamma} C(gamma, b) d^b a * d^(gamma - b) [d_x] c`.
fn commutator(
    gamma: MultiIndex,
    shift_x: bool,
    a: impl Fn(MultiIndex) -> Result<Field>,
    c: impl Fn(MultiIndex) -> Result<Field>,
    grid: &Grid,
) -> Result<Field> {
    let mut out = Field::zeros(grid);
    for (b, coef) in gamma.proper_parts() {
        let rest = gamma.checked_sub(b).expect("sub-index");
        let rest = if shift_x { rest.plus_x() } else { rest };
        let term = a(b)?.mul(&c(rest)?);
        out.axpy(coef, &term);
    }
    Ok(out)
}

/// Levels the `W` residual for `idx` needs.
pub fn w_residual_levels(idx: MultiIndex) -> usize {
    levels_for(idx.a_t) + 2
}

/// Pointwise residuals of the `W_{alpha,sigma}` equation and its wall
/// relation at the latest level.
pub fn w_equation_residual_fields(
    history: &FlowHistory,
    euler: &EulerData,
    grid: &Grid,
    idx: MultiIndex,
    wall: Wall,
) -> Result<ResidualFields> {
    let need = w_residual_levels(idx);
    if history.len() < need {
        return Err(Error::HistoryTooShort {
            required: need,
            available: history.len(),
        });
    }
    let src = Sources { history, euler, grid };
    let p = Probe::new(history, grid)?;
    let uyt = p.uyt.clone().expect("history has at least two levels");
    let w = compute_w(history, euler, grid, idx)?.values;
    let wt = w_time_derivative(history, euler, grid, idx)?;
    let wx = crate::calculus::dx(&w, grid, 1);
    let wyy = dy(&w, grid, 2);
    let f = inner_derivative(history, euler, grid, idx)?;
    let g = p.over_uy(&f);

    // Q_1 = -u_yt/u_y - u u_yx/u_y - u_yyy/u_y + 2 r^2
    let q1 = {
        let a = p.over_uy(&uyt);
        let b = p.u.mul(&p.over_uy(&p.uyx));
        let c = p.over_uy(&p.uyyy);
        let r2 = p.r.mul(&p.r).scale(2.0);
        a.add(&b).add(&c).scale(-1.0).add(&r2)
    };
    let mut lhs = wt.add(&p.u.mul(&wx)).sub(&wyy).add(&q1.mul(&w));
    lhs = lhs.add(&p.transform(&g.mul(&uyt), grid));
    lhs = lhs.add(&p.u.mul(&p.transform(&g.mul(&p.uyx), grid)));
    lhs = lhs.sub(&p.transform(&g.mul(&p.uyyy), grid));

    let rhs = if idx.sigma == 0 {
        let cv = commutator(idx, false, |b| src.uy(b), |b| src.v(b), grid)?;
        let cu = commutator(idx, true, |b| src.u(b), |b| src.dev(b), grid)?;
        let cuu = commutator(idx, true, |b| src.dev(b), |b| src.outer(b), grid)?;
        let dev = src.dev(MultiIndex::ZERO)?;
        let ux_outer = src.outer(idx.plus_x())?;
        let mut rhs = p.transform(&cv, grid).add(&p.transform(&cu, grid)).add(&p.transform(&cuu, grid));
        rhs = rhs.add(&dev.mul(&p.transform(&ux_outer, grid)));
        rhs.scale(-1.0)
    } else {
        let cu = commutator(idx, true, |b| src.u(b), |b| src.u(b), grid)?;
        let cv = commutator(idx, false, |b| src.uy(b), |b| src.v(b), grid)?;
        p.transform(&cu, grid).add(&p.transform(&cv, grid)).scale(-1.0)
    };
    let interior = lhs.sub(&rhs);

    let boundary = match idx.sigma {
        0 => Some(wall_residual_sigma0(&src, &p, idx, wall, &w, &wt, &wx)?),
        1 => Some(wall_residual_sigma1(&src, &p, idx, &w)?),
        _ => None,
    };
    Ok(ResidualFields {
        interior,
        boundary,
        mask: p.mask.clone(),
    })
}

fn wall_residual_sigma0(
    src: &Sources,
    p: &Probe,
    idx: MultiIndex,
    wall: Wall,
    w: &Field,
    wt: &Field,
    wx: &Field,
) -> Result<Vec<f64>> {
    let grid = src.grid;
    let nx = grid.nx();
    let wy = dy(w, grid, 1);
    let t = src.history.t_last();
    let e = src.euler;
    let outer = |a_t: usize, a_x: usize| e.row(idx.a_t + a_t, idx.a_x + a_x, t, grid);
    let (au, aut, aux) = (outer(0, 0), outer(1, 0), outer(0, 1));
    let mut out = Vec::with_capacity(nx);
    match wall {
        Wall::Robin(beta) => {
            let rt = time_derivative_of(src.history, 1, 1, |h| curvature_ratio(h, grid))?.row(0);
            let r0 = p.r.row(0);
            let rx = dx_row(&r0, grid.hx(), 1);
            let cu = commutator(idx, true, |b| src.u(b), |b| src.dev(b), grid)?;
            let cuu = commutator(idx, true, |b| src.dev(b), |b| src.outer(b), grid)?;
            for i in 0..nx {
                let r = r0[i];
                let u = p.u.at(i, 0);
                let dev = u - e.value(t, grid.x(i));
                let s = p.uyyy.at(i, 0) / p.uy.at(i, 0);
                let d = beta - r;
                let q2 = (rt[i] + u * rx[i]) / d - s;
                let b_t = beta * aut[i] / d + beta * au[i] * rt[i] / (d * d);
                let b_x = beta * aux[i] / d + beta * au[i] * rx[i] / (d * d);
                let q3 = -dev * aux[i] + b_t + u * b_x - s * beta * au[i] / d;
                let wv = w.at(i, 0);
                let lhs = (wt.at(i, 0) + u * wx.at(i, 0)) / d - wy.at(i, 0) - r * wv + q2 * wv / d;
                let rhs = -cu.at(i, 0) - cuu.at(i, 0) + q3;
                out.push(lhs - rhs);
            }
        }
        Wall::Dirichlet => {
            let big_u = e.row(0, 0, t, grid);
            let cuu = commutator(idx, true, |b| src.outer(b), |b| src.outer(b), grid)?;
            for i in 0..nx {
                let s = p.uyyy.at(i, 0) / p.uy.at(i, 0);
                let lhs = -wy.at(i, 0) - p.r.at(i, 0) * w.at(i, 0);
                let rhs = aut[i] + big_u[i] * aux[i] + cuu.at(i, 0) - s * au[i];
                out.push(lhs - rhs);
            }
        }
    }
    Ok(out)
}

/// Wall relation for `sigma = 1`, valid for either wall condition since it
/// only uses `v = 0` on the wall.
fn wall_residual_sigma1(src: &Sources, p: &Probe, idx: MultiIndex, w1: &Field) -> Result<Vec<f64>> {
    let grid = src.grid;
    let base = MultiIndex::new(idx.a_t, idx.a_x, 0);
    let w0 = compute_w(src.history, src.euler, grid, base)?.values;
    let w_t = compute_w(src.history, src.euler, grid, base.plus_t())?.values;
    let w_x = compute_w(src.history, src.euler, grid, base.plus_x())?.values;
    let f = src.dev(base)?;
    let f_t = src.dev(base.plus_t())?;
    let f_x = src.dev(base.plus_x())?;
    let cu = commutator(base, true, |b| src.u(b), |b| src.uy(b), grid)?;
    let w1y = dy(w1, grid, 1);
    let mut out = Vec::with_capacity(grid.nx());
    for i in 0..grid.nx() {
        let r = p.r.at(i, 0);
        let s = p.uyyy.at(i, 0) / p.uy.at(i, 0);
        let u = p.u.at(i, 0);
        let lhs = w1y.at(i, 0) + r * w1.at(i, 0);
        let rhs = w_t.at(i, 0) + r * f_t.at(i, 0) + u * (w_x.at(i, 0) + r * f_x.at(i, 0))
            - (w0.at(i, 0) + r * f.at(i, 0)) * s
            + cu.at(i, 0);
        out.push(lhs - rhs);
    }
    Ok(out)
}

/// Weighted norms of the `W_{alpha,sigma}` residuals, weight `ell + sigma`.
pub fn w_equation_residual(
    history: &FlowHistory,
    euler: &EulerData,
    grid: &Grid,
    idx: MultiIndex,
    wall: Wall,
    ell: f64,
) -> Result<ResidualPair> {
    let fields = w_equation_residual_fields(history, euler, grid, idx, wall)?;
    Ok(fields.norms(grid, ell + idx.sigma as f64))
}

/// Residuals of the `omega_y` system plus the bound on the truncated tail.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaYResidual {
    pub fields: ResidualFields,
    /// `max_x |omega(x, y_max)|`: the part of `int_y^inf omega_y` cut off by
    /// the truncation.
    pub tail_bound: f64,
    /// Weighted norm of `omega_x(x, y) * omega(x, y_max)`, the residual
    /// contribution of the cut-off tail.
    pub tail_residual_bound: f64,
}

pub fn omega_y_residual_fields(
    history: &FlowHistory,
    grid: &Grid,
    ell: f64,
) -> Result<OmegaYResidual> {
    if history.len() < 2 {
        return Err(Error::HistoryTooShort {
            required: 2,
            available: history.len(),
        });
    }
    let p = Probe::new(history, grid)?;
    let wt = time_derivative_of(history, 1, 1, |h| Ok(dy(h.latest(), grid, 2)))?;
    let wtil = &p.uyy;
    let wx = crate::calculus::dx(wtil, grid, 1);
    let wyy = dy(&p.u, grid, 4);
    let omega_x = crate::calculus::dx(&p.uy, grid, 1);
    let tail = tail_integral(wtil, grid);
    let interior = wt
        .add(&p.u.mul(&wx))
        .add(&p.v.mul(&p.uyyy))
        .sub(&p.ux.mul(wtil))
        .sub(&omega_x.mul(&tail))
        .sub(&wyy);
    let uyt = p.uyt.as_ref().expect("two levels");
    let boundary: Vec<f64> = (0..grid.nx())
        .map(|i| p.uyyy.at(i, 0) - (uyt.at(i, 0) + p.u.at(i, 0) * p.uyx.at(i, 0)))
        .collect();
    let top = grid.ny() - 1;
    let omega_top = p.uy.row(top);
    let tail_bound = omega_top.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = Field::from_index_fn(grid, |i, j| omega_x.at(i, j) * omega_top[i]);
    let tail_residual_bound = weighted_norm_rows(&cut, grid, ell + 1.0, 1, grid.ny() - 1, None);
    let mask = crate::diagnostics::transform::full_mask(grid);
    Ok(OmegaYResidual {
        fields: ResidualFields {
            interior,
            boundary: Some(boundary),
            mask,
        },
        tail_bound,
        tail_residual_bound,
    })
}

/// Weighted norms of the `omega_y` residuals (weight `ell + 1`).
pub fn omega_y_residual(history: &FlowHistory, grid: &Grid, ell: f64) -> Result<(ResidualPair, f64)> {
    let r = omega_y_residual_fields(history, grid, ell)?;
    Ok((r.fields.norms(grid, ell + 1.0), r.tail_residual_bound))
}
