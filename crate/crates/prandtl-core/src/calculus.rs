//! Finite-difference operators in x, y and t, and the vertical velocity.
//!
//! * x: centered second-order periodic difference, applied `order` times.
//! * y: direct second-order stencils for each derivative order, symmetric in
//!   the interior and one-sided (width `order + 2`) near the wall and the top.
//! * t: backward stencils over a [`FlowHistory`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};

/// Highest derivative order any stencil supports.
pub const MAX_ORDER: usize = 4;

/// Finite-difference weights for the `m`-th derivative at `z` using the given
/// nodes (Fornberg's recursion).
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|r| r[m]).collect()
}

/// Per-row y-stencils for one derivative order.
#[derive(Debug, Clone)]
pub struct YStencils {
    rows: Vec<(usize, Vec<f64>)>,
}

impl YStencils {
    pub fn new(ny: usize, hy: f64, order: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&order), "y-derivative order {order} unsupported");
        let sym_width = if order.is_multiple_of(2) { order + 1 } else { order + 2 };
        let radius = sym_width / 2;
        let side_width = order + 2;
        let scale = libm::pow(hy, -(order as f64));
        let mut rows = Vec::with_capacity(ny);
        for j in 0..ny {
            let (start, width) = if j >= radius && j + radius < ny {
                (j - radius, sym_width)
            } else if j < radius {
                (0, side_width)
            } else {
                (ny - side_width, side_width)
            };
            let nodes: Vec<f64> = (start..start + width).map(|k| k as f64).collect();
            let w = fd_weights(j as f64, &nodes, order)
                .into_iter()
                .map(|c| c * scale)
                .collect();
            rows.push((start, w));
        }
        Self { rows }
    }

    pub fn apply_column(&self, col: &[f64], out: &mut [f64]) {
        for (j, (start, w)) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for (k, c) in w.iter().enumerate() {
                s += c * col[start + k];
            }
            out[j] = s;
        }
    }

    /// Derivative at a single row.
    pub fn at(&self, col: &[f64], j: usize) -> f64 {
        let (start, w) = &self.rows[j];
        w.iter().enumerate().map(|(k, c)| c * col[start + k]).sum()
    }
}

fn check_order(order: usize) {
    assert!(order <= MAX_ORDER, "derivative order {order} exceeds {MAX_ORDER}");
}

/// Centered periodic x-derivative applied `order` times.
pub fn dx(f: &Field, grid: &Grid, order: usize) -> Field {
    check_order(order);
    let mut cur = f.clone();
    let nx = grid.nx();
    let inv = 0.5 / grid.hx();
    for _ in 0..order {
        let prev = cur.clone();
        for i in 0..nx {
            let ip = (i + 1) % nx;
            let im = (i + nx - 1) % nx;
            let (a, b) = (prev.column(ip), prev.column(im));
            for (o, (p, m)) in cur.column_mut(i).iter_mut().zip(a.iter().zip(b)) {
                *o = (p - m) * inv;
            }
        }
    }
    cur
}

/// Periodic x-derivative of a single row (e.g. a wall trace).
pub fn dx_row(row: &[f64], hx: f64, order: usize) -> Vec<f64> {
    check_order(order);
    let n = row.len();
    let mut cur = row.to_vec();
    for _ in 0..order {
        let prev = cur.clone();
        for i in 0..n {
            cur[i] = (prev[(i + 1) % n] - prev[(i + n - 1) % n]) * 0.5 / hx;
        }
    }
    cur
}

/// y-derivative of the given order with second-order stencils everywhere.
pub fn dy(f: &Field, grid: &Grid, order: usize) -> Field {
    check_order(order);
    if order == 0 {
        return f.clone();
    }
    let st = YStencils::new(grid.ny(), grid.hy(), order);
    let mut out = Field::zeros(grid);
    for i in 0..grid.nx() {
        let col = f.column(i).to_vec();
        st.apply_column(&col, out.column_mut(i));
    }
    out
}

/// `v(x, y) = -int_0^y u_x`, cumulative trapezoid from the wall; `v = 0` on
/// the wall exactly.
pub fn reconstruct_v(u: &Field, grid: &Grid) -> Field {
    let ux = dx(u, grid, 1);
    let half = 0.5 * grid.hy();
    let mut v = Field::zeros(grid);
    for i in 0..grid.nx() {
        let src = ux.column(i);
        let col = v.column_mut(i);
        col[0] = 0.0;
        for j in 1..src.len() {
            col[j] = col[j - 1] - half * (src[j - 1] + src[j]);
        }
    }
    v
}

/// `int_y^{y_max} f` by reverse cumulative trapezoid.
pub fn tail_integral(f: &Field, grid: &Grid) -> Field {
    let half = 0.5 * grid.hy();
    let mut out = Field::zeros(grid);
    let ny = grid.ny();
    for i in 0..grid.nx() {
        let src = f.column(i);
        let col = out.column_mut(i);
        col[ny - 1] = 0.0;
        for j in (0..ny - 1).rev() {
            col[j] = col[j + 1] + half * (src[j] + src[j + 1]);
        }
    }
    out
}

/// A window of consecutive time levels, oldest first, spaced by `dt`.
#[derive(Debug, Clone, Copy)]
pub struct FlowHistory<'a> {
    levels: &'a [Field],
    t_last: f64,
    dt: f64,
}

impl<'a> FlowHistory<'a> {
    pub fn new(levels: &'a [Field], t_last: f64, dt: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::HistoryTooShort {
                required: 1,
                available: 0,
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(crate::error::invalid("dt", "history spacing must be positive"));
        }
        Ok(Self { levels, t_last, dt })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn latest(&self) -> &'a Field {
        &self.levels[self.levels.len() - 1]
    }
    pub fn t_last(&self) -> f64 {
        self.t_last
    }
    /// Field `lag` steps before the latest.
    pub fn lagged(&self, lag: usize) -> &'a Field {
        &self.levels[self.levels.len() - 1 - lag]
    }
    pub fn time_at_lag(&self, lag: usize) -> f64 {
        self.t_last - lag as f64 * self.dt
    }

    /// The `len` most recent levels ending `lag` steps back.
    pub fn window(&self, lag: usize, len: usize) -> Result<FlowHistory<'a>> {
        let n = self.levels.len();
        if lag + len > n || len == 0 {
            return Err(Error::HistoryTooShort {
                required: lag + len.max(1),
                available: n,
            });
        }
        Ok(FlowHistory {
            levels: &self.levels[n - lag - len..n - lag],
            t_last: self.time_at_lag(lag),
            dt: self.dt,
        })
    }
}

/// Time levels a derivative of order `a_t` needs for second-order accuracy.
pub fn levels_for(a_t: usize) -> usize {
    if a_t == 0 {
        1
    } else {
        a_t + 2
    }
}

/// Backward weights `w[lag]` for the `order`-th time derivative using `npts`
/// levels spaced by `dt`.
pub fn backward_weights(order: usize, npts: usize, dt: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..npts).map(|k| -(k as f64)).collect();
    let scale = libm::pow(dt, -(order as f64));
    fd_weights(0.0, &nodes, order)
        .into_iter()
        .map(|c| c * scale)
        .collect()
}

fn time_weights(history: &FlowHistory, order: usize) -> Result<Vec<f64>> {
    if history.len() < order + 1 {
        return Err(Error::HistoryTooShort {
            required: order + 1,
            available: history.len(),
        });
    }
    let npts = history.len().min(order + 2);
    Ok(backward_weights(order, npts, history.dt()))
}

/// Backward difference of the given order at the most recent level. Uses
/// `order + 2` levels when available (second order) and `order + 1` otherwise.
pub fn dt_stencil(history: &FlowHistory, order: usize) -> Result<Field> {
    if order == 0 {
        return Ok(history.latest().clone());
    }
    let w = time_weights(history, order)?;
    let mut out = Field::zeros_like(history.latest());
    for (lag, c) in w.iter().enumerate() {
        out.axpy(*c, history.lagged(lag));
    }
    Ok(out)
}

/// Time derivative of a quantity derived from the history. `inner_len` is
/// the number of levels `f` consumes per evaluation.
pub fn time_derivative_of(
    history: &FlowHistory,
    order: usize,
    inner_len: usize,
    f: impl Fn(&FlowHistory) -> Result<Field>,
) -> Result<Field> {
    if history.len() < inner_len + order {
        return Err(Error::HistoryTooShort {
            required: inner_len + order,
            available: history.len(),
        });
    }
    if order == 0 {
        return f(&history.window(0, inner_len)?);
    }
    let npts = (order + 2).min(history.len() + 1 - inner_len);
    let w = backward_weights(order, npts, history.dt());
    let mut out: Option<Field> = None;
    for (lag, c) in w.iter().enumerate() {
        let g = f(&history.window(lag, inner_len)?)?;
        match out.as_mut() {
            None => out = Some(g.scale(*c)),
            Some(acc) => acc.axpy(*c, &g),
        }
    }
    Ok(out.expect("at least one stencil point"))
}

/// Which field a mixed derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The velocity `u` itself.
    U,
    /// The deviation `u - U` from the outer flow.
    Deviation,
    /// The reconstructed vertical velocity `v`.
    V,
}

/// `d_t^a_t d_x^a_x d_y^sigma` of the target at the latest level, applied in
/// the order t, x, y.
pub fn mixed_derivative(
    history: &FlowHistory,
    euler: &EulerData,
    grid: &Grid,
    idx: MultiIndex,
    target: Target,
) -> Result<Field> {
    check_order(idx.a_x.max(idx.sigma));
    let mut f = dt_stencil(history, idx.a_t)?;
    match target {
        Target::U => {}
        Target::Deviation => {
            let w = if idx.a_t == 0 {
                vec![1.0]
            } else {
                time_weights(history, idx.a_t)?
            };
            let mut row = vec![0.0; grid.nx()];
            for (lag, c) in w.iter().enumerate() {
                let t = history.time_at_lag(lag);
                for (i, r) in row.iter_mut().enumerate() {
                    *r += c * euler.value(t, grid.x(i));
                }
            }
            for (i, r) in row.into_iter().enumerate() {
                for v in f.column_mut(i) {
                    *v -= r;
                }
            }
        }
        Target::V => f = reconstruct_v(&f, grid),
    }
    if idx.a_x > 0 {
        f = dx(&f, grid, idx.a_x);
    }
    if idx.sigma > 0 {
        f = dy(&f, grid, idx.sigma);
    }
    Ok(f)
}

/// Terms of the weighted bound
/// `max |(1 + y)^-1 v| <= c ||d_x(u - U)||_{H^2_ell} + max |U_x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityBound {
    /// `max |(1 + y)^-1 v|`
    pub weighted_v: f64,
    /// `||d_x(u - U)||_{H^2_ell}`
    pub deviation_norm: f64,
    pub outer_slope: f64,
    /// `(weighted_v - outer_slope) / deviation_norm`, the measured constant;
    /// zero when the left side is already covered by `max |U_x|`.
    pub ratio: f64,
}

pub fn vertical_velocity_bound(u: &Field, euler: &EulerData, t: f64, grid: &Grid, ell: f64) -> VelocityBound {
    let v = reconstruct_v(u, grid);
    let mut weighted_v: f64 = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            weighted_v = weighted_v.max((v.at(i, j) / (1.0 + grid.y(j))).abs());
        }
    }
    let dev = u.sub(&euler.field(0, 0, t, grid));
    let deviation_norm = crate::diagnostics::norms::weighted_sobolev_norm(&dx(&dev, grid, 1), grid, ell, 2);
    let outer_slope = euler.row(0, 1, t, grid).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let excess = (weighted_v - outer_slope).max(0.0);
    let ratio = if excess == 0.0 { 0.0 } else { excess / deviation_norm };
    VelocityBound {
        weighted_v,
        deviation_norm,
        outer_slope,
        ratio,
    }
}
