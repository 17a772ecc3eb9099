//! One time step of the linearized problem
//!
//! ```text
//! u_t + a u_x + v w_a + p_x = u_yy + f,
//! ```
//!
//! where `a` is the frozen coefficient field, `w_a = d_y a` and `v` is the
//! vertical velocity of the unknown lagged one level. Diffusion is backward
//! Euler (one tridiagonal solve per x-column), advection explicit upwind.
//!
//! The step marches the deviation `d = u - U`. Since `U_t + U U_x + p_x = 0`
//! the equation becomes
//!
//! ```text
//! d_t + a d_x + (a - U) U_x + v w_a = d_yy + f,
//! ```
//!
//! which is the same continuous problem, but a far field `u = U` is now kept
//! exactly by the discrete step. Marching `u` directly leaves an upwind
//! error of size `hx |U U_xx|` near the top, larger than the vorticity there.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::{dy, reconstruct_v};
use crate::error::{invalid, Error, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::Grid;
use crate::wall::Wall;

/// Closed-form source and boundary data for manufactured solutions.
pub trait Forcing: Send + Sync {
    fn source(&self, t: f64, x: f64, y: f64) -> f64;
    /// Right-hand side `g` of `u_y - beta u = g` (Robin) or `u = g` (Dirichlet).
    fn wall_value(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    /// Top value replacing `U(t, x)` when present.
    fn top_value(&self, _t: f64, _x: f64) -> Option<f64> {
        None
    }
}

/// Runs independent per-column jobs. Implementations must return the
/// columns in index order so results do not depend on scheduling.
pub trait ColumnMap: Sync {
    fn map_columns(&self, nx: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>>;
}

/// Runs the columns one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ColumnMap for Sequential {
    fn map_columns(&self, nx: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>> {
        (0..nx).map(job).collect()
    }
}

#[derive(Clone)]
pub struct StepConfig {
    pub dt: f64,
    pub wall: Wall,
    pub cfl_limit: f64,
    pub forcing: Option<Arc<dyn Forcing>>,
}

impl core::fmt::Debug for StepConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("StepConfig")
            .field("dt", &self.dt)
            .field("wall", &self.wall)
            .field("cfl_limit", &self.cfl_limit)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl StepConfig {
    pub fn new(dt: f64, wall: Wall) -> Result<Self> {
        let cfg = Self {
            dt,
            wall,
            cfl_limit: 0.5,
            forcing: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.cfl_limit > 0.0 && self.cfl_limit <= 1.0) {
            return Err(invalid("cfl_limit", "must lie in (0, 1]"));
        }
        if let Wall::Robin(b) = self.wall {
            if !(b.is_finite() && b > 0.0) {
                return Err(invalid("beta", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Tridiagonal row `(lower, diag, upper)`.
pub type Row = (f64, f64, f64);

/// Wall row after eliminating the ghost node with
/// `(u_1 - u_{-1}) / (2 hy) = beta u_0`.
pub fn robin_wall_row(beta: f64, hy: f64, dt: f64) -> Result<Row> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("{beta} must be positive and finite")));
    }
    let lam = 1.0 / (hy * hy);
    Ok((0.0, 1.0 / dt + 2.0 * lam * (1.0 + hy * beta), -2.0 * lam))
}

/// Solves a tridiagonal system, rejecting rows that are not diagonally
/// dominant.
pub fn thomas(rows: &[Row], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    for (k, &(a, b, c)) in rows.iter().enumerate() {
        if !(b.abs() >= a.abs() + c.abs() && b != 0.0) {
            return Err(Error::NotDiagonallyDominant { row: k });
        }
    }
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = rows[0].2 / rows[0].1;
    dp[0] = rhs[0] / rows[0].1;
    for k in 1..n {
        let (a, b, c) = rows[k];
        let m = b - a * cp[k - 1];
        cp[k] = c / m;
        dp[k] = (rhs[k] - a * dp[k - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = dp[k] - cp[k] * x[k + 1];
    }
    Ok(x)
}

/// Largest stable step for the explicit advection.
pub fn cfl_max_dt(coef: &Field, euler: &EulerData, t: f64, grid: &Grid, cfl_limit: f64) -> f64 {
    let big_u = (0..grid.nx())
        .map(|i| euler.value(t, grid.x(i)).abs())
        .fold(0.0, f64::max);
    let speed = coef.max_abs() + big_u;
    if speed == 0.0 {
        f64::INFINITY
    } else {
        cfl_limit * grid.hx() / speed
    }
}

/// Advances `prev` (the unknown at time `t`) to `t + dt` with coefficient
/// field `coef`.
pub fn advance(
    prev: &Field,
    coef: &Field,
    euler: &EulerData,
    cfg: &StepConfig,
    t: f64,
    grid: &Grid,
    exec: &dyn ColumnMap,
) -> Result<Field> {
    prev.check_shape(grid)?;
    coef.check_shape(grid)?;
    if !prev.is_finite() || !coef.is_finite() {
        return Err(Error::NonFinite { what: "step input" });
    }
    let dt = cfg.dt;
    let max_dt = cfl_max_dt(coef, euler, t, grid, cfg.cfl_limit);
    if dt > max_dt {
        return Err(Error::Cfl { dt, max_dt });
    }
    let coef_y = dy(coef, grid, 1);
    let v_lag = reconstruct_v(prev, grid);
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let lam = 1.0 / (hy * hy);
    let t_new = t + dt;
    let forcing = cfg.forcing.as_deref();

    let mut rows: Vec<Row> = Vec::with_capacity(ny);
    rows.push(match cfg.wall {
        Wall::Robin(beta) => robin_wall_row(beta, hy, dt)?,
        Wall::Dirichlet => (0.0, 1.0, 0.0),
    });
    for _ in 1..ny - 1 {
        rows.push((-lam, 1.0 / dt + 2.0 * lam, -lam));
    }
    rows.push((0.0, 1.0, 0.0));

    let job = |i: usize| -> Result<Vec<f64>> {
        let x = grid.x(i);
        let ip = (i + 1) % nx;
        let im = (i + nx - 1) % nx;
        let outer_old = [euler.value(t, grid.x(im)), euler.value(t, x), euler.value(t, grid.x(ip))];
        let outer_new = euler.value(t_new, x);
        let outer_x = euler.derivative(0, 1, t_new, x);
        let (cur, left, right) = (prev.column(i), prev.column(im), prev.column(ip));
        let a = coef.column(i);
        let wa = coef_y.column(i);
        let v = v_lag.column(i);
        let mut rhs = vec![0.0; ny];
        for j in 0..ny - 1 {
            let d = cur[j] - outer_old[1];
            let dx = if a[j] > 0.0 {
                (d - (left[j] - outer_old[0])) / hx
            } else {
                ((right[j] - outer_old[2]) - d) / hx
            };
            let mut b = d / dt - a[j] * dx - (a[j] - outer_new) * outer_x - v[j] * wa[j];
            if let Some(f) = forcing {
                b += f.source(t_new, x, grid.y(j));
            }
            rhs[j] = b;
        }
        let g = forcing.map_or(0.0, |f| f.wall_value(t_new, x));
        match cfg.wall {
            // u_y - beta u = g  becomes  d_y - beta d = g + beta U
            Wall::Robin(beta) => rhs[0] -= 2.0 * (g + beta * outer_new) / hy,
            Wall::Dirichlet => rhs[0] = g - outer_new,
        }
        rhs[ny - 1] = forcing
            .and_then(|f| f.top_value(t_new, x))
            .map_or(0.0, |top| top - outer_new);
        let mut col = thomas(&rows, &rhs)?;
        for c in &mut col {
            *c += outer_new;
        }
        Ok(col)
    };
    let cols = exec.map_columns(nx, &job)?;
    let mut out = Field::zeros(grid);
    for (i, c) in cols.into_iter().enumerate() {
        out.column_mut(i).copy_from_slice(&c);
    }
    if !out.is_finite() {
        return Err(Error::NonFinite { what: "step output" });
    }
    Ok(out)
}
