//! Outer fixed-point iteration over the whole time interval.
//!
//! Iterate 0 is `u0` held constant in time. Each sweep marches `0 -> T`
//! with the linear step, freezing coefficients at the previous iterate's
//! matching time level. Monotonicity is enforced from iterate 2 on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::calculus::{dy, reconstruct_v, FlowHistory};
use crate::diagnostics::norms::{weighted_norm, weighted_norm_rows};
use crate::diagnostics::residuals::pde_residual;
use crate::error::{invalid, Error, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::Grid;
use crate::linear_step::{advance, ColumnMap, Forcing, StepConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub t_final: f64,
    pub max_iters: usize,
    /// Stop once `max_n ||omega_new - omega_old||_{L^2_ell}` over snapshot
    /// levels falls below this.
    pub tol: f64,
    pub snapshot_stride: usize,
    pub ell: f64,
    /// Abort on loss of `omega > 0` (when the data start monotone).
    pub monotonicity_guard: bool,
}

impl PicardConfig {
    pub fn new(t_final: f64, ell: f64) -> Result<Self> {
        let c = Self {
            t_final,
            max_iters: 30,
            tol: 1e-8,
            snapshot_stride: 1,
            ell,
            monotonicity_guard: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid("t_final", "must be positive"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps `T / dt`, which must be (close to) an integer.
    pub fn steps(&self, dt: f64) -> Result<usize> {
        let n = libm::round(self.t_final / dt);
        if n < 1.0 || (n * dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(invalid(
                "dt",
                format!("T = {} is not a whole number of steps of {dt}", self.t_final),
            ));
        }
        Ok(n as usize)
    }
}

/// One sampled state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub level: usize,
    pub u: Field,
    pub omega: Field,
    pub v: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySolution {
    /// `u` at every level `t = n dt`, `n = 0..=steps`.
    pub levels: Vec<Field>,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub iterate_count: usize,
    /// Discrepancy after each sweep.
    pub convergence_history: Vec<f64>,
    pub converged: bool,
    /// Smallest `omega` of each iterate.
    pub min_omega: Vec<f64>,
}

impl TrajectorySolution {
    pub fn t_final(&self) -> f64 {
        (self.levels.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    pub fn snapshot_levels(&self) -> Vec<usize> {
        snapshot_levels(self.levels.len(), self.snapshot_stride)
    }

    pub fn snapshot(&self, level: usize, grid: &Grid) -> Snapshot {
        let u = self.levels[level].clone();
        Snapshot {
            t: self.time(level),
            level,
            omega: dy(&u, grid, 1),
            v: reconstruct_v(&u, grid),
            u,
        }
    }

    pub fn snapshots(&self, grid: &Grid) -> Vec<Snapshot> {
        self.snapshot_levels().into_iter().map(|n| self.snapshot(n, grid)).collect()
    }

    /// History ending at `level` with up to `len` levels.
    pub fn history(&self, level: usize, len: usize) -> Result<FlowHistory<'_>> {
        let start = (level + 1).saturating_sub(len);
        FlowHistory::new(&self.levels[start..=level], self.time(level), self.dt)
    }

    /// Contraction ratios `d_{n+1} / d_n`.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.convergence_history.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

fn snapshot_levels(n_levels: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n_levels).step_by(stride).collect();
    if *v.last().expect("at least one level") != n_levels - 1 {
        v.push(n_levels - 1);
    }
    v
}

/// One sweep with coefficients from `old`.
pub fn sweep(
    old: &[Field],
    euler: &EulerData,
    grid: &Grid,
    step: &StepConfig,
    exec: &dyn ColumnMap,
) -> Result<Vec<Field>> {
    let mut new = Vec::with_capacity(old.len());
    new.push(old[0].clone());
    for m in 0..old.len() - 1 {
        let next = advance(&new[m], &old[m], euler, step, m as f64 * step.dt, grid, exec)?;
        new.push(next);
    }
    Ok(new)
}

/// `max_n ||d_y(a_n - b_n)||_{L^2_ell}` over the snapshot levels.
pub fn discrepancy(a: &[Field], b: &[Field], grid: &Grid, ell: f64, stride: usize) -> f64 {
    snapshot_levels(a.len(), stride)
        .into_iter()
        .map(|n| weighted_norm(&dy(&a[n].sub(&b[n]), grid, 1), grid, ell))
        .fold(0.0, f64::max)
}

/// Runs the fixed-point iteration from `u0`.
pub fn solve(
    u0: &Field,
    euler: &EulerData,
    grid: &Grid,
    step: &StepConfig,
    pic: &PicardConfig,
    exec: &dyn ColumnMap,
) -> Result<TrajectorySolution> {
    step.validate()?;
    pic.validate()?;
    u0.check_shape(grid)?;
    let steps = pic.steps(step.dt)?;
    let check_monotone = pic.monotonicity_guard && dy(u0, grid, 1).min() > 0.0;
    let mut old = vec![u0.clone(); steps + 1];
    let mut history = Vec::new();
    let mut min_omega = Vec::new();
    let mut converged = false;
    for iterate in 1..=pic.max_iters {
        let new = sweep(&old, euler, grid, step, exec)?;
        let mut worst = f64::INFINITY;
        for (level, u) in new.iter().enumerate() {
            let m = dy(u, grid, 1).min();
            // Iterate 1 is exempt: its coefficient, u0 frozen in time, does
            // not match the moving far-field pin, which leaves a thin layer
            // under the top row of the size of the tail vorticity.
            if check_monotone && iterate > 1 && !(m > 0.0) {
                return Err(Error::MonotonicityLoss {
                    iterate,
                    level,
                    min_omega: m,
                });
            }
            worst = worst.min(m);
        }
        min_omega.push(worst);
        let d = discrepancy(&new, &old, grid, pic.ell, pic.snapshot_stride);
        history.push(d);
        old = new;
        if d < pic.tol {
            converged = true;
            break;
        }
    }
    Ok(TrajectorySolution {
        iterate_count: history.len(),
        levels: old,
        dt: step.dt,
        snapshot_stride: pic.snapshot_stride,
        convergence_history: history,
        converged,
        min_omega,
    })
}

/// Change in `omega` caused by one more sweep of a finished trajectory.
pub fn resweep_change(
    traj: &TrajectorySolution,
    euler: &EulerData,
    grid: &Grid,
    step: &StepConfig,
    ell: f64,
    exec: &dyn ColumnMap,
) -> Result<f64> {
    let new = sweep(&traj.levels, euler, grid, step, exec)?;
    Ok(discrepancy(&new, &traj.levels, grid, ell, traj.snapshot_stride))
}

/// `(t, ||u_t + u u_x + v u_y + p_x - u_yy - f||_{L^2_ell})` per level from
/// the second one on, over rows `1..ny-1`.
pub fn residual(
    traj: &TrajectorySolution,
    euler: &EulerData,
    grid: &Grid,
    ell: f64,
    forcing: Option<&dyn Forcing>,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for n in 1..traj.levels.len() {
        let h = traj.history(n, 3)?;
        let mut r = pde_residual(&h, euler, grid)?;
        if let Some(f) = forcing {
            let t = traj.time(n);
            r = r.sub(&Field::from_fn(grid, |x, y| f.source(t, x, y)));
        }
        out.push((traj.time(n), weighted_norm_rows(&r, grid, ell, 1, grid.ny() - 1, None)));
    }
    Ok(out)
}
