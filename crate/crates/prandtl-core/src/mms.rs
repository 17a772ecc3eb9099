//! Manufactured solution `u* = U(t, x) S(t) G(y)` with `S = 1 + e^-t / 2`,
//! `G = 1 - (1 + y)^-2`, and the refinement studies built on it.
//!
//! The wall is no-slip (`G(0) = 0`) and the top row is pinned to `u*`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::diagnostics::decay::ls_slope;
use crate::diagnostics::norms::weighted_norm;
use crate::error::Result;
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::Grid;
use crate::linear_step::{ColumnMap, Forcing, StepConfig};
use crate::picard::{solve, PicardConfig, TrajectorySolution};
use crate::wall::Wall;

#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub euler: EulerData,
    pub y_top: f64,
}

impl Manufactured {
    pub fn new(euler: EulerData, y_top: f64) -> Self {
        Self { euler, y_top }
    }

    fn s(t: f64) -> (f64, f64) {
        let e = libm::exp(-t);
        (1.0 + 0.5 * e, -0.5 * e)
    }

    fn g(y: f64) -> (f64, f64, f64) {
        let w = 1.0 / (1.0 + y);
        (1.0 - w * w, 2.0 * w * w * w, -6.0 * w * w * w * w)
    }

    pub fn u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.euler.value(t, x) * Self::s(t).0 * Self::g(y).0
    }

    pub fn sample(&self, t: f64, grid: &Grid) -> Field {
        Field::from_fn(grid, |x, y| self.u(t, x, y))
    }
}

impl Forcing for Manufactured {
    fn source(&self, t: f64, x: f64, y: f64) -> f64 {
        let e = &self.euler;
        let (big_u, u_t, u_x) = (e.value(t, x), e.derivative(1, 0, t, x), e.derivative(0, 1, t, x));
        let (s, s_t) = Self::s(t);
        let (g, g_y, g_yy) = Self::g(y);
        let u = big_u * s * g;
        let ut = (u_t * s + big_u * s_t) * g;
        let ux = u_x * s * g;
        // v = -int_0^y u_x, with int_0^y G = y^2 / (1 + y)
        let v = -u_x * s * y * y / (1.0 + y);
        let uy = big_u * s * g_y;
        let uyy = big_u * s * g_yy;
        ut + u * ux + v * uy + e.px(t, x) - uyy
    }

    fn top_value(&self, t: f64, x: f64) -> Option<f64> {
        Some(self.u(t, x, self.y_top))
    }
}

/// Parameters of the two refinement studies.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsSettings {
    /// Outer-flow amplitude; small values keep the first-order upwind error
    /// in x below the errors being measured.
    pub amplitude: f64,
    pub nx: usize,
    pub y_max: f64,
    pub t_final: f64,
    pub tol: f64,
    /// Steps for the time study, at fixed `time_hy`.
    pub time_dts: Vec<f64>,
    pub time_hy: f64,
    /// Spacings for the space study, with `dt = space_dt_factor * hy^2`.
    pub space_hys: Vec<f64>,
    pub space_dt_factor: f64,
}

impl Default for MmsSettings {
    fn default() -> Self {
        Self {
            amplitude: 1e-4,
            nx: 32,
            y_max: 8.0,
            t_final: 1.0,
            tol: 1e-13,
            time_dts: alloc::vec![0.1, 0.05, 0.025, 0.0125],
            time_hy: 1.0 / 32.0,
            space_hys: alloc::vec![0.5, 0.25, 0.125, 0.0625],
            space_dt_factor: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsPoint {
    pub dt: f64,
    pub hy: f64,
    pub ny: usize,
    /// `||u - u*||_{L^2}` at the final time.
    pub error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub points: Vec<MmsPoint>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub order: f64,
}

impl MmsSettings {
    pub fn euler(&self) -> Result<EulerData> {
        EulerData::sinusoidal(self.amplitude, 0.5, 1, 0.5, 2.0 * core::f64::consts::PI)
    }

    /// Solves the forced problem with the given spacing and reports the
    /// final-time error.
    pub fn run_case(&self, dt: f64, hy: f64, exec: &dyn ColumnMap) -> Result<(MmsPoint, TrajectorySolution)> {
        let ny = libm::round(self.y_max / hy) as usize + 1;
        let euler = self.euler()?;
        let grid = Grid::new(self.nx, ny, euler.x_period(), self.y_max)?;
        let m = Arc::new(Manufactured::new(euler.clone(), self.y_max));
        let step = StepConfig::new(dt, Wall::Dirichlet)?.with_forcing(m.clone());
        let mut pic = PicardConfig::new(self.t_final, 0.0)?;
        pic.tol = self.tol;
        // the forced problem is outside the monotone regime near the top
        // row, where the exact vorticity is below the truncation error
        pic.monotonicity_guard = false;
        let u0 = m.sample(0.0, &grid);
        let traj = solve(&u0, &euler, &grid, &step, &pic, exec)?;
        let exact = m.sample(traj.t_final(), &grid);
        let last = traj.levels.last().expect("levels");
        let error = weighted_norm(&last.sub(&exact), &grid, 0.0);
        Ok((
            MmsPoint {
                dt,
                hy: grid.hy(),
                ny,
                error,
                iterations: traj.iterate_count,
            },
            traj,
        ))
    }

    pub fn time_study(&self, exec: &dyn ColumnMap) -> Result<OrderStudy> {
        let mut points = Vec::new();
        for &dt in &self.time_dts {
            points.push(self.run_case(dt, self.time_hy, exec)?.0);
        }
        Ok(fit_order(points, |p| p.dt))
    }

    pub fn space_study(&self, exec: &dyn ColumnMap) -> Result<OrderStudy> {
        let mut points = Vec::new();
        for &hy in &self.space_hys {
            let dt = self.space_dt_factor * hy * hy;
            points.push(self.run_case(dt, hy, exec)?.0);
        }
        Ok(fit_order(points, |p| p.hy))
    }
}

pub fn fit_order(points: Vec<MmsPoint>, h: impl Fn(&MmsPoint) -> f64) -> OrderStudy {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (libm::log(h(p)), libm::log(p.error))).collect();
    OrderStudy {
        order: ls_slope(&pts),
        points,
    }
}
