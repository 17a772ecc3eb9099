//! A smooth closed-form flow with `u_y > 0` on which the transformation
//! identities are checked under refinement.
//!
//! ```text
//! u = A(t, x) G(y) + B(t, x) H(y) + K(t, x) q(y),   outer flow U = A
//! ```
//!
//! `G = 1 - (1 - g0)(1 + s/3) e^-s` with `s = y / 3` rises from `g0` to 1
//! and has `G'''(0) = 0`; `H = y e^-y` and `q = y^3 e^-y / 6`. Entire
//! profiles keep high y-derivatives at the wall moderate, so one-sided
//! stencils reach their asymptotic order on coarse grids. The coefficient
//! `K` is fixed so that the wall relation `u_yyy = u_yt + u u_yx` holds at
//! `y = 0` for all `t` and `x`.

use alloc::vec::Vec;

use crate::calculus::FlowHistory;
use crate::error::Result;
use crate::field::Field;
use crate::grid::Grid;

/// Wall value of `G`.
const G0: f64 = 0.5;
/// Length scale of `G`, longer than those of `H` and `q` so `u_y > 0`.
const G_SCALE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityFamily {
    /// x-wavenumber `2 pi / L`.
    pub k: f64,
}

impl IdentityFamily {
    pub fn new(x_period: f64) -> Self {
        Self {
            k: 2.0 * core::f64::consts::PI / x_period,
        }
    }

    fn a(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let s = 2.0 + 0.5 * libm::sin(self.k * x);
        let tf = 1.0 + 0.5 * t;
        // (A, A_t, A_x)
        (tf * s, 0.5 * s, tf * 0.5 * self.k * libm::cos(self.k * x))
    }

    fn b(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let ph = self.k * x + t;
        // (B, B_t, B_x)
        (0.1 * (1.0 + libm::cos(ph)), -0.1 * libm::sin(ph), -0.1 * self.k * libm::sin(ph))
    }

    /// The outer flow `U = A`.
    pub fn outer(&self, t: f64, x: f64) -> f64 {
        self.a(t, x).0
    }

    fn coefficient_k(&self, t: f64, x: f64) -> f64 {
        let (a, a_t, a_x) = self.a(t, x);
        let (b, b_t, b_x) = self.b(t, x);
        let gp0 = Self::dg(0.0);
        a_t * gp0 + b_t + a * G0 * (a_x * gp0 + b_x) - 3.0 * b
    }

    fn g(y: f64) -> f64 {
        let s = y / G_SCALE;
        1.0 - (1.0 - G0) * (1.0 + s / 3.0) * libm::exp(-s)
    }

    fn dg(y: f64) -> f64 {
        let s = y / G_SCALE;
        (1.0 - G0) * (2.0 + s) * libm::exp(-s) / (3.0 * G_SCALE)
    }

    fn h(y: f64) -> f64 {
        y * libm::exp(-y)
    }

    fn dh(y: f64) -> f64 {
        (1.0 - y) * libm::exp(-y)
    }

    fn q(y: f64) -> f64 {
        y * y * y * libm::exp(-y) / 6.0
    }

    fn dq(y: f64) -> f64 {
        (3.0 * y * y - y * y * y) * libm::exp(-y) / 6.0
    }

    pub fn u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.a(t, x).0 * Self::g(y) + self.b(t, x).0 * Self::h(y) + self.coefficient_k(t, x) * Self::q(y)
    }

    /// Exact `u_y`.
    pub fn u_y(&self, t: f64, x: f64, y: f64) -> f64 {
        self.a(t, x).0 * Self::dg(y) + self.b(t, x).0 * Self::dh(y) + self.coefficient_k(t, x) * Self::dq(y)
    }

    pub fn sample(&self, t: f64, grid: &Grid) -> Field {
        Field::from_fn(grid, |x, y| self.u(t, x, y))
    }

    pub fn sample_deviation(&self, t: f64, grid: &Grid) -> Field {
        Field::from_fn(grid, |x, y| self.u(t, x, y) - self.outer(t, x))
    }
}

/// Time levels of `u` and of `u - U` ending at `t_last`, spaced by `dt`.
#[derive(Debug, Clone)]
pub struct SampledFamily {
    pub u: Vec<Field>,
    pub deviation: Vec<Field>,
    pub t_last: f64,
    pub dt: f64,
}

impl SampledFamily {
    pub fn new(family: &IdentityFamily, grid: &Grid, t_last: f64, dt: f64, levels: usize) -> Self {
        let times: Vec<f64> = (0..levels).map(|n| t_last - (levels - 1 - n) as f64 * dt).collect();
        Self {
            u: times.iter().map(|&t| family.sample(t, grid)).collect(),
            deviation: times.iter().map(|&t| family.sample_deviation(t, grid)).collect(),
            t_last,
            dt,
        }
    }

    pub fn u_history(&self) -> Result<FlowHistory<'_>> {
        FlowHistory::new(&self.u, self.t_last, self.dt)
    }

    pub fn deviation_history(&self) -> Result<FlowHistory<'_>> {
        FlowHistory::new(&self.deviation, self.t_last, self.dt)
    }
}
