//! Compatible initial data `u0 = U(0, x) g(y)` and its validation.
//!
//! The wall profile has `g' = a (1 + y)^(-theta) > 0`, the wall condition
//! holds in closed form and `g -> 1` at the far field. On a truncated strip
//! the constant is rebalanced so that `g(y_max) = 1` exactly; the half-line
//! formulas are recovered as `y_max -> inf`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::dy;
use crate::diagnostics::decay::{decay_fit, DecayFit};
use crate::diagnostics::norms::{trace_sobolev_norm, weighted_sobolev_norm};
use crate::error::{invalid, Error, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::Grid;
use crate::wall::Wall;

/// Vorticity perturbation with x-factor `eta cos(2 pi m x / L + phase)`.
///
/// The multiplicative factor it induces stays within `[1 - |eta|, 1 + |eta|]`,
/// so the decay sandwich survives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub amplitude: f64,
    pub mode: u32,
    pub phase: f64,
}

impl Perturbation {
    fn x_factor(&self, x: f64, x_period: f64) -> f64 {
        let k = 2.0 * core::f64::consts::PI * self.mode as f64 / x_period;
        self.amplitude * libm::cos(k * x + self.phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialDataSpec {
    pub theta: f64,
    /// Smallness target for the data norms.
    pub epsilon: f64,
    pub wall: Wall,
    pub ell: f64,
    /// Highest derivative order in the reported data norms.
    pub k: usize,
    /// Bound on the weighted tail `(1 + y_max)^(ell - theta)` reported at setup.
    pub tail_tolerance: f64,
    pub perturbation: Option<Perturbation>,
}

impl InitialDataSpec {
    pub fn new(theta: f64, epsilon: f64, wall: Wall, ell: f64) -> Result<Self> {
        let spec = Self {
            theta,
            epsilon,
            wall,
            ell,
            k: 2,
            tail_tolerance: 1e-6,
            perturbation: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell.is_finite() && self.ell > 1.0) {
            return Err(invalid("ell", format!("{} must exceed 1", self.ell)));
        }
        if !(self.theta.is_finite() && self.theta > (self.ell + 1.0) / 2.0) {
            return Err(invalid(
                "theta",
                format!("{} must exceed (ell + 1)/2 = {}", self.theta, (self.ell + 1.0) / 2.0),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive"));
        }
        if let Wall::Robin(b) = self.wall {
            if !(b.is_finite() && b > 0.0) {
                return Err(invalid("beta", "must be positive"));
            }
        }
        if let Some(p) = self.perturbation {
            if !(p.amplitude.is_finite() && p.amplitude.abs() < 1.0) {
                return Err(invalid("perturbation", "amplitude must lie in (-1, 1)"));
            }
        }
        Ok(())
    }
}

/// `int_0^y (1 + s)^(-p) ds`, with `y = inf` allowed.
fn power_integral(p: f64, y: f64) -> f64 {
    if y.is_infinite() {
        1.0 / (p - 1.0)
    } else {
        (1.0 - libm::pow(1.0 + y, 1.0 - p)) / (p - 1.0)
    }
}

/// The wall-normal profile `g` and its constant `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallProfile {
    pub a: f64,
    pub theta: f64,
    pub wall: Wall,
    /// Height where `g = 1` is imposed; `inf` for the half-line.
    pub y_top: f64,
}

impl WallProfile {
    /// Profile with `g(inf) = 1`: Robin `a = beta(theta-1)/(theta-1+beta)`,
    /// Dirichlet `a = theta - 1`.
    pub fn half_line(theta: f64, wall: Wall) -> Self {
        Self::truncated(theta, wall, f64::INFINITY)
    }

    /// Profile with `g(y_top) = 1`.
    pub fn truncated(theta: f64, wall: Wall, y_top: f64) -> Self {
        let c = power_integral(theta, y_top);
        let a = match wall {
            Wall::Robin(beta) => beta / (1.0 + beta * c),
            Wall::Dirichlet => 1.0 / c,
        };
        Self { a, theta, wall, y_top }
    }

    fn wall_offset(&self) -> f64 {
        match self.wall {
            Wall::Robin(beta) => 1.0 / beta,
            Wall::Dirichlet => 0.0,
        }
    }

    pub fn g(&self, y: f64) -> f64 {
        self.a * (self.wall_offset() + power_integral(self.theta, y))
    }

    pub fn dg(&self, y: f64) -> f64 {
        self.a * libm::pow(1.0 + y, -self.theta)
    }
}

/// `u0` with its closed-form vorticity.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Field,
    pub omega0: Field,
}

impl InitialData {
    /// Wraps an arbitrary field, differentiating it numerically for `omega0`.
    pub fn from_u0(u0: Field, grid: &Grid) -> Self {
        let omega0 = dy(&u0, grid, 1);
        Self { u0, omega0 }
    }
}

/// Builds `u0 = U(0, x) a [w(0)/beta + int_0^y (1 + s)^(-theta) w(s) ds]`
/// with vorticity weight `w = 1 + e(x) ((1 + y)^-1 - c)`, where `e` is the
/// perturbation factor and `c` keeps `u0(y_max) = U(0, x)` for every `e`.
/// The data are therefore affine in the perturbation amplitude, and without a
/// perturbation `u0 = U(0, x) g(y)`.
pub fn make_initial_data(spec: &InitialDataSpec, euler: &EulerData, grid: &Grid) -> Result<InitialData> {
    spec.validate()?;
    let top = grid.y_max();
    let profile = WallProfile::truncated(spec.theta, spec.wall, top);
    let offset = profile.wall_offset();
    let f0 = |y: f64| power_integral(spec.theta, y);
    let f1 = |y: f64| power_integral(spec.theta + 1.0, y);
    let c = (offset + f1(top)) / (offset + f0(top));
    let mut u0 = Field::zeros(grid);
    let mut omega0 = Field::zeros(grid);
    for i in 0..grid.nx() {
        let x = grid.x(i);
        let big_u = euler.value(0.0, x);
        if !(big_u > 0.0) {
            return Err(Error::Infeasible(format!(
                "U(0, {x:.4}) = {big_u:e} is not positive, so u_y > 0 cannot hold"
            )));
        }
        let e = spec.perturbation.map_or(0.0, |p| p.x_factor(x, grid.x_period()));
        let scale = big_u * profile.a;
        for j in 0..grid.ny() {
            let y = grid.y(j);
            let shape = offset * (1.0 + e * (1.0 - c)) + f0(y) + e * (f1(y) - c * f0(y));
            u0.set(i, j, scale * shape);
            let w = libm::pow(1.0 + y, -spec.theta) * (1.0 + e * (1.0 / (1.0 + y) - c));
            omega0.set(i, j, scale * w);
        }
    }
    Ok(InitialData { u0, omega0 })
}

/// Findings about a candidate initial state; violations are flagged, not raised.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub min_omega: f64,
    pub oleinik_ok: bool,
    /// `max |omega - beta u|` (Robin) or `max |u|` (Dirichlet) on the wall.
    pub wall_residual: f64,
    /// `max |u0(x, y_max) - U(0, x)|`
    pub far_field_mismatch: f64,
    pub decay: Option<DecayFit>,
    /// `min` and `max` of `omega0 (1 + y)^theta`.
    pub sandwich: (f64, f64),
    /// `(1 + y_max)^(ell - theta)`
    pub tail_weight: f64,
    pub tail_ok: bool,
    pub omega_norm: f64,
    /// `beta^(-1/2) |omega0|_{y=0}|_{H^k}`; zero for Dirichlet.
    pub wall_trace_term: f64,
    pub small: bool,
    pub warnings: Vec<String>,
}

pub fn validate_compatibility(
    data: &InitialData,
    spec: &InitialDataSpec,
    euler: &EulerData,
    grid: &Grid,
) -> CompatibilityReport {
    let mut warnings = Vec::new();
    let (mi, mj, min_omega) = data.omega0.argmin();
    let oleinik_ok = min_omega > 0.0;
    if !oleinik_ok {
        warnings.push(format!("Oleinik violation: omega0 = {min_omega:e} at node ({mi}, {mj})"));
    }
    let wall_residual = (0..grid.nx())
        .map(|i| match spec.wall {
            Wall::Robin(beta) => (data.omega0.at(i, 0) - beta * data.u0.at(i, 0)).abs(),
            Wall::Dirichlet => data.u0.at(i, 0).abs(),
        })
        .fold(0.0, f64::max);
    let top = grid.ny() - 1;
    let far_field_mismatch = (0..grid.nx())
        .map(|i| (data.u0.at(i, top) - euler.value(0.0, grid.x(i))).abs())
        .fold(0.0, f64::max);
    let y_max = grid.y_max();
    let decay = if oleinik_ok {
        decay_fit(&data.omega0, grid, (0.25 * y_max, 0.75 * y_max)).ok()
    } else {
        None
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let s = data.omega0.at(i, j) * libm::pow(1.0 + grid.y(j), spec.theta);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let tail_weight = libm::pow(1.0 + y_max, spec.ell - spec.theta);
    let tail_ok = tail_weight <= spec.tail_tolerance;
    if !tail_ok {
        warnings.push(format!(
            "weighted tail (1 + y_max)^(ell - theta) = {tail_weight:e} exceeds tolerance {:e}",
            spec.tail_tolerance
        ));
    }
    let omega_norm = weighted_sobolev_norm(&data.omega0, grid, spec.ell, spec.k);
    let wall_trace_term = match spec.wall {
        Wall::Robin(beta) => trace_sobolev_norm(&data.omega0.row(0), grid, spec.k) / libm::sqrt(beta),
        Wall::Dirichlet => 0.0,
    };
    let small = omega_norm + wall_trace_term <= spec.epsilon;
    if !small {
        warnings.push(format!(
            "data size {:e} exceeds epsilon {:e}",
            omega_norm + wall_trace_term,
            spec.epsilon
        ));
    }
    CompatibilityReport {
        min_omega,
        oleinik_ok,
        wall_residual,
        far_field_mismatch,
        decay,
        sandwich: (lo, hi),
        tail_weight,
        tail_ok,
        omega_norm,
        wall_trace_term,
        small,
        warnings,
    }
}
