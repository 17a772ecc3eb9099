//! Outer Euler trace `U(t, x)` with exact derivatives and the Bernoulli
//! pressure gradient.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::field::Field;
use crate::grid::Grid;

/// x-shape of the bump riding on the constant base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// No x-dependence.
    Flat,
    /// `sin(2 pi m x / L)`
    Sine { mode: u32 },
    /// Periodized Gaussian centred at `center` with standard deviation `width`.
    Gaussian { center: f64, width: f64 },
}

/// `U(t, x) = amplitude * exp(-decay t) * (base + bump * shape(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerData {
    amplitude: f64,
    base: f64,
    bump: f64,
    shape: Shape,
    decay: f64,
    x_period: f64,
}

impl EulerData {
    pub fn new(amplitude: f64, base: f64, bump: f64, shape: Shape, decay: f64, x_period: f64) -> Result<Self> {
        for (name, v) in [("amplitude", amplitude), ("base", base), ("bump", bump), ("decay", decay)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(x_period.is_finite() && x_period > 0.0) {
            return Err(invalid("x_period", "must be positive"));
        }
        if let Shape::Gaussian { width, .. } = shape {
            if !(width.is_finite() && width > 0.0) {
                return Err(invalid("width", format!("{width} must be positive")));
            }
        }
        Ok(Self {
            amplitude,
            base,
            bump,
            shape,
            decay,
            x_period,
        })
    }

    /// `U = amplitude * exp(-decay t)`.
    pub fn constant_decaying(amplitude: f64, decay: f64, x_period: f64) -> Result<Self> {
        Self::new(amplitude, 1.0, 0.0, Shape::Flat, decay, x_period)
    }

    /// `U = amplitude * exp(-decay t) * (1 + bump sin(2 pi m x / L))`.
    pub fn sinusoidal(amplitude: f64, bump: f64, mode: u32, decay: f64, x_period: f64) -> Result<Self> {
        Self::new(amplitude, 1.0, bump, Shape::Sine { mode }, decay, x_period)
    }

    /// `U = amplitude * exp(-decay t) * (1 + bump G(x))` with a periodized Gaussian `G`.
    pub fn gaussian(amplitude: f64, bump: f64, center: f64, width: f64, decay: f64, x_period: f64) -> Result<Self> {
        Self::new(amplitude, 1.0, bump, Shape::Gaussian { center, width }, decay, x_period)
    }

    pub fn zero(x_period: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, Shape::Flat, 0.0, x_period).expect("zero profile is valid")
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn decay(&self) -> f64 {
        self.decay
    }
    pub fn shape(&self) -> Shape {
        self.shape
    }
    pub fn x_period(&self) -> f64 {
        self.x_period
    }

    /// Whether `U > 0` for every `t` and `x`.
    pub fn is_positive(&self) -> bool {
        let shape_lo = match self.shape {
            Shape::Flat => 0.0,
            Shape::Sine { mode } if mode > 0 => -self.bump.abs(),
            Shape::Sine { .. } => 0.0,
            Shape::Gaussian { .. } => self.bump.min(0.0) * self.gaussian_peak(),
        };
        self.amplitude > 0.0 && self.base + shape_lo > 0.0
    }

    fn gaussian_peak(&self) -> f64 {
        match self.shape {
            Shape::Gaussian { center, .. } => self.shape_derivative(0, center),
            _ => 0.0,
        }
    }

    /// `d^n/dx^n shape(x)`
    fn shape_derivative(&self, n: usize, x: f64) -> f64 {
        match self.shape {
            Shape::Flat => 0.0,
            Shape::Sine { mode } => {
                let k = 2.0 * PI * mode as f64 / self.x_period;
                libm::pow(k, n as f64) * libm::sin(k * x + n as f64 * PI / 2.0)
            }
            Shape::Gaussian { center, width } => {
                let images = (6.0 * width / self.x_period) as i64 + 2;
                let mut s = 0.0;
                for m in -images..=images {
                    let z = (x - center - m as f64 * self.x_period) / width;
                    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                    s += sign * hermite(n, z) * libm::exp(-0.5 * z * z);
                }
                s / libm::pow(width, n as f64)
            }
        }
    }

    /// `d_t^a_t d_x^a_x U(t, x)` in closed form.
    pub fn derivative(&self, a_t: usize, a_x: usize, t: f64, x: f64) -> f64 {
        let time = libm::pow(-self.decay, a_t as f64) * libm::exp(-self.decay * t);
        let space = if a_x == 0 {
            self.base + self.bump * self.shape_derivative(0, x)
        } else {
            self.bump * self.shape_derivative(a_x, x)
        };
        self.amplitude * time * space
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.derivative(0, 0, t, x)
    }

    /// `p_x = -(U_t + U U_x)`
    pub fn px(&self, t: f64, x: f64) -> f64 {
        -(self.derivative(1, 0, t, x) + self.value(t, x) * self.derivative(0, 1, t, x))
    }

    /// Wall-parallel array of `d_t^a_t d_x^a_x U` at the grid's x nodes.
    pub fn row(&self, a_t: usize, a_x: usize, t: f64, grid: &Grid) -> Vec<f64> {
        (0..grid.nx())
            .map(|i| self.derivative(a_t, a_x, t, grid.x(i)))
            .collect()
    }

    /// The same, broadcast in y.
    pub fn field(&self, a_t: usize, a_x: usize, t: f64, grid: &Grid) -> Field {
        Field::from_row(grid, &self.row(a_t, a_x, t, grid))
    }

    /// Discrete `H^s` norm over one x-period at time `t`.
    pub fn sobolev_norm(&self, t: f64, s: usize, grid: &Grid) -> f64 {
        let mut total = 0.0;
        for b in 0..=s {
            let r = self.row(0, b, t, grid);
            total += r.iter().map(|v| v * v).sum::<f64>() * grid.hx();
        }
        libm::sqrt(total)
    }

    /// `H^s` norm on `[0, t_final] x period`, all mixed `t`, `x` derivatives
    /// of total order `<= s`, trapezoid rule in time with `nt` intervals.
    pub fn spacetime_norm(&self, t_final: f64, s: usize, nt: usize, grid: &Grid) -> f64 {
        let nt = nt.max(1);
        let ht = t_final / nt as f64;
        let mut total = 0.0;
        for n in 0..=nt {
            let t = n as f64 * ht;
            let w = if n == 0 || n == nt { 0.5 } else { 1.0 };
            let mut at_t = 0.0;
            for order in 0..=s {
                for a_t in 0..=order {
                    let r = self.row(a_t, order - a_t, t, grid);
                    at_t += r.iter().map(|v| v * v).sum::<f64>() * grid.hx();
                }
            }
            total += w * at_t * ht;
        }
        libm::sqrt(total)
    }
}

/// Pressure gradient broadcast in y.
pub fn pressure_gradient(euler: &EulerData, t: f64, grid: &Grid) -> Field {
    let row: Vec<f64> = (0..grid.nx()).map(|i| euler.px(t, grid.x(i))).collect();
    Field::from_row(grid, &row)
}

/// Discrete `H^s` norm of `U(t, .)`.
pub fn euler_sobolev_norm(euler: &EulerData, t: f64, s: usize, grid: &Grid) -> f64 {
    euler.sobolev_norm(t, s, grid)
}

/// Probabilists' Hermite polynomial `He_n(z)`.
fn hermite(n: usize, z: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, z);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}
