//! Mesh, weights, multi-indices and quadrature.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::field::Field;

/// Smallest admissible node count in either direction.
pub const MIN_NODES: usize = 8;

/// Uniform mesh on `[0, x_period) x [0, y_max]`, periodic in x.
///
/// Node `(i, j)` sits at `(i * hx, j * hy)`; row `j = 0` is the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    x_period: f64,
    y_max: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, x_period: f64, y_max: f64) -> Result<Self> {
        if nx < MIN_NODES {
            return Err(invalid("nx", format!("{nx} < {MIN_NODES}")));
        }
        if ny < MIN_NODES {
            return Err(invalid("ny", format!("{ny} < {MIN_NODES}")));
        }
        if !(x_period.is_finite() && x_period > 0.0) {
            return Err(invalid("x_period", format!("{x_period} is not a positive finite length")));
        }
        if !(y_max.is_finite() && y_max > 0.0) {
            return Err(invalid("y_max", format!("{y_max} is not a positive finite length")));
        }
        Ok(Self {
            nx,
            ny,
            x_period,
            y_max,
            hx: x_period / nx as f64,
            hy: y_max / (ny - 1) as f64,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn x_period(&self) -> f64 {
        self.x_period
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn hx(&self) -> f64 {
        self.hx
    }
    pub fn hy(&self) -> f64 {
        self.hy
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    /// `y_j = j * hy`; the wall is exactly zero and the top exactly `y_max`.
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            j as f64 * self.hy
        }
    }

    /// Periodic index wrap for signed offsets.
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }

    /// Trapezoid weights in y (without the `hy` factor), fixed order.
    pub fn y_trapezoid_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.ny {
            0.5
        } else {
            1.0
        }
    }
}

/// Convenience wrapper matching the usual argument order.
pub fn build_grid(nx: usize, ny: usize, x_period: f64, y_max: f64) -> Result<Grid> {
    Grid::new(nx, ny, x_period, y_max)
}

/// The weight `(1 + y)^p`.
pub fn weight(y: f64, power: f64) -> f64 {
    libm::pow(1.0 + y, power)
}

/// Weight exponent, initial decay exponent and the highest tracked order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub ell: f64,
    pub theta: f64,
    pub k_max: usize,
}

impl WeightParams {
    pub fn new(ell: f64, theta: f64, k_max: usize) -> Result<Self> {
        if !(ell.is_finite() && ell > 1.0) {
            return Err(invalid("ell", format!("{ell} must exceed 1")));
        }
        if !(theta.is_finite() && theta > (ell + 1.0) / 2.0) {
            return Err(invalid(
                "theta",
                format!("{theta} must exceed (ell + 1)/2 = {}", (ell + 1.0) / 2.0),
            ));
        }
        if k_max < 1 {
            return Err(invalid("k_max", "must be at least 1"));
        }
        Ok(Self { ell, theta, k_max })
    }
}

/// Derivative counts `(a_t, a_x, sigma)` for `d_t^a_t d_x^a_x d_y^sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub a_t: usize,
    pub a_x: usize,
    pub sigma: usize,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex::new(0, 0, 0);

    pub const fn new(a_t: usize, a_x: usize, sigma: usize) -> Self {
        Self { a_t, a_x, sigma }
    }

    /// `|alpha|`, the tangential order.
    pub fn tangential(&self) -> usize {
        self.a_t + self.a_x
    }

    pub fn order(&self) -> usize {
        self.a_t + self.a_x + self.sigma
    }

    pub fn plus_t(self) -> Self {
        Self::new(self.a_t + 1, self.a_x, self.sigma)
    }
    pub fn plus_x(self) -> Self {
        Self::new(self.a_t, self.a_x + 1, self.sigma)
    }
    pub fn plus_y(self) -> Self {
        Self::new(self.a_t, self.a_x, self.sigma + 1)
    }

    pub fn checked_sub(self, other: Self) -> Option<Self> {
        Some(Self::new(
            self.a_t.checked_sub(other.a_t)?,
            self.a_x.checked_sub(other.a_x)?,
            self.sigma.checked_sub(other.sigma)?,
        ))
    }

    /// Every index with total order `<= k`, sorted by (order, a_t, a_x).
    pub fn all_up_to(k: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for n in 0..=k {
            for a_t in (0..=n).rev() {
                for a_x in (0..=n - a_t).rev() {
                    out.push(Self::new(a_t, a_x, n - a_t - a_x));
                }
            }
        }
        out
    }

    /// Tangential indices `|alpha| <= k` with `sigma = 0`.
    pub fn tangential_up_to(k: usize) -> Vec<Self> {
        Self::all_up_to(k).into_iter().filter(|m| m.sigma == 0).collect()
    }

    /// Nonzero sub-indices `b <= self` with their Leibniz coefficient.
    pub fn proper_parts(self) -> Vec<(Self, f64)> {
        let mut out = Vec::new();
        for a_t in 0..=self.a_t {
            for a_x in 0..=self.a_x {
                for s in 0..=self.sigma {
                    let b = Self::new(a_t, a_x, s);
                    if b == Self::ZERO {
                        continue;
                    }
                    let c = binomial(self.a_t, a_t) * binomial(self.a_x, a_x) * binomial(self.sigma, s);
                    out.push((b, c));
                }
            }
        }
        out
    }
}

impl core::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "t{}x{}y{}", self.a_t, self.a_x, self.sigma)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Trapezoid-in-y, rectangle-in-x approximation of the integral over the strip.
pub fn quadrature_2d(f: &Field, grid: &Grid) -> Result<f64> {
    f.check_shape(grid)?;
    let mut total = 0.0;
    for i in 0..grid.nx() {
        let col = f.column(i);
        let mut s = 0.0;
        for (j, v) in col.iter().enumerate() {
            if v.is_nan() {
                return Err(Error::NonFinite { what: "quadrature integrand" });
            }
            s += grid.y_trapezoid_weight(j) * v;
        }
        total += s;
    }
    Ok(total * grid.hx() * grid.hy())
}

/// Rectangle rule over one x-period for a wall-row array.
pub fn quadrature_x(values: &[f64], grid: &Grid) -> f64 {
    values.iter().sum::<f64>() * grid.hx()
}
