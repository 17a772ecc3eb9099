//! Pointwise transformation identities behind the `W` equations, evaluated
//! with finite differences so their residuals measure discretization error.
//!
//! With `f = d^alpha (u - U)`, `g = f / u_y`, `W = u_y d_y g` and
//! `T(a) = u_y d_y (a / u_y)`:
//!
//! ```text
//! YY:        T(f_yy) = W_yy + (u_yyy/u_y - 2 r^2) W + T(g u_yyy)
//! Time:      T(f_t)  = W_t - (u_yt/u_y) W + T(g u_yt)
//! Space:     T(f_x)  = W_x - (u_yx/u_y) W + T(g u_yx)
//! Recursion: d_t d^alpha u_y = W_{alpha+t} + r d_t f
//! Wall:      u_yyy = u_yt + u u_yx      at y = 0
//! ```
//!
//! where `r = u_yy / u_y`. The interior identities are sampled on a window
//! away from both ends, because composing one-sided stencils at the ends
//! only gives first order there.

use crate::calculus::{dx, dy, levels_for, mixed_derivative, time_derivative_of, FlowHistory, Target};
use crate::diagnostics::transform::{vorticity_mask, Probe};
use crate::error::{Error, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    YY,
    Time,
    Space,
    Recursion,
    Wall,
}

impl Identity {
    pub const ALL: [Identity; 5] = [Identity::YY, Identity::Time, Identity::Space, Identity::Recursion, Identity::Wall];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::YY => "yy",
            Identity::Time => "time",
            Identity::Space => "space",
            Identity::Recursion => "recursion",
            Identity::Wall => "wall",
        }
    }

    /// Levels needed for tangential index `alpha`.
    pub fn levels(&self, alpha: MultiIndex) -> usize {
        match self {
            Identity::YY | Identity::Space => levels_for(alpha.a_t).max(3),
            Identity::Time => levels_for(alpha.a_t) + 2,
            Identity::Recursion => levels_for(alpha.a_t + 1),
            Identity::Wall => levels_for(1),
        }
    }
}

/// Max pointwise residual of `identity` at the latest level.
///
/// `u_hist` holds `u` and `dev_hist` holds `u - U` at the same times; the
/// interior identities use rows with `y` in `window`.
pub fn identity_check(
    identity: Identity,
    u_hist: &FlowHistory,
    dev_hist: &FlowHistory,
    grid: &Grid,
    alpha: MultiIndex,
    window: (f64, f64),
) -> Result<f64> {
    let need = identity.levels(alpha);
    if u_hist.len() < need || dev_hist.len() < need {
        return Err(Error::HistoryTooShort {
            required: need,
            available: u_hist.len().min(dev_hist.len()),
        });
    }
    let alpha = MultiIndex::new(alpha.a_t, alpha.a_x, 0);
    let none = EulerData::zero(grid.x_period());
    let p = Probe::new(u_hist, grid)?;
    let d = |h: &FlowHistory, idx: MultiIndex| mixed_derivative(h, &none, grid, idx, Target::U);
    let w_of = |uh: &FlowHistory, dh: &FlowHistory, idx: MultiIndex| -> Result<Field> {
        let uy = dy(uh.latest(), grid, 1);
        let mask = vorticity_mask(&uy);
        Ok(crate::diagnostics::transform::quotient_transform(&d(dh, idx)?, &uy, &mask, grid))
    };

    if identity == Identity::Wall {
        let uyt = p.uyt.as_ref().expect("three levels");
        let mut worst: f64 = 0.0;
        for i in 0..grid.nx() {
            let lhs = p.uyyy.at(i, 0);
            let rhs = uyt.at(i, 0) + p.u.at(i, 0) * p.uyx.at(i, 0);
            worst = worst.max((lhs - rhs).abs());
        }
        return Ok(worst);
    }

    let f = d(dev_hist, alpha)?;
    let g = p.over_uy(&f);
    let w = w_of(u_hist, dev_hist, alpha)?;
    let (lhs, rhs) = match identity {
        Identity::YY => {
            let lhs = p.transform(&dy(&f, grid, 2), grid);
            let s = p.over_uy(&p.uyyy);
            let coef = s.sub(&p.r.mul(&p.r).scale(2.0));
            let rhs = dy(&w, grid, 2).add(&coef.mul(&w)).add(&p.transform(&g.mul(&p.uyyy), grid));
            (lhs, rhs)
        }
        Identity::Time => {
            let uyt = p.uyt.clone().expect("history has two levels");
            let lhs = p.transform(&d(dev_hist, alpha.plus_t())?, grid);
            let wt = time_derivative_of(u_hist, 1, levels_for(alpha.a_t), |uh| {
                let lag = libm::round((u_hist.t_last() - uh.t_last()) / u_hist.dt()) as usize;
                let dh = dev_hist.window(lag, uh.len())?;
                w_of(uh, &dh, alpha)
            })?;
            let rhs = wt.sub(&p.over_uy(&uyt).mul(&w)).add(&p.transform(&g.mul(&uyt), grid));
            (lhs, rhs)
        }
        Identity::Space => {
            let lhs = p.transform(&d(dev_hist, alpha.plus_x())?, grid);
            let rhs = dx(&w, grid, 1)
                .sub(&p.over_uy(&p.uyx).mul(&w))
                .add(&p.transform(&g.mul(&p.uyx), grid));
            (lhs, rhs)
        }
        Identity::Recursion => {
            let lhs = d(u_hist, MultiIndex::new(alpha.a_t + 1, alpha.a_x, 1))?;
            let rhs = w_of(u_hist, dev_hist, alpha.plus_t())?.add(&p.r.mul(&d(dev_hist, alpha.plus_t())?));
            (lhs, rhs)
        }
        Identity::Wall => unreachable!(),
    };
    let mut worst: f64 = 0.0;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let y = grid.y(j);
            if y < window.0 || y > window.1 || !p.mask[i * grid.ny() + j] {
                continue;
            }
            worst = worst.max((lhs.at(i, j) - rhs.at(i, j)).abs());
        }
    }
    Ok(worst)
}
