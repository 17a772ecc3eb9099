//! Wall traces of `u` and `omega`.

use crate::calculus::dy;
use crate::diagnostics::norms::trace_sobolev_norm;
use crate::field::Field;
use crate::grid::Grid;
use crate::wall::Wall;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceNorms {
    /// `|u|_{y=0}|_{H^k}`
    pub u_trace: f64,
    /// `|omega|_{y=0}|_{H^k}`
    pub omega_trace: f64,
    /// `max |omega - beta u| / max |omega|` on the wall; zero for Dirichlet.
    pub robin_mismatch: f64,
}

pub fn beta_trace_norms(u: &Field, grid: &Grid, k: usize, wall: Wall) -> TraceNorms {
    let u0 = u.row(0);
    let omega0 = dy(u, grid, 1).row(0);
    let robin_mismatch = match wall {
        Wall::Robin(beta) => {
            let scale = omega0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let worst = u0
                .iter()
                .zip(&omega0)
                .fold(0.0f64, |m, (a, b)| m.max((b - beta * a).abs()));
            if scale > 0.0 {
                worst / scale
            } else {
                worst
            }
        }
        Wall::Dirichlet => 0.0,
    };
    TraceNorms {
        u_trace: trace_sobolev_norm(&u0, grid, k),
        omega_trace: trace_sobolev_norm(&omega0, grid, k),
        robin_mismatch,
    }
}
