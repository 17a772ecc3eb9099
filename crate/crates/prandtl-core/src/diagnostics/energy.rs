//! The energy functional
//!
//! ```text
//! E(t) = sum_{|alpha|+sigma <= k} ||W_{alpha,sigma}||^2_{L^2_{ell+sigma}}
//!      + sum_{|alpha| <= k} int (beta - u_yy/u_y)^-1 W_alpha|_{y=0}^2 dx   (Robin)
//! ```
//!
//! with the Riccati envelope fitted to its time series.

use alloc::vec::Vec;

use crate::calculus::{levels_for, time_derivative_of, FlowHistory};
use crate::diagnostics::norms::weighted_norm_rows;
use crate::diagnostics::transform::{compute_w, curvature_ratio, Probe};
use crate::error::{invalid, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex};
use crate::wall::Wall;

/// Exponent `s` of the envelope; only `lambda` is fitted.
pub const ENVELOPE_S: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub ell: f64,
    pub k: usize,
    pub wall: Wall,
    /// Allowed growth factor `M` in `E(T) <= M^2 A`.
    pub growth_factor: f64,
}

impl EnergyParams {
    pub fn new(ell: f64, k: usize, wall: Wall) -> Self {
        Self {
            ell,
            k,
            wall,
            growth_factor: 2.0,
        }
    }

    /// Levels a full record needs.
    pub fn levels(&self) -> usize {
        levels_for(self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    /// `||W_{alpha,sigma}||^2_{L^2_{ell+sigma}}` per index.
    pub parts: Vec<(MultiIndex, f64)>,
    /// Wall integral; zero for Dirichlet.
    pub boundary: f64,
    pub total: f64,
    /// `||U(t)||^2_{H^{k+1}}`
    pub euler_norm_sq: f64,
    /// `||omega_y||^2_{L^2_{ell+1}}`
    pub omega_y_sq: f64,
    /// `max |Q_1|` over trusted interior nodes.
    pub q1_max: f64,
    /// `max |Q_2|` on the wall (Robin only).
    pub q2_max: f64,
    /// `max |Q_3|` on the wall over `|alpha| <= k` (Robin only).
    pub q3_max: f64,
    /// `max u_yy/u_y` on the wall.
    pub wall_curvature_max: f64,
    pub masked: usize,
}

/// Energy record at the latest level; the history must hold
/// [`EnergyParams::levels`] levels.
pub fn energy_record(history: &FlowHistory, euler: &EulerData, grid: &Grid, params: &EnergyParams) -> Result<EnergyRecord> {
    let t = history.t_last();
    let ny = grid.ny();
    let mut parts = Vec::new();
    let mut boundary = 0.0;
    let mut masked = 0;
    let p = Probe::new(history, grid)?;
    let r0 = p.r.row(0);
    for idx in MultiIndex::all_up_to(params.k) {
        let w = compute_w(history, euler, grid, idx)?;
        masked = masked.max(w.masked);
        let n = weighted_norm_rows(&w.values, grid, params.ell + idx.sigma as f64, 0, ny, Some(&w.mask));
        parts.push((idx, n * n));
        if idx.sigma == 0 {
            if let Wall::Robin(beta) = params.wall {
                let s: f64 = (0..grid.nx())
                    .map(|i| w.values.at(i, 0) * w.values.at(i, 0) / (beta - r0[i]))
                    .sum();
                boundary += s * grid.hx();
            }
        }
    }
    let total = parts.iter().map(|p| p.1).sum::<f64>() + boundary;
    let euler_norm = euler.sobolev_norm(t, params.k + 1, grid);
    let wy = weighted_norm_rows(&p.uyy, grid, params.ell + 1.0, 0, ny, Some(&p.mask));
    let mut q1_max: f64 = 0.0;
    if let Some(uyt) = &p.uyt {
        for i in 0..grid.nx() {
            for j in 1..ny - 1 {
                let k = i * ny + j;
                if !p.mask[k] {
                    continue;
                }
                let uy = p.uy.at(i, j);
                let r = p.r.at(i, j);
                let q1 = -uyt.at(i, j) / uy - p.u.at(i, j) * p.uyx.at(i, j) / uy - p.uyyy.at(i, j) / uy + 2.0 * r * r;
                q1_max = q1_max.max(q1.abs());
            }
        }
    }
    let (q2_max, q3_max) = match params.wall {
        Wall::Robin(beta) if history.len() >= 2 => wall_q_terms(history, euler, grid, &p, beta, params.k)?,
        _ => (0.0, 0.0),
    };
    Ok(EnergyRecord {
        t,
        parts,
        boundary,
        total,
        euler_norm_sq: euler_norm * euler_norm,
        omega_y_sq: wy * wy,
        q1_max,
        q2_max,
        q3_max,
        wall_curvature_max: r0.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        masked,
    })
}

fn wall_q_terms(
    history: &FlowHistory,
    euler: &EulerData,
    grid: &Grid,
    p: &Probe,
    beta: f64,
    k: usize,
) -> Result<(f64, f64)> {
    let t = history.t_last();
    let rt = time_derivative_of(history, 1, 1, |h| curvature_ratio(h, grid))?.row(0);
    let r0 = p.r.row(0);
    let rx = crate::calculus::dx_row(&r0, grid.hx(), 1);
    let mut q2_max: f64 = 0.0;
    let mut q3_max: f64 = 0.0;
    for i in 0..grid.nx() {
        let x = grid.x(i);
        let u = p.u.at(i, 0);
        let s = p.uyyy.at(i, 0) / p.uy.at(i, 0);
        let d = beta - r0[i];
        q2_max = q2_max.max(((rt[i] + u * rx[i]) / d - s).abs());
        for a in MultiIndex::tangential_up_to(k) {
            let au = euler.derivative(a.a_t, a.a_x, t, x);
            let aut = euler.derivative(a.a_t + 1, a.a_x, t, x);
            let aux = euler.derivative(a.a_t, a.a_x + 1, t, x);
            let dev = u - euler.value(t, x);
            let b_t = beta * aut / d + beta * au * rt[i] / (d * d);
            let b_x = beta * aux / d + beta * au * rx[i] / (d * d);
            let q3 = -dev * aux + b_t + u * b_x - s * beta * au / d;
            q3_max = q3_max.max(q3.abs());
        }
    }
    Ok((q2_max, q3_max))
}

/// Fitted envelope `E(t) <= A / (1 - 2 lambda A t)` (the `s = 3` case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// `A = E(0) + max_t ||U||^2_{H^{k+1}}`
    pub a: f64,
    pub lambda: f64,
    /// Envelope blow-up time `1 / (2 lambda A)`; infinite when `lambda = 0`.
    pub blowup_time: f64,
    /// `sqrt(max E / A)`, 1 when everything vanishes.
    pub m_hat: f64,
}

impl EnvelopeFit {
    /// Envelope value `dt` after the first record.
    pub fn at(&self, dt: f64) -> f64 {
        let den = 1.0 - (ENVELOPE_S - 1.0) * self.lambda * libm::pow(self.a, (ENVELOPE_S - 1.0) / 2.0) * dt;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            self.a * libm::pow(den, -2.0 / (ENVELOPE_S - 1.0))
        }
    }
}

/// Smallest `lambda >= 0` whose envelope lies above every record.
pub fn fit_envelope(records: &[EnergyRecord]) -> Result<EnvelopeFit> {
    let first = records.first().ok_or_else(|| invalid("records", "empty energy series"))?;
    let u_max = records.iter().map(|r| r.euler_norm_sq).fold(0.0, f64::max);
    let a = first.total + u_max;
    let e_max = records.iter().map(|r| r.total).fold(0.0, f64::max);
    if a <= 0.0 {
        return Ok(EnvelopeFit {
            a,
            lambda: 0.0,
            blowup_time: f64::INFINITY,
            m_hat: 1.0,
        });
    }
    let c = (ENVELOPE_S - 1.0) * libm::pow(a, (ENVELOPE_S - 1.0) / 2.0);
    let mut lambda: f64 = 0.0;
    for r in &records[1..] {
        let dt = r.t - first.t;
        if r.total > a && dt > 0.0 {
            // A (1 - c lambda dt)^(-2/(s-1)) >= E
            let need = (1.0 - libm::pow(a / r.total, (ENVELOPE_S - 1.0) / 2.0)) / (c * dt);
            lambda = lambda.max(need);
        }
    }
    let blowup_time = if lambda > 0.0 { 1.0 / (c * lambda) } else { f64::INFINITY };
    Ok(EnvelopeFit {
        a,
        lambda,
        blowup_time,
        m_hat: libm::sqrt(e_max / a),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub records: Vec<EnergyRecord>,
    pub envelope: EnvelopeFit,
    /// `E(T) <= M^2 A`
    pub growth_ok: bool,
    /// Envelope lies on or above every record and stays finite up to the
    /// last record.
    pub envelope_dominates: bool,
    /// `max_t max_x (u_yy/u_y)|_{y=0} + 1`
    pub delta_beta: f64,
}

/// Energy records for every level from the first one with a full history.
///
/// `levels[n]` sits at `t0 + n dt`.
pub fn energy_series(levels: &[Field], t0: f64, dt: f64, euler: &EulerData, grid: &Grid, params: &EnergyParams) -> Result<EnergySeries> {
    let need = params.levels();
    if levels.len() < need {
        return Err(crate::error::Error::HistoryTooShort {
            required: need,
            available: levels.len(),
        });
    }
    let mut records = Vec::with_capacity(levels.len() + 1 - need);
    for n in need - 1..levels.len() {
        let window = &levels[n + 1 - need..=n];
        let h = FlowHistory::new(window, t0 + n as f64 * dt, dt)?;
        records.push(energy_record(&h, euler, grid, params)?);
    }
    let envelope = fit_envelope(&records)?;
    let last = records.last().expect("nonempty");
    let m2 = params.growth_factor * params.growth_factor;
    let growth_ok = last.total <= m2 * envelope.a;
    let first_t = records[0].t;
    let envelope_dominates = envelope.blowup_time > last.t - first_t
        && records
            .iter()
            .all(|r| r.total <= envelope.at(r.t - first_t) * (1.0 + 1e-12));
    let delta_beta = records
        .iter()
        .map(|r| r.wall_curvature_max)
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    Ok(EnergySeries {
        records,
        envelope,
        growth_ok,
        envelope_dominates,
        delta_beta,
    })
}
