//! Run setups and the comparative experiments: analysis of a single run,
//! two-solution stability pairs and sweeps over the Robin parameter.
//!
//! Solving and assembling are separate so callers can solve the runs of an
//! experiment in parallel and assemble the report afterwards.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::{dt_stencil, dx, dx_row, dy, levels_for, reconstruct_v, time_derivative_of, FlowHistory};
use crate::diagnostics::decay::{decay_fit, ls_slope, DecayFit};
use crate::diagnostics::energy::{energy_series, EnergyParams, EnergySeries};
use crate::diagnostics::hardy::{hardy_equivalence_check, HardyCheck};
use crate::diagnostics::norms::{row_l2, weighted_norm, weighted_norm_rows, weighted_sobolev_norm};
use crate::diagnostics::residuals::{w_equation_residual, ResidualPair};
use crate::diagnostics::traces::{beta_trace_norms, TraceNorms};
use crate::diagnostics::transform::{curvature_ratio, vorticity_mask};
use crate::error::{invalid, Result};
use crate::euler::EulerData;
use crate::field::Field;
use crate::grid::{Grid, MultiIndex, WeightParams};
use crate::initial::{make_initial_data, validate_compatibility, CompatibilityReport, InitialData, InitialDataSpec, Perturbation};
use crate::linear_step::{ColumnMap, StepConfig};
use crate::picard::{residual, solve, PicardConfig, TrajectorySolution};
use crate::wall::Wall;

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub nx: usize,
    pub ny: usize,
    pub x_period: f64,
    pub y_max: f64,
    pub weights: WeightParams,
    pub euler: EulerData,
    pub wall: Wall,
    pub epsilon: f64,
    pub tail_tolerance: f64,
    pub perturbation: Option<Perturbation>,
    pub dt: f64,
    pub cfl_limit: f64,
    pub picard: PicardConfig,
    /// Constant in the outer-flow smallness check `||U||_{H^{k+1}} <= C0 epsilon`.
    pub euler_constant: f64,
}

impl RunSetup {
    /// The shipped small-data configuration.
    pub fn default_small_data() -> Self {
        let x_period = 2.0 * core::f64::consts::PI;
        let ell = 2.0;
        Self {
            nx: 32,
            ny: 257,
            x_period,
            y_max: 32.0,
            weights: WeightParams {
                ell,
                theta: 3.0,
                k_max: 2,
            },
            euler: EulerData::sinusoidal(1e-2, 0.5, 1, 0.5, x_period).expect("valid profile"),
            wall: Wall::Robin(50.0),
            epsilon: 1e-2,
            tail_tolerance: 1e-6,
            perturbation: None,
            dt: 0.01,
            cfl_limit: 0.5,
            picard: PicardConfig {
                t_final: 1.0,
                max_iters: 30,
                tol: 1e-8,
                snapshot_stride: 1,
                ell,
                monotonicity_guard: true,
            },
            euler_constant: 1.0,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.x_period, self.y_max)
    }

    pub fn data_spec(&self) -> InitialDataSpec {
        InitialDataSpec {
            theta: self.weights.theta,
            epsilon: self.epsilon,
            wall: self.wall,
            ell: self.weights.ell,
            k: self.weights.k_max,
            tail_tolerance: self.tail_tolerance,
            perturbation: self.perturbation,
        }
    }

    pub fn step_config(&self) -> Result<StepConfig> {
        let mut s = StepConfig::new(self.dt, self.wall)?;
        s.cfl_limit = self.cfl_limit;
        s.validate()?;
        Ok(s)
    }

    pub fn with_wall(&self, wall: Wall) -> Self {
        Self { wall, ..self.clone() }
    }

    pub fn with_perturbation(&self, perturbation: Option<Perturbation>) -> Self {
        Self {
            perturbation,
            ..self.clone()
        }
    }

    /// Cross-field checks; returns warnings for soft violations.
    pub fn validate(&self) -> Result<Vec<String>> {
        WeightParams::new(self.weights.ell, self.weights.theta, self.weights.k_max)?;
        self.data_spec().validate()?;
        self.picard.validate()?;
        self.picard.steps(self.dt)?;
        let grid = self.grid()?;
        let step = self.step_config()?;
        if (self.euler.x_period() - self.x_period).abs() > 1e-12 * self.x_period {
            return Err(invalid("x_period", "outer flow and grid periods differ"));
        }
        let mut warnings = Vec::new();
        let speed = 2.0
            * (0..grid.nx())
                .map(|i| self.euler.value(0.0, grid.x(i)).abs())
                .fold(0.0, f64::max);
        if speed > 0.0 && step.dt > step.cfl_limit * grid.hx() / speed {
            warnings.push(format!(
                "dt = {} may violate the advection limit {:e}",
                step.dt,
                step.cfl_limit * grid.hx() / speed
            ));
        }
        let un = self.euler.sobolev_norm(0.0, self.weights.k_max + 1, &grid);
        if un > self.euler_constant * self.epsilon {
            warnings.push(format!(
                "local-existence mode: ||U||_H^{} = {un:e} exceeds {} * epsilon",
                self.weights.k_max + 1,
                self.euler_constant
            ));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub grid: Grid,
    pub data: InitialData,
    pub compat: CompatibilityReport,
    pub traj: TrajectorySolution,
    pub warnings: Vec<String>,
}

/// Builds the data and solves one run.
pub fn execute(setup: &RunSetup, exec: &dyn ColumnMap) -> Result<RunOutcome> {
    let (grid, data, compat, warnings) = prepare(setup)?;
    let traj = solve(&data.u0, &setup.euler, &grid, &setup.step_config()?, &setup.picard, exec)?;
    Ok(finish(grid, data, compat, traj, warnings))
}

/// Rebuilds the outcome of a stored trajectory without solving again.
pub fn outcome_from_trajectory(setup: &RunSetup, traj: TrajectorySolution) -> Result<RunOutcome> {
    let (grid, data, compat, warnings) = prepare(setup)?;
    for u in &traj.levels {
        u.check_shape(&grid)?;
    }
    Ok(finish(grid, data, compat, traj, warnings))
}

fn prepare(setup: &RunSetup) -> Result<(Grid, InitialData, CompatibilityReport, Vec<String>)> {
    let mut warnings = setup.validate()?;
    let grid = setup.grid()?;
    let spec = setup.data_spec();
    let data = make_initial_data(&spec, &setup.euler, &grid)?;
    let compat = validate_compatibility(&data, &spec, &setup.euler, &grid);
    warnings.extend(compat.warnings.iter().cloned());
    Ok((grid, data, compat, warnings))
}

fn finish(grid: Grid, data: InitialData, compat: CompatibilityReport, traj: TrajectorySolution, mut warnings: Vec<String>) -> RunOutcome {
    if !traj.converged {
        warnings.push(format!(
            "Picard iteration stopped after {} sweeps at discrepancy {:e}",
            traj.iterate_count,
            traj.convergence_history.last().copied().unwrap_or(f64::NAN)
        ));
    }
    RunOutcome {
        grid,
        data,
        compat,
        traj,
        warnings,
    }
}

/// Diagnostics of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    /// Smallest `omega` over all snapshots.
    pub min_omega: f64,
    pub decay_initial: DecayFit,
    pub decay_final: DecayFit,
    pub hardy: Vec<HardyCheck>,
    pub energy: EnergySeries,
    pub w_residuals: Vec<(MultiIndex, ResidualPair)>,
    pub pde_residual: Vec<(f64, f64)>,
    pub contraction: Vec<f64>,
    pub strictly_decreasing: bool,
    pub warnings: Vec<String>,
}

pub fn analyze(setup: &RunSetup, outcome: &RunOutcome) -> Result<RunAnalysis> {
    let grid = &outcome.grid;
    let traj = &outcome.traj;
    let ell = setup.weights.ell;
    let k = setup.weights.k_max;
    let mut min_omega = f64::INFINITY;
    for n in traj.snapshot_levels() {
        min_omega = min_omega.min(dy(&traj.levels[n], grid, 1).min());
    }
    let window = (0.25 * grid.y_max(), 0.75 * grid.y_max());
    let decay_initial = decay_fit(&dy(&traj.levels[0], grid, 1), grid, window)?;
    let last = traj.levels.len() - 1;
    let decay_final = decay_fit(&dy(&traj.levels[last], grid, 1), grid, window)?;

    let h = traj.history(last, levels_for(k) + 2)?;
    let mut hardy = Vec::new();
    let mut w_residuals = Vec::new();
    for idx in MultiIndex::all_up_to(k) {
        hardy.push(hardy_equivalence_check(&h, &setup.euler, grid, idx, ell)?);
        if h.len() >= crate::diagnostics::residuals::w_residual_levels(idx) {
            w_residuals.push((idx, w_equation_residual(&h, &setup.euler, grid, idx, setup.wall, ell)?));
        }
    }
    let params = EnergyParams::new(ell, k, setup.wall);
    let energy = energy_series(&traj.levels, 0.0, traj.dt, &setup.euler, grid, &params)?;
    let pde_residual = residual(traj, &setup.euler, grid, ell, None)?;
    let contraction = traj.contraction_ratios();
    let strictly_decreasing = traj.convergence_history.windows(2).all(|w| w[1] < w[0]);
    let mut warnings = Vec::new();
    if let Wall::Robin(beta) = setup.wall {
        if beta < energy.delta_beta {
            warnings.push(format!(
                "beta = {beta} is below the measured wall threshold {:.4}",
                energy.delta_beta
            ));
        }
    }
    Ok(RunAnalysis {
        min_omega,
        decay_initial,
        decay_final,
        hardy,
        energy,
        w_residuals,
        pde_residual,
        contraction,
        strictly_decreasing,
        warnings,
    })
}

/// Differences between two runs at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRecord {
    pub t: f64,
    /// `||u1 - u2||_{H^p_{ell-1}}`
    pub du: f64,
    /// `||omega1 - omega2||_{H^p_ell}`
    pub domega: f64,
    /// `||(u1 - u2)|_{y=0}||_{L^2}`
    pub wall_du: f64,
    /// Weighted norm of the difference-equation residual; zero at the first level.
    pub residual: f64,
}

/// Two-solution comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityPair {
    pub deltas: Vec<DeltaRecord>,
    /// `max_t ||d omega(t)|| / ||d omega(0)||`, 0 when the data coincide.
    pub amplification: f64,
    /// Largest weighted norm of the residual of the difference equation,
    /// usually attained in the start-up layer.
    pub delta_residual: f64,
    /// `max |Q_4|`, `max |Q_5|` on the mean flow at the final level.
    pub q4_max: f64,
    pub q5_max: f64,
    /// `max |Q_6|` on the wall (Robin only).
    pub q6_max: f64,
    /// Every difference field vanished identically.
    pub identical: bool,
}

/// Assembles the comparison of two trajectories solved on the same grid,
/// measuring differences in the weighted `H^p` norms.
pub fn stability_pair(
    traj1: &TrajectorySolution,
    traj2: &TrajectorySolution,
    grid: &Grid,
    wall: Wall,
    ell: f64,
    p: usize,
) -> Result<StabilityPair> {
    if traj1.levels.len() != traj2.levels.len() {
        return Err(invalid("trajectories", "level counts differ"));
    }
    let mut deltas = Vec::new();
    let mut identical = true;
    let mut delta_residual: f64 = 0.0;
    let mut deltas_all: Vec<Field> = Vec::with_capacity(traj1.levels.len());
    let mut means: Vec<Field> = Vec::with_capacity(traj1.levels.len());
    for n in 0..traj1.levels.len() {
        let d = traj1.levels[n].sub(&traj2.levels[n]);
        identical &= d.values().iter().all(|&v| v == 0.0);
        deltas.push(DeltaRecord {
            t: traj1.time(n),
            du: weighted_sobolev_norm(&d, grid, ell - 1.0, p),
            domega: weighted_sobolev_norm(&dy(&d, grid, 1), grid, ell, p),
            wall_du: row_l2(&d.row(0), grid),
            residual: 0.0,
        });
        deltas_all.push(d);
        means.push(traj1.levels[n].add(&traj2.levels[n]).scale(0.5));
    }
    for n in 1..deltas_all.len() {
        let start = (n + 1).saturating_sub(3);
        let dh = FlowHistory::new(&deltas_all[start..=n], traj1.time(n), traj1.dt)?;
        let r = delta_equation_residual(&dh, &means[n], grid)?;
        let r = weighted_norm_rows(&r, grid, ell, 1, grid.ny() - 1, None);
        deltas[n].residual = r;
        delta_residual = delta_residual.max(r);
    }
    let d0 = deltas[0].domega;
    let amplification = if d0 > 0.0 {
        deltas.iter().map(|d| d.domega / d0).fold(0.0, f64::max)
    } else {
        0.0
    };
    let last = means.len() - 1;
    let start = (last + 1).saturating_sub(3);
    let mh = FlowHistory::new(&means[start..=last], traj1.time(last), traj1.dt)?;
    let (q4_max, q5_max, q6_max) = mean_flow_q_terms(&mh, grid, wall)?;
    Ok(StabilityPair {
        deltas,
        amplification,
        delta_residual,
        q4_max,
        q5_max,
        q6_max,
        identical,
    })
}

/// `du_t + m du_x + du m_x + vm du_y + dv m_y - du_yy` with `m` the mean.
pub fn delta_equation_residual(delta_hist: &FlowHistory, mean: &Field, grid: &Grid) -> Result<Field> {
    let d = delta_hist.latest();
    let dt = dt_stencil(delta_hist, 1)?;
    let vm = reconstruct_v(mean, grid);
    let dv = reconstruct_v(d, grid);
    Ok(dt
        .add(&mean.mul(&dx(d, grid, 1)))
        .add(&d.mul(&dx(mean, grid, 1)))
        .add(&vm.mul(&dy(d, grid, 1)))
        .add(&dv.mul(&dy(mean, grid, 1)))
        .sub(&dy(d, grid, 2)))
}

fn mean_flow_q_terms(h: &FlowHistory, grid: &Grid, wall: Wall) -> Result<(f64, f64, f64)> {
    let m = h.latest();
    let my = dy(m, grid, 1);
    let myy = dy(m, grid, 2);
    let myyy = dy(m, grid, 3);
    let myx = dx(&my, grid, 1);
    let vm = reconstruct_v(m, grid);
    let myt = time_derivative_of(h, 1, 1, |w| Ok(dy(w.latest(), grid, 1)))?;
    let mask = vorticity_mask(&my);
    let ny = grid.ny();
    let (mut q4, mut q5): (f64, f64) = (0.0, 0.0);
    for i in 0..grid.nx() {
        for j in 1..ny - 1 {
            if !mask[i * ny + j] {
                continue;
            }
            let w = my.at(i, j);
            let tr = myt.at(i, j) + m.at(i, j) * myx.at(i, j) + vm.at(i, j) * myy.at(i, j);
            let r = myy.at(i, j) / w;
            q4 = q4.max((-(tr + myyy.at(i, j)) / w + 2.0 * r * r).abs());
            q5 = q5.max(((tr - myyy.at(i, j)) / w).abs());
        }
    }
    let q6 = match wall {
        Wall::Robin(beta) => {
            let r0 = curvature_ratio(h, grid)?.row(0);
            let rt = time_derivative_of(h, 1, 1, |w| curvature_ratio(w, grid))?.row(0);
            let rx = dx_row(&r0, grid.hx(), 1);
            let mx = dx(m, grid, 1);
            (0..grid.nx())
                .map(|i| {
                    let q = (rt[i] + m.at(i, 0) * rx[i]) / (beta - r0[i]) - myyy.at(i, 0) / my.at(i, 0) + mx.at(i, 0);
                    q.abs()
                })
                .fold(0.0, f64::max)
        }
        Wall::Dirichlet => 0.0,
    };
    Ok((q4, q5, q6))
}

/// Outcome over several perturbation amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub amplitudes: Vec<f64>,
    pub amplifications: Vec<f64>,
    pub bound: f64,
    pub within_bound: bool,
    /// `max / min` of the amplifications.
    pub spread: f64,
    pub consistent: bool,
    pub pass: bool,
}

pub fn stability_verdict(amplitudes: &[f64], pairs: &[StabilityPair], bound: f64) -> StabilityVerdict {
    let amplifications: Vec<f64> = pairs.iter().map(|p| p.amplification).collect();
    let hi = amplifications.iter().copied().fold(0.0, f64::max);
    let lo = amplifications.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let within_bound = amplifications.iter().all(|&a| a <= bound);
    let consistent = spread <= 2.0;
    StabilityVerdict {
        amplitudes: amplitudes.to_vec(),
        amplifications,
        bound,
        within_bound,
        spread,
        consistent,
        pass: within_bound && consistent,
    }
}

/// One entry of a Robin-parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub beta: f64,
    pub traces: TraceNorms,
    /// `max_t ||u^beta - u^Dirichlet||_{L^2_{ell-1}}` over snapshots.
    pub distance_to_dirichlet: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub u_slope: f64,
    pub omega_slope: f64,
    pub monotone_distance: bool,
}

impl SweepReport {
    pub fn u_slope_ok(&self) -> bool {
        (-0.7..=-0.3).contains(&self.u_slope)
    }
    pub fn omega_slope_ok(&self) -> bool {
        (0.3..=0.7).contains(&self.omega_slope)
    }
}

/// `max_t max_x (u_yy / u_y)|_{y=0} + 1` over the snapshots of a run, the
/// smallest admissible Robin parameter.
pub fn wall_threshold(traj: &TrajectorySolution, grid: &Grid) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for n in traj.snapshot_levels() {
        let u = &traj.levels[n];
        let (w, ww) = (dy(u, grid, 1).row(0), dy(u, grid, 2).row(0));
        for (a, b) in w.iter().zip(&ww) {
            if *a > 0.0 {
                worst = worst.max(b / a);
            }
        }
    }
    worst + 1.0
}

/// Assembles the sweep from finished Robin runs and the Dirichlet run.
pub fn sweep_report(
    betas: &[f64],
    robin: &[TrajectorySolution],
    dirichlet: &TrajectorySolution,
    grid: &Grid,
    k: usize,
    ell: f64,
) -> Result<SweepReport> {
    if betas.len() < 2 || betas.len() != robin.len() {
        return Err(invalid("betas", "need one run per beta and at least two betas"));
    }
    let mut entries = Vec::new();
    for (&beta, traj) in betas.iter().zip(robin) {
        let last = traj.levels.last().expect("levels");
        let traces = beta_trace_norms(last, grid, k, Wall::Robin(beta));
        let mut dist: f64 = 0.0;
        for n in traj.snapshot_levels() {
            let d = traj.levels[n].sub(&dirichlet.levels[n]);
            dist = dist.max(weighted_norm(&d, grid, ell - 1.0));
        }
        entries.push(SweepEntry {
            beta,
            traces,
            distance_to_dirichlet: dist,
        });
    }
    let lu: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (libm::log(e.beta), libm::log(e.traces.u_trace)))
        .collect();
    let lw: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| (libm::log(e.beta), libm::log(e.traces.omega_trace)))
        .collect();
    let monotone_distance = entries
        .windows(2)
        .all(|w| w[1].distance_to_dirichlet <= w[0].distance_to_dirichlet);
    Ok(SweepReport {
        u_slope: ls_slope(&lu),
        omega_slope: ls_slope(&lw),
        monotone_distance,
        entries,
    })
}
