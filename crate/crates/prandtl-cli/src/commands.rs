//! The subcommands. Each writes its artifacts under an output directory
//! and returns a verdict; the binary maps verdicts to exit codes.

use std::path::{Path, PathBuf};

use prandtl_core::calculus::{dy, vertical_velocity_bound};
use prandtl_core::diagnostics::decay::decay_fit;
use prandtl_core::diagnostics::identities::{identity_check, Identity};
use prandtl_core::diagnostics::norms::weighted_norm;
use prandtl_core::diagnostics::traces::beta_trace_norms;
use prandtl_core::experiments::{
    analyze, execute, outcome_from_trajectory, stability_pair, stability_verdict, sweep_report, wall_threshold, RunAnalysis,
    RunOutcome, RunSetup,
};
use prandtl_core::identity_family::{IdentityFamily, SampledFamily};
use prandtl_core::mms::{MmsSettings, OrderStudy};
use prandtl_core::picard::{resweep_change, TrajectorySolution};
use prandtl_core::{Grid, MultiIndex, Wall};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader};
use crate::config::{LoadedConfig, RunConfig};
use crate::exec::RayonColumns;
use crate::output::{num, write_atomic, Check, Table, Verdict};
use crate::CliError;

/// Tolerance on the fitted tail exponent.
pub const DECAY_TOL: f64 = 0.15;
/// Target orders and tolerance of the manufactured-solution study.
pub const MMS_TIME_ORDER: f64 = 1.0;
pub const MMS_SPACE_ORDER: f64 = 2.0;
pub const MMS_ORDER_TOL: f64 = 0.3;
/// Accepted residual ratios under halving of every spacing.
pub const IDENTITY_RATIO: (f64, f64) = (3.0, 5.0);

pub struct Context {
    pub out: PathBuf,
    pub exec: RayonColumns,
}

impl Context {
    pub fn new(out: impl Into<PathBuf>, workers: usize) -> Result<Self, CliError> {
        let exec = RayonColumns::new(workers).map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { out: out.into(), exec })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Trajectory facts that the checkpoints do not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub levels: usize,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub iterate_count: usize,
    pub converged: bool,
    pub convergence_history: Vec<f64>,
    pub min_omega: Vec<f64>,
    /// Discrepancy produced by one extra sweep of the converged trajectory.
    pub resweep_change: f64,
}

pub fn checkpoint_name(level: usize) -> String {
    format!("level_{level:05}.ckpt")
}

fn header_for(setup: &RunSetup, grid: &Grid, t: f64) -> CheckpointHeader {
    CheckpointHeader {
        nx: grid.nx(),
        ny: grid.ny(),
        x_period: grid.x_period(),
        y_max: grid.y_max(),
        t,
        dt: setup.dt,
        wall: setup.wall,
        ell: setup.weights.ell,
        theta: setup.weights.theta,
        k: setup.weights.k_max,
    }
}

/// Solves the configured run and writes checkpoints, tables and the verdict.
pub fn run(cfg: &LoadedConfig, ctx: &Context) -> Result<Verdict, CliError> {
    let setup = &cfg.setup;
    let outcome = execute(setup, &ctx.exec)?;
    let resweep = resweep_change(
        &outcome.traj,
        &setup.euler,
        &outcome.grid,
        &setup.step_config()?,
        setup.weights.ell,
        &ctx.exec,
    )?;
    let traj = &outcome.traj;
    let meta = RunMeta {
        levels: traj.levels.len(),
        dt: traj.dt,
        snapshot_stride: traj.snapshot_stride,
        iterate_count: traj.iterate_count,
        converged: traj.converged,
        convergence_history: traj.convergence_history.clone(),
        min_omega: traj.min_omega.clone(),
        resweep_change: resweep,
    };
    write_atomic(&ctx.path("config.toml"), cfg.config.to_toml().as_bytes())?;
    write_atomic(&ctx.path("trajectory.json"), &serde_json::to_vec_pretty(&meta).expect("serializes"))?;
    let dir = ctx.path("checkpoints");
    for (n, u) in traj.levels.iter().enumerate() {
        write_checkpoint(&dir.join(checkpoint_name(n)), &header_for(setup, &outcome.grid, traj.time(n)), u)?;
    }
    render_run(cfg, &outcome, &meta, &ctx.out)
}

/// Re-renders the tables and verdict of a stored run.
pub fn report(dir: &Path, ctx: &Context) -> Result<Verdict, CliError> {
    let cfg_path = dir.join("config.toml");
    let text = std::fs::read_to_string(&cfg_path).map_err(|e| CliError::Usage(format!("{}: {e}", cfg_path.display())))?;
    let cfg = RunConfig::from_toml(&text)?.load()?;
    let meta_path = dir.join("trajectory.json");
    let bytes = std::fs::read(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta: RunMeta = serde_json::from_slice(&bytes).map_err(|e| CliError::Format {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;
    let grid = cfg.setup.grid()?;
    let mut levels = Vec::with_capacity(meta.levels);
    for n in 0..meta.levels {
        let path = dir.join("checkpoints").join(checkpoint_name(n));
        let (h, u) = read_checkpoint(&path, Some(&grid))?;
        let t = n as f64 * meta.dt;
        if h.t != t || h.dt != meta.dt {
            return Err(CliError::Format {
                path,
                reason: format!("time {} and step {} do not match level {n} of a run with step {}", h.t, h.dt, meta.dt),
            });
        }
        levels.push(u);
    }
    let traj = TrajectorySolution {
        levels,
        dt: meta.dt,
        snapshot_stride: meta.snapshot_stride,
        iterate_count: meta.iterate_count,
        convergence_history: meta.convergence_history.clone(),
        converged: meta.converged,
        min_omega: meta.min_omega.clone(),
    };
    let outcome = outcome_from_trajectory(&cfg.setup, traj)?;
    render_run(&cfg, &outcome, &meta, &ctx.out)
}

fn render_run(cfg: &LoadedConfig, outcome: &RunOutcome, meta: &RunMeta, out: &Path) -> Result<Verdict, CliError> {
    let setup = &cfg.setup;
    let a = analyze(setup, outcome)?;
    let traj = &outcome.traj;

    snapshot_table(setup, outcome)?.write(&out.join("snapshots.csv"))?;
    energy_table(&a).write(&out.join("energy.csv"))?;
    convergence_table(traj).write(&out.join("convergence.csv"))?;
    hardy_table(&a).write(&out.join("hardy.csv"))?;
    residual_table(&a, traj.t_final()).write(&out.join("residuals.csv"))?;

    let theta = setup.weights.theta;
    let mut checks = vec![
        Check::new("monotonicity", a.min_omega > 0.0, format!("min omega over snapshots = {:e}", a.min_omega)).value("min_omega", a.min_omega),
        Check::new(
            "decay",
            (a.decay_final.theta_hat - theta).abs() <= DECAY_TOL,
            format!("fitted tail exponent {:.4} at T against {theta} +- {DECAY_TOL}", a.decay_final.theta_hat),
        )
        .value("theta_hat_initial", a.decay_initial.theta_hat)
        .value("theta_hat_final", a.decay_final.theta_hat),
        Check::new(
            "picard_convergence",
            traj.converged,
            format!("{} sweeps, final discrepancy {:e}", traj.iterate_count, traj.convergence_history.last().copied().unwrap_or(f64::NAN)),
        )
        .value("iterations", traj.iterate_count as f64),
    ];
    let max_ratio = a.contraction.iter().copied().fold(0.0, f64::max);
    checks.push(
        Check::new(
            "picard_contraction",
            a.strictly_decreasing && a.contraction.iter().all(|&r| r < 1.0),
            format!("discrepancies strictly decreasing: {}, largest ratio {max_ratio:.4}", a.strictly_decreasing),
        )
        .value("max_ratio", max_ratio),
    );
    let tol = setup.picard.tol;
    checks.push(
        Check::new(
            "picard_fixed_point",
            meta.resweep_change < 2.0 * tol,
            format!("one more sweep moves omega by {:e} (limit {:e})", meta.resweep_change, 2.0 * tol),
        )
        .value("resweep_change", meta.resweep_change),
    );
    let e = &a.energy;
    let last = e.records.last().expect("records");
    checks.push(
        Check::new(
            "energy_growth",
            e.growth_ok,
            format!("E(T) = {:e} against M^2 A = {:e}", last.total, 4.0 * e.envelope.a),
        )
        .value("energy_final", last.total)
        .value("a", e.envelope.a)
        .value("m_hat", e.envelope.m_hat),
    );
    checks.push(
        Check::new(
            "energy_envelope",
            e.envelope_dominates,
            format!("lambda = {:e}, envelope blow-up at {:e}", e.envelope.lambda, e.envelope.blowup_time),
        )
        .value("lambda", e.envelope.lambda),
    );
    let outside: Vec<String> = a
        .hardy
        .iter()
        .filter(|h| !h.degenerate && !h.inside_bracket())
        .map(|h| format!("{} ({:.3}, {:.3}) vs c5 {:.3}", h.idx, h.w_over_omega, h.omega_over_w, h.c5))
        .collect();
    checks.push(
        Check::new(
            "hardy_equivalence",
            outside.is_empty(),
            if outside.is_empty() {
                "all non-degenerate ratios inside the bracket".to_string()
            } else {
                format!("outside the bracket: {}", outside.join("; "))
            },
        )
        .reported(),
    );
    let beta = setup.wall.beta();
    checks.push(
        Check::new(
            "wall_threshold",
            beta >= e.delta_beta,
            format!("beta = {beta} against measured threshold {:.4}", e.delta_beta),
        )
        .value("delta_beta", e.delta_beta)
        .reported(),
    );
    let mut warnings = outcome.warnings.clone();
    warnings.extend(a.warnings.iter().cloned());
    let v = Verdict::new("run", &cfg.hash, checks, warnings);
    v.write(&out.join("verdict.json"))?;
    Ok(v)
}

fn snapshot_table(setup: &RunSetup, outcome: &RunOutcome) -> Result<Table, CliError> {
    let grid = &outcome.grid;
    let traj = &outcome.traj;
    let ell = setup.weights.ell;
    let mut t = Table::new([
        "level",
        "t",
        "min_omega",
        "omega_norm",
        "u_wall_norm",
        "omega_wall_norm",
        "robin_mismatch",
        "theta_hat",
        "c1_hat",
        "c2_hat",
        "weighted_v_max",
        "velocity_ratio",
    ]);
    let window = (0.25 * grid.y_max(), 0.75 * grid.y_max());
    for n in traj.snapshot_levels() {
        let u = &traj.levels[n];
        let time = traj.time(n);
        let omega = dy(u, grid, 1);
        let tr = beta_trace_norms(u, grid, setup.weights.k_max, setup.wall);
        let fit = decay_fit(&omega, grid, window)?;
        let vb = vertical_velocity_bound(u, &setup.euler, time, grid, ell);
        t.push(vec![
            n.to_string(),
            num(time),
            num(omega.min()),
            num(weighted_norm(&omega, grid, ell)),
            num(tr.u_trace),
            num(tr.omega_trace),
            num(tr.robin_mismatch),
            num(fit.theta_hat),
            num(fit.c1_hat),
            num(fit.c2_hat),
            num(vb.weighted_v),
            num(vb.ratio),
        ]);
    }
    Ok(t)
}

fn energy_table(a: &RunAnalysis) -> Table {
    let e = &a.energy;
    let parts: Vec<MultiIndex> = e.records[0].parts.iter().map(|p| p.0).collect();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(parts.iter().map(|i| format!("part_{i}")));
    for h in [
        "boundary",
        "total",
        "euler_norm_sq",
        "omega_y_sq",
        "q1_max",
        "q2_max",
        "q3_max",
        "wall_curvature_max",
        "masked",
        "envelope",
    ] {
        header.push(h.into());
    }
    let mut t = Table::new(header);
    let t0 = e.records[0].t;
    for r in &e.records {
        let mut row = vec![num(r.t)];
        row.extend(r.parts.iter().map(|p| num(p.1)));
        row.extend([
            num(r.boundary),
            num(r.total),
            num(r.euler_norm_sq),
            num(r.omega_y_sq),
            num(r.q1_max),
            num(r.q2_max),
            num(r.q3_max),
            num(r.wall_curvature_max),
            r.masked.to_string(),
            num(e.envelope.at(r.t - t0)),
        ]);
        t.push(row);
    }
    t
}

fn convergence_table(traj: &TrajectorySolution) -> Table {
    let mut t = Table::new(["iterate", "discrepancy", "contraction", "min_omega"]);
    for (k, d) in traj.convergence_history.iter().enumerate() {
        let ratio = if k == 0 { String::new() } else { num(d / traj.convergence_history[k - 1]) };
        t.push(vec![(k + 1).to_string(), num(*d), ratio, num(traj.min_omega[k])]);
    }
    t
}

fn hardy_table(a: &RunAnalysis) -> Table {
    let mut t = Table::new([
        "index",
        "w_norm",
        "omega_norm",
        "w_over_omega",
        "omega_over_w",
        "curvature_sup",
        "c5",
        "degenerate",
        "inside_bracket",
    ]);
    for h in &a.hardy {
        t.push(vec![
            h.idx.to_string(),
            num(h.w_norm),
            num(h.omega_norm),
            num(h.w_over_omega),
            num(h.omega_over_w),
            num(h.curvature_sup),
            num(h.c5),
            h.degenerate.to_string(),
            h.inside_bracket().to_string(),
        ]);
    }
    t
}

fn residual_table(a: &RunAnalysis, t_final: f64) -> Table {
    let mut t = Table::new(["equation", "index", "t", "interior", "boundary", "masked"]);
    for (time, r) in &a.pde_residual {
        t.push(vec!["momentum".into(), String::new(), num(*time), num(*r), String::new(), String::new()]);
    }
    for (idx, r) in &a.w_residuals {
        t.push(vec![
            "w".into(),
            idx.to_string(),
            num(t_final),
            num(r.interior),
            r.boundary.map(num).unwrap_or_default(),
            r.masked.to_string(),
        ]);
    }
    t
}

/// One row of the identity refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub identity: Identity,
    pub alpha: MultiIndex,
    pub refinement: usize,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub residual: f64,
    /// Residual of the previous refinement over this one.
    pub ratio: Option<f64>,
}

/// Tangential indices exercised by the identity study.
pub fn identity_alphas() -> Vec<MultiIndex> {
    vec![MultiIndex::ZERO, MultiIndex::new(0, 1, 0)]
}

/// Residuals of every identity on `refinements` successively halved grids.
pub fn identity_study(refinements: usize, exec: &RayonColumns) -> Result<Vec<IdentityRow>, CliError> {
    if refinements < 2 {
        return Err(CliError::Usage("--refinements must be at least 2".into()));
    }
    let y_max = 8.0;
    let period = 2.0 * std::f64::consts::PI;
    let fam = IdentityFamily::new(period);
    let mut jobs = Vec::new();
    for id in Identity::ALL {
        let alphas = if id == Identity::Wall { vec![MultiIndex::ZERO] } else { identity_alphas() };
        for alpha in alphas {
            for r in 0..refinements {
                jobs.push((id, alpha, r));
            }
        }
    }
    let residuals: Vec<Result<(usize, usize, f64, f64), CliError>> = exec.install(|| {
        jobs.par_iter()
            .map(|&(id, alpha, r)| {
                let n = 1usize << r;
                let grid = Grid::new(32 * n, 64 * n + 1, period, y_max)?;
                let dt = 0.02 / n as f64;
                let s = SampledFamily::new(&fam, &grid, 0.5, dt, id.levels(alpha));
                let res = identity_check(id, &s.u_history()?, &s.deviation_history()?, &grid, alpha, (1.0, y_max - 1.0))?;
                Ok((grid.nx(), grid.ny(), dt, res))
            })
            .collect()
    });
    let mut rows: Vec<IdentityRow> = Vec::new();
    for (&(identity, alpha, refinement), r) in jobs.iter().zip(residuals) {
        let (nx, ny, dt, residual) = r?;
        let ratio = (refinement > 0).then(|| rows.last().expect("coarser row").residual / residual);
        rows.push(IdentityRow {
            identity,
            alpha,
            refinement,
            nx,
            ny,
            dt,
            residual,
            ratio,
        });
    }
    Ok(rows)
}

pub fn verify_identities(refinements: usize, ctx: &Context) -> Result<(Verdict, Vec<IdentityRow>), CliError> {
    let rows = identity_study(refinements, &ctx.exec)?;
    let mut t = Table::new(["identity", "alpha", "refinement", "nx", "ny", "dt", "residual", "ratio"]);
    for r in &rows {
        t.push(vec![
            r.identity.name().into(),
            r.alpha.to_string(),
            r.refinement.to_string(),
            r.nx.to_string(),
            r.ny.to_string(),
            num(r.dt),
            num(r.residual),
            r.ratio.map(num).unwrap_or_default(),
        ]);
    }
    t.write(&ctx.path("identities.csv"))?;
    let mut checks = Vec::new();
    for id in Identity::ALL {
        let ratios: Vec<f64> = rows.iter().filter(|r| r.identity == id).filter_map(|r| r.ratio).collect();
        let (lo, hi) = IDENTITY_RATIO;
        let worst = ratios.iter().copied().max_by(|a, b| (a - 4.0).abs().total_cmp(&(b - 4.0).abs())).unwrap_or(f64::NAN);
        checks.push(
            Check::new(
                id.name(),
                ratios.iter().all(|r| (lo..=hi).contains(r)),
                format!("residual ratios {:?} against [{lo}, {hi}]", ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>()),
            )
            .value("worst_ratio", worst),
        );
    }
    let v = Verdict::new("verify-identities", &study_hash(&format!("identities:{refinements}")), checks, Vec::new());
    v.write(&ctx.path("verdict.json"))?;
    Ok((v, rows))
}

/// Hash of a built-in study's settings, standing in for a config hash.
fn study_hash(settings: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(settings.as_bytes()))
}

pub fn mms(ctx: &Context) -> Result<(Verdict, OrderStudy, OrderStudy), CliError> {
    let m = MmsSettings::default();
    let (time, space) = ctx.exec.install(|| rayon::join(|| m.time_study(&ctx.exec), || m.space_study(&ctx.exec)));
    let (time, space) = (time?, space?);
    let mut t = Table::new(["study", "dt", "hy", "ny", "error", "iterations"]);
    for (name, s) in [("time", &time), ("space", &space)] {
        for p in &s.points {
            t.push(vec![name.into(), num(p.dt), num(p.hy), p.ny.to_string(), num(p.error), p.iterations.to_string()]);
        }
    }
    t.write(&ctx.path("mms.csv"))?;
    let checks = vec![
        Check::new(
            "time_order",
            (time.order - MMS_TIME_ORDER).abs() <= MMS_ORDER_TOL,
            format!("order {:.3} in dt against {MMS_TIME_ORDER} +- {MMS_ORDER_TOL}", time.order),
        )
        .value("order", time.order),
        Check::new(
            "space_order",
            (space.order - MMS_SPACE_ORDER).abs() <= MMS_ORDER_TOL,
            format!("order {:.3} in hy against {MMS_SPACE_ORDER} +- {MMS_ORDER_TOL}", space.order),
        )
        .value("order", space.order),
    ];
    let v = Verdict::new("mms", &study_hash(&format!("{m:?}")), checks, Vec::new());
    v.write(&ctx.path("verdict.json"))?;
    Ok((v, time, space))
}

fn solve_all(setups: &[RunSetup], exec: &RayonColumns) -> Result<Vec<RunOutcome>, CliError> {
    let outs: Vec<_> = exec.install(|| setups.par_iter().map(|s| execute(s, exec)).collect());
    outs.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

/// Robin runs over `betas` against the Dirichlet run.
pub fn sweep_beta(cfg: &LoadedConfig, betas: &[f64], ctx: &Context) -> Result<Verdict, CliError> {
    if betas.len() < 4 {
        return Err(CliError::Usage(format!("need at least 4 betas, got {}", betas.len())));
    }
    if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(CliError::Usage("betas must be finite and positive".into()));
    }
    let q = betas[1] / betas[0];
    if !(q > 1.0) || betas.windows(2).any(|w| ((w[1] / w[0]) / q - 1.0).abs() > 1e-9) {
        return Err(CliError::Usage("betas must form an increasing geometric sequence".into()));
    }
    let base = &cfg.setup;
    let mut setups: Vec<RunSetup> = betas.iter().map(|&b| base.with_wall(Wall::Robin(b))).collect();
    setups.push(base.with_wall(Wall::Dirichlet));
    let outs = solve_all(&setups, &ctx.exec)?;
    let grid = &outs[0].grid;
    let robin: Vec<TrajectorySolution> = outs[..betas.len()].iter().map(|o| o.traj.clone()).collect();
    let dirichlet = &outs[betas.len()].traj;
    let rep = sweep_report(betas, &robin, dirichlet, grid, base.weights.k_max, base.weights.ell)?;
    let thresholds: Vec<f64> = robin.iter().map(|t| wall_threshold(t, grid)).collect();

    let mut t = Table::new(["beta", "u_trace", "omega_trace", "robin_mismatch", "distance_to_dirichlet", "wall_threshold"]);
    for (e, th) in rep.entries.iter().zip(&thresholds) {
        t.push(vec![
            num(e.beta),
            num(e.traces.u_trace),
            num(e.traces.omega_trace),
            num(e.traces.robin_mismatch),
            num(e.distance_to_dirichlet),
            num(*th),
        ]);
    }
    let last = dirichlet.levels.last().expect("levels");
    let dtr = beta_trace_norms(last, grid, base.weights.k_max, Wall::Dirichlet);
    t.push(vec![
        num(f64::INFINITY),
        num(dtr.u_trace),
        num(dtr.omega_trace),
        num(0.0),
        num(0.0),
        num(wall_threshold(dirichlet, grid)),
    ]);
    t.write(&ctx.path("sweep.csv"))?;

    let threshold = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::new(
            "beta_threshold",
            betas[0] >= threshold,
            format!("smallest beta {} against measured wall threshold {threshold:.4}", betas[0]),
        )
        .value("threshold", threshold),
        Check::new("u_trace_slope", rep.u_slope_ok(), format!("log-log slope {:.4} against [-0.7, -0.3]", rep.u_slope)).value("slope", rep.u_slope),
        Check::new("omega_trace_slope", rep.omega_slope_ok(), format!("log-log slope {:.4} against [0.3, 0.7]", rep.omega_slope))
            .value("slope", rep.omega_slope),
        Check::new(
            "dirichlet_distance",
            rep.monotone_distance,
            format!(
                "distances {:?} nonincreasing",
                rep.entries.iter().map(|e| format!("{:.3e}", e.distance_to_dirichlet)).collect::<Vec<_>>()
            ),
        ),
    ];
    let mut warnings: Vec<String> = Vec::new();
    for o in &outs {
        for w in &o.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    let v = Verdict::new("sweep-beta", &cfg.hash, checks, warnings);
    v.write(&ctx.path("verdict.json"))?;
    Ok(v)
}

/// The amplitude ladder `eta, eta/4, eta/16`.
pub fn stability_amplitudes(eta: f64) -> [f64; 3] {
    [eta, eta / 4.0, eta / 16.0]
}

/// Perturbed runs against the base run, plus a repeat of the base run.
pub fn stability(cfg: &LoadedConfig, eta: f64, ctx: &Context) -> Result<Verdict, CliError> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CliError::Usage(format!("--eta {eta} must lie in (0, 1)")));
    }
    let base = &cfg.setup;
    let amps = stability_amplitudes(eta);
    let mut setups = vec![base.clone(), base.clone()];
    setups.extend(amps.iter().map(|&a| base.with_perturbation(Some(cfg.config.stability_perturbation(a)))));
    let outs = solve_all(&setups, &ctx.exec)?;
    let grid = &outs[0].grid;
    let (ell, p) = (base.weights.ell, cfg.config.stability.norm_order);
    let repeat = stability_pair(&outs[1].traj, &outs[0].traj, grid, base.wall, ell, p)?;
    let pairs = outs[2..]
        .iter()
        .map(|o| stability_pair(&o.traj, &outs[0].traj, grid, base.wall, ell, p))
        .collect::<Result<Vec<_>, _>>()?;
    let bound = cfg.config.stability.bound;
    let sv = stability_verdict(&amps, &pairs, bound);

    let mut t = Table::new(["amplitude", "t", "du", "domega", "wall_du", "residual"]);
    for (a, pair) in std::iter::once((0.0, &repeat)).chain(amps.iter().copied().zip(&pairs)) {
        for d in &pair.deltas {
            t.push(vec![num(a), num(d.t), num(d.du), num(d.domega), num(d.wall_du), num(d.residual)]);
        }
    }
    t.write(&ctx.path("stability.csv"))?;

    let mut checks = vec![Check::new(
        "uniqueness",
        repeat.identical,
        "repeated run with identical data gives zero differences",
    )];
    let mut within = Check::new(
        "amplification_bound",
        sv.within_bound,
        format!("amplifications {:?} against {bound}", sv.amplifications.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>()),
    );
    for (a, g) in amps.iter().zip(&sv.amplifications) {
        within = within.value(&format!("amplification_{a:e}"), *g);
    }
    checks.push(within);
    checks.push(
        Check::new(
            "amplitude_consistency",
            sv.consistent,
            format!("largest over smallest amplification {:.4} against 2", sv.spread),
        )
        .value("spread", sv.spread),
    );
    let mut res = Check::new(
        "difference_equation_residual",
        true,
        "max residual of the difference equation per amplitude, relative to the initial difference",
    )
    .reported();
    for (a, pair) in amps.iter().zip(&pairs) {
        res = res.value(&format!("relative_residual_{a:e}"), pair.delta_residual / pair.deltas[0].domega.max(f64::MIN_POSITIVE));
    }
    checks.push(res);
    let mut warnings: Vec<String> = Vec::new();
    for o in &outs {
        for w in &o.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    let v = Verdict::new("stability", &cfg.hash, checks, warnings);
    v.write(&ctx.path("verdict.json"))?;
    Ok(v)
}
