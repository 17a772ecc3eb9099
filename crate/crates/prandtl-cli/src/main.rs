use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prandtl_cli::commands::{self, Context};
use prandtl_cli::config::load_config;
use prandtl_cli::output::Verdict;
use prandtl_cli::CliError;

/// Finite-difference solver and diagnostics for the Prandtl boundary-layer equations.
#[derive(Parser)]
#[command(name = "prandtl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory [default: out/<command>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured run and check it
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Refinement study of the exact identities on the closed-form family
    VerifyIdentities {
        /// Number of grids, each halving every spacing of the previous one
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Manufactured-solution order study in time and space
    Mms {
        #[command(flatten)]
        common: Common,
    },
    /// Robin runs over a geometric ladder of beta against the Dirichlet run
    SweepBeta {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list overriding the config
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Perturbed runs against the base run at amplitudes eta, eta/4, eta/16
    Stability {
        #[arg(long)]
        config: PathBuf,
        /// Largest amplitude, overriding the config
        #[arg(long)]
        eta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render tables and verdict of a stored run from its checkpoints
    Report {
        /// Directory written by `run`
        #[arg(long)]
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn context(common: &Common, name: &str) -> Result<Context, CliError> {
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    Context::new(out, common.workers)
}

fn dispatch(cmd: Command) -> Result<Verdict, CliError> {
    match cmd {
        Command::Run { config, common } => {
            let cfg = load_config(&config)?;
            commands::run(&cfg, &context(&common, "run")?)
        }
        Command::VerifyIdentities { refinements, common } => {
            let (v, rows) = commands::verify_identities(refinements, &context(&common, "identities")?)?;
            println!("{:<10} {:<7} {:>5} {:>5} {:>13} {:>8}", "identity", "alpha", "nx", "ny", "residual", "ratio");
            for r in &rows {
                let ratio = r.ratio.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
                println!("{:<10} {:<7} {:>5} {:>5} {:>13.4e} {:>8}", r.identity.name(), r.alpha.to_string(), r.nx, r.ny, r.residual, ratio);
            }
            Ok(v)
        }
        Command::Mms { common } => Ok(commands::mms(&context(&common, "mms")?)?.0),
        Command::SweepBeta { config, betas, common } => {
            let cfg = load_config(&config)?;
            let betas = betas.unwrap_or_else(|| cfg.config.sweep.betas.clone());
            commands::sweep_beta(&cfg, &betas, &context(&common, "sweep-beta")?)
        }
        Command::Stability { config, eta, common } => {
            let cfg = load_config(&config)?;
            let eta = eta.unwrap_or(cfg.config.stability.amplitude);
            commands::stability(&cfg, eta, &context(&common, "stability")?)
        }
        Command::Report { dir, common } => {
            let out = common.out.clone().unwrap_or_else(|| dir.clone());
            commands::report(&dir, &Context::new(out, common.workers)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(v) => {
            for w in &v.warnings {
                eprintln!("warning: {w}");
            }
            for c in &v.checks {
                let status = match (c.pass, c.gating) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "NOTE",
                };
                println!("{status} {}: {}", c.name, c.detail);
            }
            if v.pass {
                println!("verdict: PASS ({})", v.command);
                ExitCode::SUCCESS
            } else {
                eprintln!("verdict: FAIL ({}): failing checks: {}", v.command, v.failing().join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
