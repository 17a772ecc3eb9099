//! Run configuration: TOML with flat sections, one table per concern.

use std::path::Path;

use prandtl_core::experiments::RunSetup;
use prandtl_core::initial::Perturbation;
use prandtl_core::picard::PicardConfig;
use prandtl_core::{EulerData, Shape, Wall, WeightParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Drives perturbation phases only; the solver itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    pub weights: WeightSection,
    pub outer: OuterSection,
    pub wall: WallSection,
    #[serde(default)]
    pub data: DataSection,
    pub time: TimeSection,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "two_pi")]
    pub x_period: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub ell: f64,
    pub theta: f64,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Flat,
    Sine,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterSection {
    pub profile: Profile,
    pub amplitude: f64,
    #[serde(default)]
    pub bump: f64,
    #[serde(default = "one_u32")]
    pub mode: u32,
    #[serde(default)]
    pub decay: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one_f64")]
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallKind {
    Robin,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSection {
    pub kind: WallKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub epsilon: f64,
    pub tail_tolerance: f64,
    pub euler_constant: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            tail_tolerance: 1e-6,
            euler_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "half")]
    pub cfl_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardSection {
    pub max_iters: usize,
    pub tol: f64,
    pub snapshot_stride: usize,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            max_iters: 30,
            tol: 1e-8,
            snapshot_stride: 1,
        }
    }
}

/// Perturbation of the run's own data; zero amplitude means none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    pub amplitude: f64,
    pub mode: u32,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            mode: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    /// Largest amplitude; the probe also runs a quarter and a sixteenth of it.
    pub amplitude: f64,
    pub mode: u32,
    pub bound: f64,
    /// Number of derivatives in the difference norms.
    pub norm_order: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            mode: 1,
            bound: 10.0,
            norm_order: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            betas: vec![10.0, 40.0, 160.0, 640.0],
        }
    }
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}
fn one_u32() -> u32 {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

/// A parsed configuration together with its hash and load-time warnings.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
    pub setup: RunSetup,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments in the
    /// file do not change it.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canon))
    }

    pub fn wall(&self) -> Result<Wall, CliError> {
        match (self.wall.kind, self.wall.beta) {
            (WallKind::Dirichlet, None) => Ok(Wall::Dirichlet),
            (WallKind::Dirichlet, Some(_)) => Err(CliError::Config("wall.beta must be omitted for a Dirichlet wall".into())),
            (WallKind::Robin, None) => Err(CliError::Config("wall.beta is required for a Robin wall".into())),
            (WallKind::Robin, Some(b)) if b.is_finite() => Wall::from_beta(b).map_err(|e| CliError::Config(e.to_string())),
            (WallKind::Robin, Some(_)) => Err(CliError::Config("wall.beta must be finite; use kind = \"dirichlet\"".into())),
        }
    }

    pub fn euler(&self) -> Result<EulerData, CliError> {
        let o = &self.outer;
        let shape = match o.profile {
            Profile::Flat => Shape::Flat,
            Profile::Sine => Shape::Sine { mode: o.mode },
            Profile::Gaussian => Shape::Gaussian {
                center: o.center,
                width: o.width,
            },
        };
        EulerData::new(o.amplitude, 1.0, o.bump, shape, o.decay, self.grid.x_period).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Phase in `[0, 2 pi)` for the perturbation with index `slot`.
    ///
    /// Every slot gets its own stream so adding runs never shifts the
    /// phases of existing ones.
    pub fn phase(&self, slot: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(slot);
        rng.gen_range(0.0..2.0 * std::f64::consts::PI)
    }

    /// Perturbation of amplitude `eta` in the stability mode, phase from the seed.
    pub fn stability_perturbation(&self, eta: f64) -> Perturbation {
        Perturbation {
            amplitude: eta,
            mode: self.stability.mode,
            phase: self.phase(1),
        }
    }

    pub fn setup(&self) -> Result<RunSetup, CliError> {
        let weights = WeightParams::new(self.weights.ell, self.weights.theta, self.weights.k).map_err(|e| CliError::Config(e.to_string()))?;
        let perturbation = (self.perturbation.amplitude != 0.0).then(|| Perturbation {
            amplitude: self.perturbation.amplitude,
            mode: self.perturbation.mode,
            phase: self.phase(0),
        });
        Ok(RunSetup {
            nx: self.grid.nx,
            ny: self.grid.ny,
            x_period: self.grid.x_period,
            y_max: self.grid.y_max,
            weights,
            euler: self.euler()?,
            wall: self.wall()?,
            epsilon: self.data.epsilon,
            tail_tolerance: self.data.tail_tolerance,
            perturbation,
            dt: self.time.dt,
            cfl_limit: self.time.cfl_limit,
            picard: PicardConfig {
                t_final: self.time.t_final,
                max_iters: self.picard.max_iters,
                tol: self.picard.tol,
                snapshot_stride: self.picard.snapshot_stride,
                ell: self.weights.ell,
                monotonicity_guard: true,
            },
            euler_constant: self.data.euler_constant,
        })
    }

    /// Builds the run setup and applies every cross-field check.
    pub fn load(self) -> Result<LoadedConfig, CliError> {
        let setup = self.setup()?;
        let warnings = setup.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let st = &self.stability;
        if !(st.amplitude > 0.0 && st.amplitude < 1.0) {
            return Err(CliError::Config(format!("stability.amplitude = {} must lie in (0, 1)", st.amplitude)));
        }
        if !(st.bound > 1.0) {
            return Err(CliError::Config("stability.bound must exceed 1".into()));
        }
        if st.norm_order > self.weights.k {
            return Err(CliError::Config(format!(
                "stability.norm_order = {} exceeds weights.k = {}",
                st.norm_order, self.weights.k
            )));
        }
        Ok(LoadedConfig {
            hash: self.hash(),
            config: self,
            setup,
            warnings,
        })
    }
}

/// Reads, parses and validates a config file. A missing file is a usage error.
pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::from_toml(&text)?.load()
}

/// The shipped small-data configuration.
pub fn default_config() -> RunConfig {
    RunConfig::from_toml(DEFAULT_TOML).expect("shipped config parses")
}

pub const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");
