//! Job configuration file (TOML).
//!
//! ```toml
//! [plant]
//! numerator = [[1.0, 0.0]]                          # (coefficient, exponent) pairs
//! denominator = [[0.8, 2.2], [0.5, 0.9], [1.0, 0.0]]
//!
//! [spec]                  # either zeta + omega0, or mp + trise
//! zeta = 0.65
//! omega0 = 2.2
//! quadrant = "second"     # optional: "second" (-x+jy) or "third" (-x-jy)
//!
//! [tuning]
//! mode = "both"           # fractional | integer | both
//!
//! [pso]                   # all optional
//! swarm_size = 30
//! iterations = 500
//! seed = 1
//! target_fitness = 1e-6
//!
//! [sim]                   # all optional
//! time_step = 1e-3
//! horizon = 10.0
//! memory_length = "full"  # or an integer sample count
//! open_loop = false
//!
//! [output]
//! dir = "out"
//!
//! [[controller]]          # optional inline parameter sets for simulate/verify
//! label = "reference-fractional"
//! kp = 442.68
//! ti = 324.03
//! td = 115.27
//! lambda = 1.5
//! delta = 1.41
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gl::{MemoryLength, SimConfig};
use crate::metrics::RiseTimeConvention;
use crate::plant::{ControllerParams, FractionalTransferFunction};
use crate::pso::PsoConfig;
use crate::tuner::{DesignSpec, ParamBounds, PoleQuadrant, TuningMode, TuningProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Fractional,
    Integer,
    Both,
}

impl ModeSelection {
    /// Integer first, then fractional, for side-by-side reports.
    pub fn modes(self) -> Vec<TuningMode> {
        match self {
            ModeSelection::Fractional => vec![TuningMode::Fractional],
            ModeSelection::Integer => vec![TuningMode::Integer],
            ModeSelection::Both => vec![TuningMode::Integer, TuningMode::Fractional],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub plant: PlantSection,
    pub spec: SpecSection,
    #[serde(default)]
    pub tuning: TuningSection,
    #[serde(default)]
    pub pso: PsoSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, rename = "controller")]
    pub controllers: Vec<LabeledController>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub numerator: Vec<(f64, f64)>,
    pub denominator: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSection {
    pub zeta: Option<f64>,
    pub omega0: Option<f64>,
    pub mp: Option<f64>,
    pub trise: Option<f64>,
    #[serde(default)]
    pub quadrant: PoleQuadrant,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSection {
    #[serde(default = "default_mode")]
    pub mode: ModeSelection,
    #[serde(default)]
    pub bounds: Option<ParamBounds>,
}

fn default_mode() -> ModeSelection {
    ModeSelection::Both
}

impl Default for TuningSection {
    fn default() -> Self {
        Self { mode: default_mode(), bounds: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoSection {
    pub swarm_size: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub target_fitness: Option<f64>,
    pub inertia: Option<f64>,
    pub cognitive: Option<f64>,
    pub social: Option<f64>,
    pub velocity_clamp: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub time_step: Option<f64>,
    pub horizon: Option<f64>,
    pub memory_length: Option<MemoryLength>,
    #[serde(default)]
    pub open_loop: bool,
    #[serde(default)]
    pub rise_time: RiseTimeConvention,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledController {
    pub label: String,
    #[serde(flatten)]
    pub params: ControllerParams,
}

/// A parsed and validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub plant: FractionalTransferFunction,
    pub spec: DesignSpec,
    pub quadrant: PoleQuadrant,
    pub zeta: f64,
    pub omega0: f64,
    pub mode: ModeSelection,
    pub bounds: ParamBounds,
    pub pso: PsoConfig,
    pub sim: SimConfig,
    pub open_loop: bool,
    pub rise_time: RiseTimeConvention,
    pub out_dir: PathBuf,
    pub controllers: Vec<LabeledController>,
}

impl Job {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
        let text = std::str::from_utf8(&bytes).context("config is not valid UTF-8")?;
        let config: JobConfig =
            toml::from_str(text).with_context(|| format!("parsing config {}", path.display()))?;
        let mut job = Self::from_config(config, path)?;
        job.config_sha256 = hex::encode(Sha256::digest(&bytes));
        Ok(job)
    }

    pub fn from_config(config: JobConfig, path: &Path) -> anyhow::Result<Self> {
        let plant = FractionalTransferFunction::from_pairs(&config.plant.numerator, &config.plant.denominator)
            .context("plant")?;
        if plant.numerator().is_zero() {
            bail!("plant.numerator must have a nonzero term");
        }

        let spec = match &config.spec {
            SpecSection { zeta: Some(zeta), omega0: Some(omega0), mp: None, trise: None, .. } => {
                DesignSpec::Damping { zeta: *zeta, omega0: *omega0 }
            }
            SpecSection { mp: Some(mp), trise: Some(trise), zeta: None, omega0: None, .. } => {
                DesignSpec::Requirements { mp: *mp, trise: *trise }
            }
            _ => bail!("spec must set exactly one of {{zeta, omega0}} or {{mp, trise}}"),
        };
        let (zeta, omega0) = match spec {
            DesignSpec::Damping { zeta, omega0 } => {
                if !(zeta > 0.0 && zeta < 1.0) {
                    bail!("spec.zeta must lie in (0, 1), got {zeta}");
                }
                if !(omega0 > 0.0 && omega0.is_finite()) {
                    bail!("spec.omega0 must be positive, got {omega0}");
                }
                (zeta, omega0)
            }
            DesignSpec::Requirements { mp, trise } => {
                if !(mp > 0.0 && mp < 1.0) {
                    bail!("spec.mp must lie in (0, 1) (a fraction, not a percentage), got {mp}");
                }
                if !(trise > 0.0 && trise.is_finite()) {
                    bail!("spec.trise must be positive, got {trise}");
                }
                spec.damping()?
            }
        };

        let bounds = config.tuning.bounds.unwrap_or_default();

        let mut pso = PsoConfig::new(Vec::new(), Vec::new());
        let p = &config.pso;
        if let Some(v) = p.swarm_size {
            pso.swarm_size = v;
        }
        if let Some(v) = p.iterations {
            pso.max_iterations = v;
        }
        if let Some(v) = p.seed {
            pso.seed = v;
        }
        if let Some(v) = p.target_fitness {
            pso.target_fitness = v;
        }
        if let Some(v) = p.inertia {
            pso.inertia = v;
        }
        if let Some(v) = p.cognitive {
            pso.cognitive = v;
        }
        if let Some(v) = p.social {
            pso.social = v;
        }
        if let Some(v) = p.velocity_clamp {
            pso.velocity_clamp = v;
        }

        let mut sim = SimConfig::default();
        if let Some(v) = config.sim.time_step {
            sim.time_step = v;
        }
        if let Some(v) = config.sim.horizon {
            sim.horizon = v;
        }
        if let Some(v) = config.sim.memory_length {
            sim.memory_length = v;
        }
        sim.validate().context("sim")?;

        for c in &config.controllers {
            check_label(&c.label)?;
            if !c.params.is_finite() {
                bail!("controller {:?} has non-finite parameters", c.label);
            }
        }

        let job = Self {
            config_path: path.to_path_buf(),
            config_sha256: String::new(),
            plant,
            spec,
            quadrant: config.spec.quadrant,
            zeta,
            omega0,
            mode: config.tuning.mode,
            bounds,
            pso,
            sim,
            open_loop: config.sim.open_loop,
            rise_time: config.sim.rise_time,
            out_dir: config.output.dir,
            controllers: config.controllers,
        };
        // Surface plant/pole collisions and bad bounds before any work starts.
        for mode in job.mode.modes() {
            let problem = job.problem(mode)?;
            job.pso_for(&problem).validate().context("pso")?;
        }
        Ok(job)
    }

    /// Swarm settings from the config over `problem`'s search box.
    pub fn pso_for(&self, problem: &TuningProblem) -> PsoConfig {
        let bounds = problem.pso_config();
        PsoConfig {
            dims: bounds.dims,
            lower_bounds: bounds.lower_bounds,
            upper_bounds: bounds.upper_bounds,
            ..self.pso.clone()
        }
    }

    pub fn problem(&self, mode: TuningMode) -> anyhow::Result<TuningProblem> {
        let poles = self.spec.poles()?;
        Ok(TuningProblem::new(self.plant.clone(), poles, mode)?
            .with_bounds(self.bounds)?
            .with_quadrant(self.quadrant))
    }
}

pub fn check_label(label: &str) -> anyhow::Result<()> {
    if label.is_empty()
        || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        bail!("controller label {label:?} must be non-empty and use only [A-Za-z0-9_-]");
    }
    Ok(())
}
