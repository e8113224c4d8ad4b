//! Bounded global-best particle swarm optimizer.
//!
//! Each iteration draws fresh `φ₁, φ₂ ~ U[0,1]` per particle and dimension and
//! applies
//!
//! ```text
//! v ← ω·v + c₁·φ₁·(pbest − x) + c₂·φ₂·(gbest − x)
//! x ← x + v
//! ```
//!
//! Velocities are clamped to `±velocity_clamp·(upper − lower)` and positions
//! to `[lower, upper]`. Fitness evaluation is synchronous: every particle is
//! evaluated before personal and global bests move. Best positions only
//! change on strict improvement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub dims: usize,
    /// ω
    pub inertia: f64,
    /// c₁
    pub cognitive: f64,
    /// c₂
    pub social: f64,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub max_iterations: usize,
    pub target_fitness: f64,
    pub seed: u64,
    /// Velocity limit as a fraction of each dimension's range.
    pub velocity_clamp: f64,
}

impl PsoConfig {
    pub const DEFAULT_SWARM_SIZE: usize = 30;
    pub const DEFAULT_MAX_ITERATIONS: usize = 500;
    pub const DEFAULT_TARGET_FITNESS: f64 = 1e-6;
    pub const DEFAULT_INERTIA: f64 = 0.729;
    pub const DEFAULT_LEARNING_RATE: f64 = 1.494;
    pub const DEFAULT_VELOCITY_CLAMP: f64 = 0.05;

    /// Defaults for the given box: 30 particles, 500 iterations,
    /// `ω = 0.729`, `c₁ = c₂ = 1.494`, target fitness `1e-6`, seed 0.
    pub fn new(lower_bounds: Vec<f64>, upper_bounds: Vec<f64>) -> Self {
        Self {
            swarm_size: Self::DEFAULT_SWARM_SIZE,
            dims: lower_bounds.len(),
            inertia: Self::DEFAULT_INERTIA,
            cognitive: Self::DEFAULT_LEARNING_RATE,
            social: Self::DEFAULT_LEARNING_RATE,
            lower_bounds,
            upper_bounds,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            target_fitness: Self::DEFAULT_TARGET_FITNESS,
            seed: 0,
            velocity_clamp: Self::DEFAULT_VELOCITY_CLAMP,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.swarm_size == 0 {
            return invalid("swarm_size must be positive".into());
        }
        if self.dims == 0 {
            return invalid("dims must be positive".into());
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive".into());
        }
        if self.lower_bounds.len() != self.dims || self.upper_bounds.len() != self.dims {
            return invalid(format!(
                "bounds must have {} entries, got {} and {}",
                self.dims,
                self.lower_bounds.len(),
                self.upper_bounds.len()
            ));
        }
        for (d, (lo, hi)) in self.lower_bounds.iter().zip(&self.upper_bounds).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return invalid(format!("dimension {d}: need finite lower < upper, got [{lo}, {hi}]"));
            }
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.target_fitness.is_finite() && self.target_fitness >= 0.0) {
            return invalid(format!("target_fitness must be >= 0, got {}", self.target_fitness));
        }
        if !(self.velocity_clamp.is_finite() && self.velocity_clamp > 0.0) {
            return invalid(format!("velocity_clamp must be > 0, got {}", self.velocity_clamp));
        }
        Ok(())
    }

    fn span(&self, d: usize) -> f64 {
        self.upper_bounds[d] - self.lower_bounds[d]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub iterations_run: usize,
    /// Global-best fitness after each iteration.
    pub fitness_history: Vec<f64>,
}

/// Random positions in the box and velocities in `±(upper − lower)`.
///
/// `best_position` starts at the initial position; `best_fitness` is
/// `+∞` until the particle is evaluated.
pub fn initialize<R: Rng + ?Sized>(config: &PsoConfig, rng: &mut R) -> Vec<Particle> {
    (0..config.swarm_size)
        .map(|_| {
            let mut position = Vec::with_capacity(config.dims);
            let mut velocity = Vec::with_capacity(config.dims);
            for d in 0..config.dims {
                let span = config.span(d);
                position.push(config.lower_bounds[d] + rng.gen::<f64>() * span);
                velocity.push((2.0 * rng.gen::<f64>() - 1.0) * span);
            }
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: f64::INFINITY,
            }
        })
        .collect()
}

/// Swarm state between iterations.
#[derive(Debug, Clone)]
pub struct Swarm {
    config: PsoConfig,
    particles: Vec<Particle>,
    best_position: Vec<f64>,
    best_fitness: f64,
    rng: ChaCha8Rng,
}

impl Swarm {
    /// Initializes and evaluates a swarm.
    pub fn new<F, E>(config: PsoConfig, fitness: &mut F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> std::result::Result<f64, E>,
        E: Into<BoxError>,
    {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut particles = initialize(&config, &mut rng);
        for p in &mut particles {
            p.best_fitness = evaluate(fitness, &p.position)?;
        }
        let mut swarm = Self {
            best_position: particles[0].best_position.clone(),
            best_fitness: f64::INFINITY,
            config,
            particles,
            rng,
        };
        swarm.update_global_best();
        Ok(swarm)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_fitness
    }

    pub fn config(&self) -> &PsoConfig {
        &self.config
    }

    /// One synchronous iteration: move every particle, evaluate all, then
    /// update personal and global bests.
    pub fn step<F, E>(&mut self, fitness: &mut F) -> Result<()>
    where
        F: FnMut(&[f64]) -> std::result::Result<f64, E>,
        E: Into<BoxError>,
    {
        let cfg = &self.config;
        for p in &mut self.particles {
            for d in 0..cfg.dims {
                let phi1: f64 = self.rng.gen();
                let phi2: f64 = self.rng.gen();
                let x = p.position[d];
                let vmax = cfg.velocity_clamp * cfg.span(d);
                let v = cfg.inertia * p.velocity[d]
                    + cfg.cognitive * phi1 * (p.best_position[d] - x)
                    + cfg.social * phi2 * (self.best_position[d] - x);
                let v = v.clamp(-vmax, vmax);
                p.velocity[d] = v;
                p.position[d] = (x + v).clamp(cfg.lower_bounds[d], cfg.upper_bounds[d]);
            }
        }

        let values = self
            .particles
            .iter()
            .map(|p| evaluate(fitness, &p.position))
            .collect::<Result<Vec<_>>>()?;

        for (p, value) in self.particles.iter_mut().zip(values) {
            if value < p.best_fitness {
                p.best_fitness = value;
                p.best_position.clone_from(&p.position);
            }
        }
        self.update_global_best();
        Ok(())
    }

    fn update_global_best(&mut self) {
        for p in &self.particles {
            if p.best_fitness < self.best_fitness {
                self.best_fitness = p.best_fitness;
                self.best_position.clone_from(&p.best_position);
            }
        }
    }
}

fn evaluate<F, E>(fitness: &mut F, position: &[f64]) -> Result<f64>
where
    F: FnMut(&[f64]) -> std::result::Result<f64, E>,
    E: Into<BoxError>,
{
    fitness(position).map_err(|e| Error::Fitness {
        position: position.to_vec(),
        source: e.into(),
    })
}

/// Runs the swarm until the iteration budget is spent or the global best
/// reaches `target_fitness`.
pub fn minimize<F, E>(config: &PsoConfig, mut fitness: F) -> Result<SwarmResult>
where
    F: FnMut(&[f64]) -> std::result::Result<f64, E>,
    E: Into<BoxError>,
{
    let mut swarm = Swarm::new(config.clone(), &mut fitness)?;
    let mut history = Vec::with_capacity(config.max_iterations);
    while history.len() < config.max_iterations && !(swarm.best_fitness <= config.target_fitness) {
        swarm.step(&mut fitness)?;
        history.push(swarm.best_fitness);
    }
    Ok(SwarmResult {
        best_position: swarm.best_position,
        best_fitness: swarm.best_fitness,
        iterations_run: history.len(),
        fitness_history: history,
    })
}
