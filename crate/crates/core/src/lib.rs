//! Fractional-order PID (PI^λD^δ) synthesis by dominant-pole placement.
//!
//! A controller `K_p + T_i s^{-λ} + T_d s^{δ}` is tuned so that a chosen
//! complex pole pair `-x ± jy` satisfies the closed-loop characteristic
//! equation. The constraint is turned into the scalar fitness
//! `f = |R| + |I| + |atan(I/R)|` and minimized with a bounded particle swarm.
//! Designs are checked in the time domain with a Grünwald–Letnikov
//! step-response simulator and the usual overshoot / rise / settling metrics.
//!
//! Module map:
//!
//! - [`complex`]: principal-branch powers of complex numbers
//! - [`plant`]: fractional polynomials and transfer functions
//! - [`pso`]: generic bounded particle swarm optimizer
//! - [`tuner`]: dominant poles, residual fitness and the tuning driver
//! - [`gl`]: Grünwald–Letnikov step-response simulation
//! - [`metrics`]: step-response metrics
//! - [`cli`]: batch front end used by the `fopid` binary

pub mod cli;
pub mod complex;
pub mod error;
pub mod gl;
pub mod metrics;
pub mod plant;
pub mod pso;
pub mod tuner;

pub use complex::{cpow, polar, ComplexValue};
pub use error::{Error, Result};
pub use gl::{gl_derivative, gl_weights, simulate_step, GlWeights, MemoryLength, SimConfig, StepResponse};
pub use metrics::{analyze, analyze_with, ResponseMetrics, RiseTimeConvention};
pub use plant::{
    closed_loop, controller_tf, evaluate_poly, poly_multiply, ControllerParams,
    FractionalPolynomial, FractionalTransferFunction,
};
pub use pso::{minimize, Particle, PsoConfig, Swarm, SwarmResult};
pub use tuner::{
    poles_from_damping, residual, residual_closed_form_example1, spec_to_damping, tune,
    DesignSpec, DominantPoles, Example1Constants, ParamBounds, PoleQuadrant, ResidualValue,
    TuningMode, TuningOutcome, TuningProblem,
};
