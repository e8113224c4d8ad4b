//! Dominant-pole tuning of (fractional) PID controllers.
//!
//! For a target closed-loop pole `p = -x + jy` the characteristic equation
//! `1 + G_c(p)·G_p(p) = 0` is divided through by `G_p(p)`, giving the residual
//!
//! ```text
//! z = G_c(p) + 1/G_p(p) = K_p + T_i p^{-λ} + T_d p^{δ} + D_p(p)/N_p(p)
//! ```
//!
//! whose real and imaginary parts are `R` and `I`. The swarm minimizes
//! `f = |R| + |I| + |atan(I/R)|`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::ComplexValue;
use crate::error::{Error, Result};
use crate::plant::{ControllerParams, FractionalPolynomial, FractionalTransferFunction};
use crate::pso::{minimize, PsoConfig, SwarmResult};

/// Closed-loop requirements, either as time-domain targets or directly as a
/// second-order shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignSpec {
    Requirements { mp: f64, trise: f64 },
    Damping { zeta: f64, omega0: f64 },
}

impl DesignSpec {
    /// `(ζ, ω₀)` for this spec, validated.
    pub fn damping(&self) -> Result<(f64, f64)> {
        match *self {
            DesignSpec::Requirements { mp, trise } => spec_to_damping(mp, trise),
            DesignSpec::Damping { zeta, omega0 } => {
                check_damping(zeta, omega0)?;
                Ok((zeta, omega0))
            }
        }
    }

    pub fn poles(&self) -> Result<DominantPoles> {
        let (zeta, omega0) = self.damping()?;
        poles_from_damping(zeta, omega0)
    }
}

fn check_damping(zeta: f64, omega0: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain(format!(
            "zeta must lie in (0, 1) for a complex dominant pair, got {zeta}"
        )));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::Domain(format!("omega0 must be positive, got {omega0}")));
    }
    Ok(())
}

/// Classical underdamped second-order mapping from peak overshoot (as a
/// fraction) and rise time to `(ζ, ω₀)`.
pub fn spec_to_damping(mp: f64, trise: f64) -> Result<(f64, f64)> {
    if !(mp > 0.0 && mp < 1.0) {
        return Err(Error::Domain(format!("mp must lie in (0, 1), got {mp}")));
    }
    if !(trise > 0.0 && trise.is_finite()) {
        return Err(Error::Domain(format!("trise must be positive, got {trise}")));
    }
    let l = mp.ln();
    let zeta = -l / (PI * PI + l * l).sqrt();
    let omega0 = (PI - zeta.acos()) / (trise * (1.0 - zeta * zeta).sqrt());
    Ok((zeta, omega0))
}

/// The pole pair `-x ± jy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantPoles {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleQuadrant {
    /// `-x + jy`
    #[default]
    Second,
    /// `-x - jy`
    Third,
}

impl DominantPoles {
    pub fn pole(&self, quadrant: PoleQuadrant) -> ComplexValue {
        match quadrant {
            PoleQuadrant::Second => ComplexValue::new(-self.x, self.y),
            PoleQuadrant::Third => ComplexValue::new(-self.x, -self.y),
        }
    }
}

/// `x = ζω₀`, `y = ω₀√(1 − ζ²)`.
pub fn poles_from_damping(zeta: f64, omega0: f64) -> Result<DominantPoles> {
    check_damping(zeta, omega0)?;
    Ok(DominantPoles {
        x: zeta * omega0,
        y: omega0 * (1.0 - zeta * zeta).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningMode {
    /// Search all of `K_p, T_i, T_d, λ, δ`.
    Fractional,
    /// Fix `λ = δ = 1` and search `K_p, T_i, T_d`.
    Integer,
}

impl TuningMode {
    pub fn dims(self) -> usize {
        match self {
            TuningMode::Fractional => 5,
            TuningMode::Integer => 3,
        }
    }
}

impl fmt::Display for TuningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuningMode::Fractional => "fractional",
            TuningMode::Integer => "integer",
        })
    }
}

/// Inclusive search ranges for the five controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub kp: [f64; 2],
    pub ti: [f64; 2],
    pub td: [f64; 2],
    pub lambda: [f64; 2],
    pub delta: [f64; 2],
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            kp: [1.0, 1000.0],
            ti: [1.0, 500.0],
            td: [1.0, 500.0],
            lambda: [0.0, 2.0],
            delta: [0.0, 2.0],
        }
    }
}

impl ParamBounds {
    fn active(&self, mode: TuningMode) -> Vec<[f64; 2]> {
        let mut v = vec![self.kp, self.ti, self.td];
        if mode == TuningMode::Fractional {
            v.extend([self.lambda, self.delta]);
        }
        v
    }

    pub fn contains(&self, c: &ControllerParams) -> bool {
        let inside = |v: f64, [lo, hi]: [f64; 2]| lo <= v && v <= hi;
        inside(c.kp, self.kp)
            && inside(c.ti, self.ti)
            && inside(c.td, self.td)
            && inside(c.lambda, self.lambda)
            && inside(c.delta, self.delta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningProblem {
    plant: FractionalTransferFunction,
    poles: DominantPoles,
    mode: TuningMode,
    bounds: ParamBounds,
    quadrant: PoleQuadrant,
}

impl TuningProblem {
    /// Fails if the plant has a pole or zero at either dominant pole.
    pub fn new(plant: FractionalTransferFunction, poles: DominantPoles, mode: TuningMode) -> Result<Self> {
        for q in [PoleQuadrant::Second, PoleQuadrant::Third] {
            inverse_plant_at(&plant, poles.pole(q))?;
        }
        Ok(Self {
            plant,
            poles,
            mode,
            bounds: ParamBounds::default(),
            quadrant: PoleQuadrant::Second,
        })
    }

    pub fn with_bounds(mut self, bounds: ParamBounds) -> Result<Self> {
        for [lo, hi] in bounds.active(TuningMode::Fractional) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!("bad parameter range [{lo}, {hi}]")));
            }
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn with_quadrant(mut self, quadrant: PoleQuadrant) -> Self {
        self.quadrant = quadrant;
        self
    }

    pub fn with_mode(mut self, mode: TuningMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn plant(&self) -> &FractionalTransferFunction {
        &self.plant
    }

    pub fn poles(&self) -> DominantPoles {
        self.poles
    }

    pub fn mode(&self) -> TuningMode {
        self.mode
    }

    pub fn bounds(&self) -> &ParamBounds {
        &self.bounds
    }

    pub fn quadrant(&self) -> PoleQuadrant {
        self.quadrant
    }

    /// The pole the residual is evaluated at.
    pub fn target_pole(&self) -> ComplexValue {
        self.poles.pole(self.quadrant)
    }

    /// Default swarm settings over this problem's search box.
    pub fn pso_config(&self) -> PsoConfig {
        let (lower, upper) = self.bounds.active(self.mode).into_iter().map(|[lo, hi]| (lo, hi)).unzip();
        PsoConfig::new(lower, upper)
    }

    /// Maps a swarm position to controller parameters.
    pub fn decode(&self, x: &[f64]) -> ControllerParams {
        match self.mode {
            TuningMode::Fractional => ControllerParams::new(x[0], x[1], x[2], x[3], x[4]),
            TuningMode::Integer => ControllerParams::integer(x[0], x[1], x[2]),
        }
    }
}

/// Relative size below which a polynomial value counts as a root: the
/// value is indistinguishable from cancellation error in its terms.
const COLLISION_TOLERANCE: f64 = 1e-9;

fn vanishes(p: &FractionalPolynomial, s: ComplexValue) -> bool {
    let scale: f64 = p.terms().iter().map(|t| t.coefficient.abs() * s.norm().powf(t.exponent)).sum();
    p.evaluate(s).norm() <= COLLISION_TOLERANCE * scale
}

fn inverse_plant_at(plant: &FractionalTransferFunction, s: ComplexValue) -> Result<ComplexValue> {
    let num = plant.numerator().evaluate(s);
    let den = plant.denominator().evaluate(s);
    if vanishes(plant.numerator(), s) {
        return Err(Error::PoleCollision { part: "numerator", re: s.re, im: s.im });
    }
    if vanishes(plant.denominator(), s) {
        return Err(Error::PoleCollision { part: "denominator", re: s.re, im: s.im });
    }
    Ok(den / num)
}

/// Real part, imaginary part, phase and fitness of the characteristic residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualValue {
    pub r: f64,
    pub i: f64,
    pub p: f64,
    pub f: f64,
}

impl ResidualValue {
    /// Phase is the one-argument `atan(i/r)`, so it lies in `[-π/2, π/2]`.
    /// `r = 0` gives `sign(i)·π/2`, and `r = i = 0` gives 0.
    pub fn from_complex(z: ComplexValue) -> Self {
        let (r, i) = (z.re, z.im);
        let p = if r != 0.0 {
            (i / r).atan()
        } else if i != 0.0 {
            FRAC_PI_2.copysign(i)
        } else {
            0.0
        };
        Self { r, i, p, f: r.abs() + i.abs() + p.abs() }
    }

    pub fn complex(&self) -> ComplexValue {
        ComplexValue::new(self.r, self.i)
    }
}

/// `G_c(p) + 1/G_p(p)` at the problem's target pole, split into R, I, P, f.
///
/// The mode of the problem is not applied here: `params` are taken as given.
pub fn residual(params: &ControllerParams, problem: &TuningProblem) -> Result<ResidualValue> {
    let s = problem.target_pole();
    let z = params.evaluate(s)? + inverse_plant_at(&problem.plant, s)?;
    Ok(ResidualValue::from_complex(z))
}

/// Constants of the hand-separated Example 1 residual
/// (plant `1/(0.8s^{2.2} + 0.5s^{0.9} + 1)`):
///
/// ```text
/// R = (K_p + 1) + T_i/m^λ·cos(θλ) + T_d·m^δ·cos(θδ) + real_offset
/// I = −T_i/m^λ·sin(θλ) + T_d·m^δ·sin(θδ) + imag_offset
/// ```
///
/// where `m`, `θ` are the pole's magnitude and angle and the offsets are the
/// plant denominator at the pole (less the 1 moved into `K_p + 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Constants {
    pub magnitude: f64,
    pub angle_deg: f64,
    pub real_offset: f64,
    pub imag_offset: f64,
}

impl Example1Constants {
    /// Constants rounded to four significant figures.
    pub const ROUNDED: Self = Self {
        magnitude: 2.2,
        angle_deg: 130.57,
        real_offset: 0.875,
        imag_offset: -3.428,
    };

    /// Constants computed at full precision for the pole `-x + jy`, using the
    /// polar form of each denominator term.
    pub fn for_pole(x: f64, y: f64) -> Self {
        let magnitude = x.hypot(y);
        let theta = y.atan2(-x);
        let term = |c: f64, a: f64| (c * magnitude.powf(a) * (a * theta).cos(), c * magnitude.powf(a) * (a * theta).sin());
        let (r1, i1) = term(0.8, 2.2);
        let (r2, i2) = term(0.5, 0.9);
        Self {
            magnitude,
            angle_deg: theta.to_degrees(),
            real_offset: r1 + r2,
            imag_offset: i1 + i2,
        }
    }
}

/// Example 1 residual from the hand-separated real/imaginary formulas.
/// Only valid for the second-quadrant pole.
pub fn residual_closed_form_example1(params: &ControllerParams, k: &Example1Constants) -> ResidualValue {
    let theta = k.angle_deg.to_radians();
    let ti_scale = params.ti / k.magnitude.powf(params.lambda);
    let td_scale = params.td * k.magnitude.powf(params.delta);
    let r = (params.kp + 1.0)
        + ti_scale * (theta * params.lambda).cos()
        + td_scale * (theta * params.delta).cos()
        + k.real_offset;
    let i = -ti_scale * (theta * params.lambda).sin() + td_scale * (theta * params.delta).sin() + k.imag_offset;
    ResidualValue::from_complex(ComplexValue::new(r, i))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub mode: TuningMode,
    pub params: ControllerParams,
    pub swarm: SwarmResult,
    /// Whether the swarm reached its target fitness.
    pub converged: bool,
}

/// Runs the swarm over the problem's search box.
///
/// The box and dimension count always come from `problem`; `pso` supplies
/// everything else (swarm size, coefficients, budget, seed).
pub fn tune(problem: &TuningProblem, pso: &PsoConfig) -> Result<TuningOutcome> {
    let template = problem.pso_config();
    let config = PsoConfig {
        dims: template.dims,
        lower_bounds: template.lower_bounds,
        upper_bounds: template.upper_bounds,
        ..pso.clone()
    };
    let swarm = minimize(&config, |x: &[f64]| residual(&problem.decode(x), problem).map(|r| r.f))?;
    let params = problem.decode(&swarm.best_position);
    Ok(TuningOutcome {
        mode: problem.mode,
        params,
        converged: swarm.best_fitness <= config.target_fitness,
        swarm,
    })
}
