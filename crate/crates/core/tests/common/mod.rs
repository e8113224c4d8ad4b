#![allow(dead_code)]

use fopid::{poles_from_damping, ControllerParams, FractionalTransferFunction, TuningMode, TuningProblem};

pub fn example1_plant() -> FractionalTransferFunction {
    FractionalTransferFunction::from_pairs(&[(1.0, 0.0)], &[(0.8, 2.2), (0.5, 0.9), (1.0, 0.0)]).unwrap()
}

pub fn example2_plant() -> FractionalTransferFunction {
    FractionalTransferFunction::from_pairs(&[(400.0, 0.0)], &[(1.0, 2.0), (50.0, 1.0)]).unwrap()
}

pub fn problem(plant: FractionalTransferFunction, mode: TuningMode) -> TuningProblem {
    TuningProblem::new(plant, poles_from_damping(0.65, 2.2).unwrap(), mode).unwrap()
}

pub const EX1_INTEGER: ControllerParams = ControllerParams { kp: 214.84, ti: 361.57, td: 76.76, lambda: 1.0, delta: 1.0 };
pub const EX1_FRACTIONAL: ControllerParams =
    ControllerParams { kp: 442.68, ti: 324.03, td: 115.27, lambda: 1.5, delta: 1.41 };
pub const EX2_INTEGER: ControllerParams = ControllerParams { kp: 3.2, ti: 5.41, td: 1.0, lambda: 1.0, delta: 1.0 };
pub const EX2_FRACTIONAL: ControllerParams =
    ControllerParams { kp: 32.01, ti: 10.14, td: 9.71, lambda: 1.19, delta: 1.36 };

/// Classical underdamped second-order unit-step response.
pub fn second_order_step(zeta: f64, w0: f64, t: f64) -> f64 {
    let r = (1.0 - zeta * zeta).sqrt();
    let wd = w0 * r;
    1.0 - (-zeta * w0 * t).exp() * ((wd * t).cos() + zeta / r * (wd * t).sin())
}

pub fn second_order_tf(zeta: f64, w0: f64) -> FractionalTransferFunction {
    FractionalTransferFunction::from_pairs(&[(w0 * w0, 0.0)], &[(1.0, 2.0), (2.0 * zeta * w0, 1.0), (w0 * w0, 0.0)])
        .unwrap()
}
