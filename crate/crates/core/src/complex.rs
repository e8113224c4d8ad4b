//! Principal-branch complex powers.
//!
//! Arithmetic comes from [`num_complex::Complex64`]; this module pins down the
//! branch and the behaviour at the origin, which the characteristic-equation
//! evaluation depends on.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Magnitude and principal argument of `z`, with the argument in `(-π, π]`.
///
/// The argument of the origin is 0. Points on the negative real axis map to
/// `+π` regardless of the sign of a zero imaginary part.
pub fn polar(z: ComplexValue) -> (f64, f64) {
    let magnitude = z.re.hypot(z.im);
    if magnitude == 0.0 {
        return (0.0, 0.0);
    }
    let mut argument = z.im.atan2(z.re);
    if argument <= -PI {
        argument = PI;
    }
    (magnitude, argument)
}

/// `z^alpha` on the principal branch: `|z|^alpha · e^{j·alpha·arg z}`.
///
/// At the origin, `0^alpha = 0` for `alpha > 0` and `0^0 = 1`; negative
/// exponents are a domain error there.
pub fn cpow(z: ComplexValue, alpha: f64) -> Result<ComplexValue> {
    let (magnitude, argument) = polar(z);
    if magnitude == 0.0 {
        return if alpha > 0.0 {
            Ok(ComplexValue::new(0.0, 0.0))
        } else if alpha == 0.0 {
            Ok(ComplexValue::new(1.0, 0.0))
        } else {
            Err(Error::Domain(format!(
                "0 raised to negative power {alpha}"
            )))
        };
    }
    if alpha == 0.0 {
        return Ok(ComplexValue::new(1.0, 0.0));
    }
    let scale = magnitude.powf(alpha);
    let (sin, cos) = (alpha * argument).sin_cos();
    Ok(ComplexValue::new(scale * cos, scale * sin))
}
