//! Fractional polynomials and the transfer functions built from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{cpow, ComplexValue};
use crate::error::{Error, Result};

/// Exponents closer than this are treated as equal when merging terms.
pub const EXPONENT_MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub exponent: f64,
}

/// A finite sum `Σ c_i s^{α_i}` with real coefficients and non-negative real
/// exponents.
///
/// Terms are kept in canonical form: strictly increasing exponents, equal
/// exponents merged, zero coefficients dropped. The empty polynomial is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractionalPolynomial {
    terms: Vec<Term>,
}

impl FractionalPolynomial {
    /// Builds a polynomial from `(coefficient, exponent)` pairs.
    pub fn new<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let terms = terms
            .into_iter()
            .map(|(coefficient, exponent)| {
                if !coefficient.is_finite() {
                    return Err(Error::Domain(format!("non-finite coefficient {coefficient}")));
                }
                if !exponent.is_finite() || exponent < 0.0 {
                    return Err(Error::Domain(format!(
                        "exponent must be finite and non-negative, got {exponent}"
                    )));
                }
                Ok(Term { coefficient, exponent })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalized(terms))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::normalized(vec![Term { coefficient: c, exponent: 0.0 }])
    }

    fn normalized(mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for term in terms {
            match merged.last_mut() {
                Some(last) if term.exponent - last.exponent <= EXPONENT_MERGE_TOLERANCE => {
                    last.coefficient += term.coefficient;
                }
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.terms.iter().map(|t| (t.coefficient, t.exponent)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::normalized(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn evaluate(&self, s: ComplexValue) -> ComplexValue {
        evaluate_poly(self, s)
    }
}

impl fmt::Display for FractionalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " {} ", if t.coefficient < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", t.coefficient.abs())?;
            } else {
                write!(f, "{}", t.coefficient)?;
            }
            if t.exponent != 0.0 {
                write!(f, "·s^{}", t.exponent)?;
            }
        }
        Ok(())
    }
}

/// `Σ c_i · s^{α_i}` on the principal branch.
pub fn evaluate_poly(p: &FractionalPolynomial, s: ComplexValue) -> ComplexValue {
    p.terms
        .iter()
        .map(|t| {
            // Exponents are non-negative, so cpow is total here.
            let power = cpow(s, t.exponent).unwrap_or_default();
            power * t.coefficient
        })
        .sum()
}

/// Exponent-wise convolution of two fractional polynomials.
pub fn poly_multiply(a: &FractionalPolynomial, b: &FractionalPolynomial) -> FractionalPolynomial {
    let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
    for x in &a.terms {
        for y in &b.terms {
            terms.push(Term {
                coefficient: x.coefficient * y.coefficient,
                exponent: x.exponent + y.exponent,
            });
        }
    }
    FractionalPolynomial::normalized(terms)
}

/// `N(s) / D(s)` with fractional polynomials on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalTransferFunction {
    numerator: FractionalPolynomial,
    denominator: FractionalPolynomial,
}

impl FractionalTransferFunction {
    pub fn new(numerator: FractionalPolynomial, denominator: FractionalPolynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::EmptyDenominator);
        }
        Ok(Self { numerator, denominator })
    }

    pub fn from_pairs(numerator: &[(f64, f64)], denominator: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            FractionalPolynomial::new(numerator.iter().copied())?,
            FractionalPolynomial::new(denominator.iter().copied())?,
        )
    }

    pub fn numerator(&self) -> &FractionalPolynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &FractionalPolynomial {
        &self.denominator
    }

    /// Value at `s`; fails if the denominator vanishes there.
    pub fn evaluate(&self, s: ComplexValue) -> Result<ComplexValue> {
        let den = evaluate_poly(&self.denominator, s);
        if den.norm() == 0.0 {
            return Err(Error::PoleCollision { part: "denominator", re: s.re, im: s.im });
        }
        Ok(evaluate_poly(&self.numerator, s) / den)
    }
}

impl fmt::Display for FractionalTransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

/// The five parameters of `K_p + T_i s^{-λ} + T_d s^{δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub kp: f64,
    pub ti: f64,
    pub td: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl ControllerParams {
    pub fn new(kp: f64, ti: f64, td: f64, lambda: f64, delta: f64) -> Self {
        Self { kp, ti, td, lambda, delta }
    }

    /// Classical PID: `λ = δ = 1`.
    pub fn integer(kp: f64, ti: f64, td: f64) -> Self {
        Self::new(kp, ti, td, 1.0, 1.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.kp, self.ti, self.td, self.lambda, self.delta]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Controller value at `s` computed straight from the parameters.
    pub fn evaluate(&self, s: ComplexValue) -> Result<ComplexValue> {
        Ok(self.kp + cpow(s, -self.lambda)? * self.ti + cpow(s, self.delta)? * self.td)
    }
}

/// `(K_p s^λ + T_i + T_d s^{λ+δ}) / s^λ`, i.e. the controller with the
/// integral power cleared so every exponent is non-negative.
pub fn controller_tf(c: &ControllerParams) -> Result<FractionalTransferFunction> {
    if !c.is_finite() {
        return Err(Error::Domain(format!("non-finite controller parameters {c:?}")));
    }
    if c.lambda < 0.0 {
        return Err(Error::Domain(format!("integral order must be >= 0, got {}", c.lambda)));
    }
    if c.lambda + c.delta < 0.0 {
        return Err(Error::Domain(format!(
            "lambda + delta must be >= 0, got {}",
            c.lambda + c.delta
        )));
    }
    let numerator = FractionalPolynomial::new([
        (c.kp, c.lambda),
        (c.ti, 0.0),
        (c.td, c.lambda + c.delta),
    ])?;
    let denominator = FractionalPolynomial::new([(1.0, c.lambda)])?;
    FractionalTransferFunction::new(numerator, denominator)
}

/// Unity-feedback closed loop `G/(1+G)` with `G = gc·gp`:
/// `N_c N_p / (D_c D_p + N_c N_p)`.
pub fn closed_loop(
    gc: &FractionalTransferFunction,
    gp: &FractionalTransferFunction,
) -> Result<FractionalTransferFunction> {
    let forward = poly_multiply(&gc.numerator, &gp.numerator);
    let denominator = poly_multiply(&gc.denominator, &gp.denominator).add(&forward);
    if denominator.is_zero() {
        return Err(Error::DegenerateClosedLoop);
    }
    FractionalTransferFunction::new(forward, denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn poly(pairs: &[(f64, f64)]) -> FractionalPolynomial {
        FractionalPolynomial::new(pairs.iter().copied()).unwrap()
    }

    fn example1_denominator() -> FractionalPolynomial {
        poly(&[(0.8, 2.2), (0.5, 0.9), (1.0, 0.0)])
    }

    #[test]
    fn normalization_merges_and_sorts() {
        let p = poly(&[(1.0, 2.0), (2.0, 0.5), (3.0, 2.0 + 1e-13), (0.0, 1.0)]);
        assert_eq!(p.to_pairs(), vec![(2.0, 0.5), (4.0, 2.0)]);
        let cancelled = poly(&[(1.0, 1.0), (-1.0, 1.0)]);
        assert!(cancelled.is_zero());
    }

    #[test]
    fn rejects_negative_exponent() {
        assert!(FractionalPolynomial::new([(1.0, -0.5)]).is_err());
        assert!(FractionalPolynomial::new([(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn evaluate_constant_and_linear() {
        let s = ComplexValue::new(-0.3, 4.0);
        assert_eq!(evaluate_poly(&poly(&[(1.0, 0.0)]), s), ComplexValue::new(1.0, 0.0));
        let linear = poly(&[(1.0, 1.0), (2.0, 0.0)]);
        assert_eq!(evaluate_poly(&linear, ComplexValue::new(3.0, 0.0)), ComplexValue::new(5.0, 0.0));
    }

    #[test]
    fn example1_denominator_at_dominant_pole() {
        // Pole from ζ = 0.65, ω₀ = 2.2; its imaginary part 1.67185 rounds to 1.67.
        let y = 2.2 * (1.0f64 - 0.65 * 0.65).sqrt();
        let v = evaluate_poly(&example1_denominator(), ComplexValue::new(-1.43, y));
        assert!((v.re - 1.875).abs() < 0.005, "re = {}", v.re);
        assert!((v.im + 3.428).abs() < 0.005, "im = {}", v.im);
    }

    #[test]
    fn controller_tf_examples() {
        let gain = controller_tf(&ControllerParams::integer(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(gain.numerator().to_pairs(), vec![(1.0, 1.0)]);
        assert_eq!(gain.denominator().to_pairs(), vec![(1.0, 1.0)]);

        let frac = controller_tf(&ControllerParams::new(442.68, 324.03, 115.27, 1.5, 1.41)).unwrap();
        let num = frac.numerator().to_pairs();
        assert_eq!(num.len(), 3);
        assert_eq!(num[0], (324.03, 0.0));
        assert_eq!(num[1], (442.68, 1.5));
        assert_eq!(num[2].0, 115.27);
        assert_relative_eq!(num[2].1, 2.91, epsilon = 1e-12);
        assert_eq!(frac.denominator().to_pairs(), vec![(1.0, 1.5)]);

        let int = controller_tf(&ControllerParams::integer(214.84, 361.57, 76.76)).unwrap();
        assert_eq!(int.numerator().to_pairs(), vec![(361.57, 0.0), (214.84, 1.0), (76.76, 2.0)]);
        assert_eq!(int.denominator().to_pairs(), vec![(1.0, 1.0)]);
    }

    #[test]
    fn controller_tf_rejects_negative_lambda() {
        assert!(controller_tf(&ControllerParams::new(1.0, 1.0, 1.0, -0.1, 1.0)).is_err());
    }

    #[test]
    fn multiply_examples() {
        let a = poly(&[(2.0, 1.0), (1.0, 0.0)]);
        assert_eq!(poly_multiply(&FractionalPolynomial::constant(1.0), &a), a);
        assert_eq!(
            poly_multiply(&poly(&[(1.0, 0.5)]), &poly(&[(1.0, 0.5)])).to_pairs(),
            vec![(1.0, 1.0)]
        );
        // (2s + 1)(3s^0.5) = 6s^1.5 + 3s^0.5 by hand.
        assert_eq!(
            poly_multiply(&a, &poly(&[(3.0, 0.5)])).to_pairs(),
            vec![(3.0, 0.5), (6.0, 1.5)]
        );
    }

    #[test]
    fn closed_loop_first_order() {
        let gc = FractionalTransferFunction::from_pairs(&[(1.0, 0.0)], &[(1.0, 0.0)]).unwrap();
        let gp = FractionalTransferFunction::from_pairs(&[(1.0, 0.0)], &[(1.0, 1.0), (1.0, 0.0)]).unwrap();
        let cl = closed_loop(&gc, &gp).unwrap();
        assert_eq!(cl.numerator().to_pairs(), vec![(1.0, 0.0)]);
        assert_eq!(cl.denominator().to_pairs(), vec![(2.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn closed_loop_example2_integer() {
        // 400/(s²+50s) with 3.2 + 5.41/s + s, expanded by hand:
        // s(s²+50s) + 400(3.2s + 5.41 + s²) = s³ + 450s² + 1280s + 2164.
        let gc = controller_tf(&ControllerParams::integer(3.2, 5.41, 1.0)).unwrap();
        let gp = FractionalTransferFunction::from_pairs(&[(400.0, 0.0)], &[(1.0, 2.0), (50.0, 1.0)]).unwrap();
        let cl = closed_loop(&gc, &gp).unwrap();
        let expected = [(2164.0, 0.0), (1280.0, 1.0), (450.0, 2.0), (1.0, 3.0)];
        let got = cl.denominator().to_pairs();
        assert_eq!(got.len(), expected.len());
        for ((c, e), (ce, ee)) in got.iter().zip(expected) {
            assert_relative_eq!(*c, ce, max_relative = 1e-12);
            assert_eq!(*e, ee);
        }
    }

    #[test]
    fn closed_loop_without_control_action() {
        let gc = controller_tf(&ControllerParams::integer(0.0, 0.0, 0.0)).unwrap();
        let gp = FractionalTransferFunction::new(FractionalPolynomial::constant(1.0), example1_denominator()).unwrap();
        let cl = closed_loop(&gc, &gp).unwrap();
        assert!(cl.numerator().is_zero());
        assert!(!cl.denominator().is_zero());
    }

    #[test]
    fn closed_loop_degenerate() {
        let gc = FractionalTransferFunction::from_pairs(&[(-1.0, 0.0)], &[(1.0, 0.0)]).unwrap();
        let gp = FractionalTransferFunction::from_pairs(&[(1.0, 0.0)], &[(1.0, 0.0)]).unwrap();
        assert!(matches!(closed_loop(&gc, &gp), Err(Error::DegenerateClosedLoop)));
    }

    #[test]
    fn empty_denominator_rejected() {
        assert!(matches!(
            FractionalTransferFunction::new(FractionalPolynomial::constant(1.0), FractionalPolynomial::zero()),
            Err(Error::EmptyDenominator)
        ));
    }

    fn arb_poly() -> impl Strategy<Value = FractionalPolynomial> {
        prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64), 1..5)
            .prop_map(|pairs| FractionalPolynomial::new(pairs).unwrap())
    }

    fn left_half_plane() -> impl Strategy<Value = ComplexValue> {
        (-5.0..-0.01f64, -5.0..5.0f64).prop_map(|(re, im)| ComplexValue::new(re, im))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn product_evaluates_as_product(a in arb_poly(), b in arb_poly(), s in left_half_plane()) {
            let lhs = evaluate_poly(&poly_multiply(&a, &b), s);
            let rhs = evaluate_poly(&a, s) * evaluate_poly(&b, s);
            // Summation can cancel, so measure against the term magnitudes.
            let scale: f64 = poly_multiply(&a, &b)
                .terms()
                .iter()
                .map(|t| t.coefficient.abs() * s.norm().powf(t.exponent))
                .sum::<f64>()
                .max(rhs.norm())
                .max(1e-300);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
        }

        #[test]
        fn integer_controller_matches_direct_form(
            kp in 0.0..1000.0f64, ti in 0.0..500.0f64, td in 0.0..500.0f64,
            re in -10.0..10.0f64, im in -10.0..10.0f64,
        ) {
            let s = ComplexValue::new(re, im);
            prop_assume!(s.norm() > 1e-3);
            let c = ControllerParams::integer(kp, ti, td);
            let via_tf = controller_tf(&c).unwrap().evaluate(s).unwrap();
            let direct = kp + ti / s + td * s;
            let scale = kp + ti / s.norm() + td * s.norm();
            prop_assert!((via_tf - direct).norm() <= 1e-12 * scale.max(direct.norm()));
        }

        #[test]
        fn normalization_is_idempotent(pairs in prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64), 0..8)) {
            let once = FractionalPolynomial::new(pairs).unwrap();
            let twice = FractionalPolynomial::new(once.to_pairs()).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
