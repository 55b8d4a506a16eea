//! Exact arithmetic substrate: sparse multivariate polynomials over ℚ and a
//! small expression-tree layer for the non-polynomial fields (fractional
//! powers of polynomials) that show up once the exponent p enters.

mod compiled;
mod field;
mod parse;
mod poly;

pub use compiled::{CompiledField, CompiledPoly};
pub use field::{Basis, PowerExp, ScalarField, VectorField};
pub use parse::parse_poly;
pub use poly::{HardyVars, MultiPoly, VarSet};

use num_traits::ToPrimitive;

/// Exact rational scalar. Always stored reduced with positive denominator;
/// the canonical zero is 0/1.
pub type Rat = num_rational::BigRational;

/// Integer-valued rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Rational n/d. Panics if d == 0.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(n.into(), d.into())
}

/// Exact rational representation of a finite f64 (binary fractions are exact).
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational within f64 range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed, Zero};

    #[test]
    fn rationals_stay_reduced_with_positive_denominator() {
        let a = rat(4, -6);
        assert_eq!(a, rat(-2, 3));
        assert!(a.denom().is_positive());
        let z = rat(0, 5);
        assert!(z.is_zero());
        assert!(z.denom().is_one());
    }

    #[test]
    fn f64_roundtrip_is_exact_for_binary_fractions() {
        for x in [1.5, -0.25, 3.0, 0.0625] {
            assert_eq!(rat_to_f64(&rat_from_f64(x)), x);
        }
    }
}
