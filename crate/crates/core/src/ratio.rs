//! Arbitrary-precision rationals and their wire format.
//!
//! Rationals are serialized as strings: `"p/q"` in lowest terms with the
//! sign on the numerator, or just `"p"` when the denominator is 1. The
//! parser is liberal (accepts non-reduced input and reduces it); the emitter
//! always produces the canonical form, so emitted values round-trip
//! unchanged.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

/// The crate's number type: an arbitrary-precision rational, always kept in
/// lowest terms with the sign on the numerator.
pub type Rat = BigRational;

/// Shorthand for a rational from an integer pair. Panics on zero
/// denominator; intended for literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational zero.
pub fn zero() -> Rat {
    Rat::zero()
}

/// Rational one.
pub fn one() -> Rat {
    Rat::one()
}

/// Parse a rational from its string form `"p"` or `"p/q"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = match den_str {
        Some(d) => d
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    if den.is_negative() {
        return Err(Error::Parse(format!(
            "denominator must be positive in {s:?} (sign goes on the numerator)"
        )));
    }
    Ok(Rat::new(num, den))
}

/// Canonical string form: lowest terms, sign on the numerator, `/1` omitted.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convert to `f64`, correctly handling numerator/denominator pairs whose
/// individual magnitudes overflow `f64` (deep products of edge
/// probabilities routinely do).
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift both parts down by a common power of two until they fit.
    let shift = |n: &BigInt| -> i64 { n.bits() as i64 };
    let bits = shift(r.numer()).max(shift(r.denom()));
    if bits <= 1000 {
        // to_f64 failed for another reason (e.g. 0 denominator is impossible
        // here); fall back to a lossy division.
        return r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
    }
    let down = (bits - 512) as u64;
    let num = r.numer() >> down;
    let den = r.denom() >> down;
    let sign = if r.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    let n = num.magnitude().to_f64().unwrap_or(f64::NAN);
    let d = den.magnitude().to_f64().unwrap_or(f64::NAN);
    sign * n / d
}

/// Exact rational value of a finite `f64` (every finite double is dyadic).
pub fn rat_from_f64(v: f64) -> Result<Rat> {
    Rat::from_float(v).ok_or_else(|| Error::Parse(format!("non-finite float {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_canonical_forms() {
        assert_eq!(parse_rat("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("-7/3").unwrap(), rat(-7, 3));
        assert_eq!(parse_rat("5").unwrap(), rat(5, 1));
        assert_eq!(parse_rat("0").unwrap(), zero());
        assert_eq!(parse_rat(" 4/6 ").unwrap(), rat(2, 3));
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "/", "1/0", "1/-2", "a/b", "1/2/3", "1.5"] {
            assert!(parse_rat(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn formats_without_unit_denominator() {
        assert_eq!(fmt_rat(&rat(4, 4)), "1");
        assert_eq!(fmt_rat(&rat(-3, 2)), "-3/2");
        assert_eq!(fmt_rat(&zero()), "0");
    }

    #[test]
    fn f64_conversion_survives_huge_parts() {
        // numerator and denominator each far beyond f64 range, ratio ~ 1.5
        let big = BigInt::from(2).pow(40_000u32);
        let r = Rat::new(&big * BigInt::from(3), &big * BigInt::from(2));
        let v = rat_to_f64(&r);
        assert!((v - 1.5).abs() < 1e-12, "{v}");
    }

    proptest! {
        #[test]
        fn emit_parse_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = rat(n, d);
            let s = fmt_rat(&r);
            prop_assert_eq!(parse_rat(&s).unwrap(), r);
        }

        #[test]
        fn f64_roundtrip_exact(v in -1.0e9f64..1.0e9) {
            let r = rat_from_f64(v).unwrap();
            prop_assert_eq!(rat_to_f64(&r), v);
        }
    }
}
