//! Exact rational scalars: aliases and small helpers around `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The scalar type used everywhere in this crate.
pub type Q = BigRational;

/// Integer-to-rational shorthand.
pub fn qz(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from numerator/denominator.
pub fn qq(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// `n!` as a rational (panics for negative input by construction: `u64`).
pub fn factorial(n: u64) -> Q {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Q::from_integer(acc)
}

/// `(-1)^k` as a rational.
pub fn sign_pow(k: u64) -> Q {
    if k % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Format a rational exactly, as `"3"` or `"-3/4"`.
pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse an exact rational from `"3"`, `"-3/4"`, or `"0"` style strings.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|e| format!("bad numerator {num_s:?}: {e}"))?;
    let den: BigInt = den_s
        .parse()
        .map_err(|e| format!("bad denominator {den_s:?}: {e}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Q::new(num, den))
}

/// True if `x` is a non-negative integer.
pub fn is_nonneg_integer(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_format_parse() {
        for s in ["0", "7", "-7", "3/4", "-3/4", "22/7"] {
            let x = parse_q(s).unwrap();
            assert_eq!(format_q(&x), s);
        }
        // Non-canonical inputs normalize.
        assert_eq!(format_q(&parse_q("4/2").unwrap()), "2");
        assert_eq!(format_q(&parse_q("2/-4").unwrap()), "-1/2");
        assert_eq!(format_q(&parse_q(" 1 / 3 ").unwrap()), "1/3");
    }

    #[test]
    fn parse_errors() {
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("a").is_err());
        assert!(parse_q("1/b").is_err());
        assert!(parse_q("1.5").is_err());
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), qz(1));
        assert_eq!(factorial(1), qz(1));
        assert_eq!(factorial(5), qz(120));
    }

    #[test]
    fn sign_pow_values() {
        assert_eq!(sign_pow(0), qz(1));
        assert_eq!(sign_pow(1), qz(-1));
        assert_eq!(sign_pow(4), qz(1));
    }
}
