//! Exact rational helpers: construction, parsing and the `"num/den"` string
//! form used by every JSON and text format in the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"a/b"`, integers, and plain decimals (`"-0.125"`, `"1e-3"`) exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse {s:?} as a rational"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

/// Smallest dyadic rational `>= x` with denominator `2^bits`.
pub fn ceil_dyadic(x: f64, bits: u32) -> Result<Rational> {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).ceil();
    Ok(from_f64(n)? / from_f64(scale)?)
}

/// Tolerance given as a float, made exact.
pub fn tol(x: f64) -> Rational {
    from_f64(x).unwrap_or_else(|_| Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert_eq!(parse("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse("-.5").unwrap(), rat(-1, 2));
        assert_eq!(parse("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse("1E2").unwrap(), int(100));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn format_round_trips() {
        for x in [rat(1, 3), int(0), rat(-22, 7), int(5)] {
            assert_eq!(parse(&format(&x)).unwrap(), x);
        }
        assert_eq!(format(&rat(4, 2)), "2");
    }

    #[test]
    fn ceil_dyadic_is_upper_bound() {
        let r = ceil_dyadic(std::f64::consts::SQRT_2, 30).unwrap();
        assert!(to_f64(&r) >= std::f64::consts::SQRT_2);
        assert!(to_f64(&r) - std::f64::consts::SQRT_2 < 1e-8);
    }
}
