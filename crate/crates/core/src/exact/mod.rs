//! Exact scalar, polynomial and matrix arithmetic.

pub mod intpoly;
pub mod linalg;
pub mod mat;
pub mod parse;
pub mod poly;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use mat::{FieldElem, Mat2, Projective, Ring, Vec2};
pub use poly::{rat, AdditiveSplit, BiPoly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("polynomial has mixed monomials {}", fmt_monomials(.monomials))]
    MixedTerms { monomials: Vec<(u32, u32)> },
    #[error("polynomial is not univariate in the requested variable")]
    NotUnivariate,
    #[error("window of {given} points is too short, need at least {needed}")]
    WindowTooShort { needed: usize, given: usize },
    #[error("{0}")]
    Parse(#[from] parse::ParseError),
}

pub fn fmt_monomials(ms: &[(u32, u32)]) -> String {
    ms.iter()
        .map(|&(i, j)| BiPoly::monomial(i, j, BigRational::one()).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `lcm(1, 2, ..., n)`, with `lcm_upto(0) = 1`.
pub fn lcm_upto(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)))
}

/// Parses `"p"`, `"p/q"` or a plain decimal like `"-1.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    parse_decimal(s).map(|(v, _)| v)
}

/// Parses a decimal literal; also returns the number of fractional digits.
pub fn parse_decimal(s: &str) -> Option<(BigRational, u32)> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    if !ok(int_part) || !ok(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mag: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = BigInt::from(10).pow(frac_part.len() as u32);
    let v = BigRational::new(if neg { -mag } else { mag }, scale);
    Some((v, frac_part.len() as u32))
}

/// Decimal rendering of a rational, truncated toward zero after `places` digits.
pub fn to_decimal(v: &BigRational, places: usize) -> String {
    let neg = v.is_negative();
    let a = v.abs();
    let scale = BigInt::from(10).pow(places as u32);
    let scaled = (a.numer() * &scale) / a.denom();
    let (ip, fp) = scaled.div_rem(&scale);
    let sign = if neg && !scaled.is_zero() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{ip}");
    }
    format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = places)
}

/// Nearest `f64` to a rational, robust for huge numerators and denominators.
pub fn to_f64(v: &BigRational) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let (m, e) = log2_parts(v);
    m * 2f64.powi(e.clamp(-1100, 1100) as i32)
}

/// `ln |v|` for nonzero `v`.
pub fn ln_abs(v: &BigRational) -> f64 {
    ln_abs_int(v.numer()) - ln_abs_int(v.denom())
}

/// `ln |n|` for nonzero integers, accurate to about 50 bits for any size.
pub fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 60 {
        return n.abs().to_string().parse::<f64>().unwrap_or(0.0).ln();
    }
    let shift = bits - 60;
    let top: BigInt = n.abs() >> shift;
    let top = top.to_string().parse::<f64>().unwrap_or(1.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn log2_parts(v: &BigRational) -> (f64, i64) {
    let top = |n: &BigInt| -> (f64, i64) {
        let bits = n.bits() as i64;
        let shift = (bits - 60).max(0);
        let t: BigInt = n.abs() >> shift as u64;
        (t.to_string().parse::<f64>().unwrap_or(0.0), shift)
    };
    let (nm, ne) = top(v.numer());
    let (dm, de) = top(v.denom());
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    (sign * nm / dm, ne - de)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_and_lcm() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(lcm_upto(0), BigInt::one());
        assert_eq!(lcm_upto(3), BigInt::from(6));
        assert_eq!(lcm_upto(10), BigInt::from(2520));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("-1.25"), Some(BigRational::new((-5).into(), 4.into())));
        assert_eq!(parse_rational("7"), Some(rat(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&BigRational::new(1.into(), 3.into()), 5), "0.33333");
        assert_eq!(to_decimal(&BigRational::new((-7).into(), 2.into()), 2), "-3.50");
    }

    #[test]
    fn logs_of_huge_integers() {
        let n = BigInt::from(3).pow(1000);
        let expect = 1000.0 * 3f64.ln();
        assert!((ln_abs_int(&n) - expect).abs() < 1e-9 * expect);
        let r = BigRational::new(BigInt::from(10).pow(400) + 1, BigInt::from(10).pow(399));
        assert!((to_f64(&r) - 10.0).abs() < 1e-12);
    }
}
