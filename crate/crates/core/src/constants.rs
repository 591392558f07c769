//! Reference constants with certified error radii.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{parse_decimal, parse_rational, to_decimal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstantError {
    #[error("unknown constant '{0}': expected zeta3, ln2, e, pi, e-1, pi^2/12, a rational p/q or a decimal")]
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Zeta3,
    Ln2,
    E,
    Pi,
    /// `e - 1`
    EMinusOne,
    /// `pi^2 / 12 = zeta(2) / 2`
    PiSquaredOver12,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Zeta3 => "zeta3",
            Builtin::Ln2 => "ln2",
            Builtin::E => "e",
            Builtin::Pi => "pi",
            Builtin::EMinusOne => "e-1",
            Builtin::PiSquaredOver12 => "pi^2/12",
        }
    }
}

/// A rational approximation `value` with `|true - value| <= radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub value: BigRational,
    pub radius: BigRational,
}

impl Approximation {
    pub fn exact(value: BigRational) -> Self {
        Self { value, radius: BigRational::zero() }
    }

    /// Whether `|true - x|` is pinned to relative accuracy of about `2^-slack_bits`.
    pub fn separates(&self, x: &BigRational, slack_bits: u32) -> bool {
        let d = (&self.value - x).abs();
        let margin = &self.radius * BigRational::from_integer(BigInt::one() << slack_bits);
        d > margin
    }

    pub fn to_f64(&self) -> f64 {
        crate::exact::to_f64(&self.value)
    }
}

/// The target value `L` of an approximation experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Builtin(Builtin),
    Exact(BigRational),
    /// User decimal, trusted at face value with half a unit in the last place.
    Decimal { text: String, value: BigRational, radius: BigRational },
}

impl Constant {
    pub fn approximate(&self, bits: u64) -> Approximation {
        match self {
            Constant::Builtin(b) => compute_builtin(*b, bits),
            Constant::Exact(v) => Approximation::exact(v.clone()),
            Constant::Decimal { value, radius, .. } => Approximation { value: value.clone(), radius: radius.clone() },
        }
    }

    /// Whether more precision can be requested.
    pub fn refinable(&self) -> bool {
        matches!(self, Constant::Builtin(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Constant::Builtin(b) => format!("builtin {} (series with certified tail bound)", b.name()),
            Constant::Exact(v) => format!("exact rational {v}"),
            Constant::Decimal { text, .. } => format!("user decimal {text} (trusted, radius half ulp)"),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Constant::Builtin(b) => b.name().to_string(),
            Constant::Exact(v) => v.to_string(),
            Constant::Decimal { text, .. } => text.clone(),
        }
    }
}

impl FromStr for Constant {
    type Err = ConstantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let b = match t.to_ascii_lowercase().as_str() {
            "zeta3" | "zeta(3)" => Some(Builtin::Zeta3),
            "ln2" | "log2" => Some(Builtin::Ln2),
            "e" => Some(Builtin::E),
            "pi" => Some(Builtin::Pi),
            "e-1" => Some(Builtin::EMinusOne),
            "pi^2/12" | "zeta2/2" => Some(Builtin::PiSquaredOver12),
            _ => None,
        };
        if let Some(b) = b {
            return Ok(Constant::Builtin(b));
        }
        if t.contains('/') {
            return parse_rational(t).map(Constant::Exact).ok_or_else(|| ConstantError::Unknown(t.into()));
        }
        let (value, places) = parse_decimal(t).ok_or_else(|| ConstantError::Unknown(t.into()))?;
        let radius = BigRational::new(BigInt::one(), BigInt::from(2) * BigInt::from(10).pow(places));
        Ok(Constant::Decimal { text: t.to_string(), value, radius })
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Shared approximation store that only ever grows in precision.
pub struct PrecisionLadder {
    constant: Constant,
    cache: Mutex<Option<(u64, Approximation)>>,
}

pub const MAX_BITS: u64 = 1 << 20;

impl PrecisionLadder {
    pub fn new(constant: Constant) -> Self {
        Self { constant, cache: Mutex::new(None) }
    }

    pub fn constant(&self) -> &Constant {
        &self.constant
    }

    pub fn approx(&self, bits: u64) -> Approximation {
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((have, a)) = guard.as_ref() {
            if *have >= bits || !self.constant.refinable() {
                return a.clone();
            }
        }
        let a = self.constant.approximate(bits);
        *guard = Some((bits, a.clone()));
        a
    }

    /// Largest precision computed so far.
    pub fn current(&self) -> Option<Approximation> {
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).as_ref().map(|(_, a)| a.clone())
    }
}

fn fixed(units: BigInt, w: u64) -> BigRational {
    BigRational::new(units, BigInt::one() << w)
}

/// Fixed point computation at `bits` plus guard bits. Each series keeps a count
/// of truncation errors (in units of the last place) plus a tail bound.
pub fn compute_builtin(b: Builtin, bits: u64) -> Approximation {
    match b {
        Builtin::EMinusOne => {
            let e = compute_builtin(Builtin::E, bits);
            return Approximation { value: e.value - BigRational::one(), radius: e.radius };
        }
        Builtin::PiSquaredOver12 => {
            let p = compute_builtin(Builtin::Pi, bits + 8);
            let twelve = BigRational::from_integer(BigInt::from(12));
            let radius = (&p.value.abs() * &p.radius * BigRational::from_integer(BigInt::from(2)) + &p.radius * &p.radius) / &twelve;
            return Approximation { value: &p.value * &p.value / twelve, radius };
        }
        _ => {}
    }
    let w = bits + 32 + (64 - bits.leading_zeros() as u64);
    let one = BigInt::one() << w;
    let (units, ulps) = match b {
        Builtin::E => {
            let mut t = one.clone();
            let mut sum = one.clone();
            let mut k = 1u64;
            while !t.is_zero() {
                t /= k;
                sum += &t;
                k += 1;
            }
            (sum, 2 * k + 8)
        }
        Builtin::Ln2 => {
            let mut sum = BigInt::zero();
            for k in 1..=w {
                sum += (&one >> k) / BigInt::from(k);
            }
            (sum, 2 * w + 2)
        }
        Builtin::Pi => {
            let (a, ea) = arctan_inv(5, &one);
            let (c, ec) = arctan_inv(239, &one);
            (a * 16 - c * 4, 16 * ea + 4 * ec)
        }
        Builtin::EMinusOne | Builtin::PiSquaredOver12 => unreachable!("derived above"),
        Builtin::Zeta3 => {
            // zeta(3) = 5/2 * sum (-1)^(k+1) / (k^3 C(2k, k))
            let mut sum = BigInt::zero();
            let mut central = BigInt::from(2);
            let mut k = 1u64;
            loop {
                let den = &central * BigInt::from(k).pow(3);
                let t = &one / &den;
                if t.is_zero() {
                    break;
                }
                if k % 2 == 1 {
                    sum += t;
                } else {
                    sum -= t;
                }
                central = central * BigInt::from(2 * k + 1) * BigInt::from(2 * k + 2) / BigInt::from((k + 1) * (k + 1));
                k += 1;
            }
            (sum * 5, 3 * k + 6)
        }
    };
    let value = match b {
        Builtin::Zeta3 => fixed(units, w + 1),
        _ => fixed(units, w),
    };
    Approximation { value, radius: fixed(BigInt::from(ulps), w) }
}

/// `arctan(1/x)` in fixed point, and its error in units of the last place.
fn arctan_inv(x: u64, one: &BigInt) -> (BigInt, u64) {
    let x2 = BigInt::from(x * x);
    let mut pw = one / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !pw.is_zero() {
        let t = &pw / BigInt::from(2 * j + 1);
        if j % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        pw /= &x2;
        j += 1;
    }
    (sum, 2 * j + 4)
}

/// Decimal digits of a builtin, truncated; handy for reports.
pub fn builtin_decimal(b: Builtin, places: usize) -> String {
    let a = compute_builtin(b, (places as f64 * 3.33) as u64 + 16);
    to_decimal(&a.value, places)
}
