//! Integer-valued polynomials through the binomial basis `C(x, n)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{BiPoly, Var};
use super::ExactError;

/// `C(x, n)` as a polynomial in `x`.
pub fn binomial_poly(n: u32) -> BiPoly {
    let mut p = BiPoly::one();
    for i in 0..n {
        p = p * (BiPoly::x() - BiPoly::from_int(i as i64));
    }
    let fact = BigRational::from_integer(super::factorial(n as u64));
    p.scale(&fact.recip())
}

/// Generalised binomial coefficient `C(m, n)` for any integer `m`.
pub fn binomial(m: &BigInt, n: u32) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..n {
        num *= m - BigInt::from(i);
    }
    num / super::factorial(n as u64)
}

/// Coefficients `a_0..a_d` with `p = sum a_n C(x, n)`, via forward differences at 0.
pub fn binomial_basis(p: &BiPoly) -> Result<Vec<BigRational>, ExactError> {
    if !p.is_univariate_in(Var::X) {
        return Err(ExactError::NotUnivariate);
    }
    let d = match p.deg_x() {
        None => return Ok(Vec::new()),
        Some(d) => d as usize,
    };
    let mut diffs: Vec<BigRational> = (0..=d).map(|m| p.eval_i64(m as i64, 0)).collect();
    let mut out = Vec::with_capacity(d + 1);
    for level in 0..=d {
        out.push(diffs[0].clone());
        for i in 0..d - level {
            diffs[i] = &diffs[i + 1] - &diffs[i];
        }
        diffs.truncate(d - level);
    }
    Ok(out)
}

/// Inverse of [`binomial_basis`].
pub fn from_binomial_basis(coeffs: &[BigRational]) -> BiPoly {
    let mut out = BiPoly::zero();
    for (n, c) in coeffs.iter().enumerate() {
        out += binomial_poly(n as u32).scale(c);
    }
    out
}

/// `k | v` for a rational `v`: `v / k` is an integer. Every `v` is divisible by `k = 0` only if zero.
pub fn divides(k: &BigInt, v: &BigRational) -> bool {
    if k.is_zero() {
        return v.is_zero();
    }
    (v / BigRational::from_integer(k.clone())).is_integer()
}

/// Whether `k` divides `p(m)` for every integer `m`, decided from `window_len`
/// consecutive values starting at `start`.
pub fn divisibility_test(
    p: &BiPoly,
    k: &BigInt,
    start: &BigInt,
    window_len: usize,
) -> Result<bool, ExactError> {
    if !p.is_univariate_in(Var::X) {
        return Err(ExactError::NotUnivariate);
    }
    let need = p.deg_x().map_or(1, |d| d as usize + 1);
    if window_len < need {
        return Err(ExactError::WindowTooShort { needed: need, given: window_len });
    }
    let zero = BigRational::zero();
    Ok((0..window_len).all(|i| {
        let m = BigRational::from_integer(start + BigInt::from(i));
        divides(k, &p.eval(&m, &zero))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rat;

    fn x() -> BiPoly {
        BiPoly::x()
    }

    #[test]
    fn basis_examples() {
        let tri = (x() * (x() + BiPoly::one())).scale(&BigRational::new(1.into(), 2.into()));
        assert_eq!(binomial_basis(&tri).unwrap(), vec![rat(0), rat(1), rat(1)]);
        assert_eq!(binomial_basis(&BiPoly::one()).unwrap(), vec![rat(1)]);
        assert_eq!(binomial_basis(&x().pow(2)).unwrap(), vec![rat(0), rat(1), rat(2)]);
        assert!(binomial_basis(&BiPoly::zero()).unwrap().is_empty());
    }

    #[test]
    fn divisibility_examples() {
        let k2 = BigInt::from(2);
        let g = x() * (x() + BiPoly::one());
        assert!(divisibility_test(&g, &k2, &BigInt::zero(), 3).unwrap());
        assert!(!divisibility_test(&x(), &k2, &BigInt::zero(), 2).unwrap());
        let c = x().pow(3) - x();
        assert!(divisibility_test(&c, &BigInt::from(6), &BigInt::zero(), 4).unwrap());
        for m in -20..=20 {
            assert!(divides(&BigInt::from(6), &c.eval_i64(m, 0)));
        }
    }

    #[test]
    fn short_window_rejected() {
        let c = x().pow(3);
        assert_eq!(
            divisibility_test(&c, &BigInt::from(2), &BigInt::zero(), 3),
            Err(ExactError::WindowTooShort { needed: 4, given: 3 })
        );
    }

    #[test]
    fn generalised_binomial_negative_argument() {
        assert_eq!(binomial(&BigInt::from(-1), 3), BigInt::from(-1));
        assert_eq!(binomial(&BigInt::from(5), 2), BigInt::from(10));
        assert_eq!(binomial(&BigInt::from(2), 5), BigInt::zero());
    }
}
