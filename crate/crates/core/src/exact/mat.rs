//! 2x2 matrices over exact rings and the Möbius action on the projective line.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::BiPoly;
use super::ExactError;

/// Commutative ring operations on borrowed operands.
pub trait Ring: Clone + PartialEq + fmt::Debug + Zero + One {
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
}

/// Rings whose nonzero elements are invertible.
pub trait FieldElem: Ring {
    fn inv_ref(&self) -> Option<Self>;
}

macro_rules! ring_via_ops {
    ($t:ty) => {
        impl Ring for $t {
            fn add_ref(&self, rhs: &Self) -> Self {
                self + rhs
            }
            fn sub_ref(&self, rhs: &Self) -> Self {
                self - rhs
            }
            fn mul_ref(&self, rhs: &Self) -> Self {
                self * rhs
            }
            fn neg_ref(&self) -> Self {
                -self
            }
        }
    };
}

ring_via_ops!(BigInt);
ring_via_ops!(BigRational);
ring_via_ops!(BiPoly);

impl FieldElem for BigRational {
    fn inv_ref(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Row-major 2x2 matrix `[[m00, m01], [m10, m11]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

/// Column vector of length two.
pub type Vec2<T> = [T; 2];

impl<T: Ring> Mat2<T> {
    pub fn new(m00: T, m01: T, m10: T, m11: T) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn diag(a: T, d: T) -> Self {
        Self::new(a, T::zero(), T::zero(), d)
    }

    /// The swap matrix `[[0, 1], [1, 0]]`.
    pub fn swap_matrix() -> Self {
        Self::new(T::zero(), T::one(), T::one(), T::zero())
    }

    /// Upper unipotent `[[1, a], [0, 1]]`.
    pub fn upper(a: T) -> Self {
        Self::new(T::one(), a, T::zero(), T::one())
    }

    /// Lower unipotent `[[1, 0], [a, 1]]`.
    pub fn lower(a: T) -> Self {
        Self::new(T::one(), T::zero(), a, T::one())
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.m[i][j]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let e = |i: usize, j: usize| a[i][0].mul_ref(&b[0][j]).add_ref(&a[i][1].mul_ref(&b[1][j]));
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a.add_ref(b))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a.sub_ref(b))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.mul_ref(c))
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0].mul_ref(&m[1][1]).sub_ref(&m[0][1].mul_ref(&m[1][0]))
    }

    pub fn trace(&self) -> T {
        self.m[0][0].add_ref(&self.m[1][1])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].clone(), m[1][0].clone(), m[0][1].clone(), m[1][1].clone())
    }

    /// Classical adjugate, so `M * adj(M) = det(M) * I`.
    pub fn adjugate(&self) -> Self {
        let m = &self.m;
        Self::new(
            m[1][1].clone(),
            m[0][1].neg_ref(),
            m[1][0].neg_ref(),
            m[0][0].clone(),
        )
    }

    pub fn apply(&self, v: &Vec2<T>) -> Vec2<T> {
        let m = &self.m;
        [
            m[0][0].mul_ref(&v[0]).add_ref(&m[0][1].mul_ref(&v[1])),
            m[1][0].mul_ref(&v[0]).add_ref(&m[1][1].mul_ref(&v[1])),
        ]
    }

    pub fn col(&self, j: usize) -> Vec2<T> {
        [self.m[0][j].clone(), self.m[1][j].clone()]
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_zero())
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        let m = &self.m;
        Mat2::new(f(&m[0][0]), f(&m[0][1]), f(&m[1][0]), f(&m[1][1]))
    }

    fn zip(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            f(&a[0][0], &b[0][0]),
            f(&a[0][1], &b[0][1]),
            f(&a[1][0], &b[1][0]),
            f(&a[1][1], &b[1][1]),
        )
    }

    /// Left-to-right product of a sequence; empty products are the identity.
    pub fn product<'a, I>(iter: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        T: 'a,
    {
        iter.into_iter().fold(Self::identity(), |acc, m| acc.mul(m))
    }
}

impl<T: FieldElem> Mat2<T> {
    pub fn inverse(&self) -> Result<Self, ExactError> {
        let d = self.det().inv_ref().ok_or(ExactError::SingularMatrix)?;
        Ok(self.adjugate().scale(&d))
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }
}

impl<T: fmt::Display> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }
}

impl Mat2<BigInt> {
    pub fn to_rational(&self) -> Mat2<BigRational> {
        self.map(|v| BigRational::from_integer(v.clone()))
    }
}

/// A point of the rational projective line.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Projective {
    Finite(BigRational),
    Infinity,
}

impl Projective {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Projective::Finite(v) => Some(v),
            Projective::Infinity => None,
        }
    }

    /// Homogeneous coordinates `(num, den)`.
    fn homogeneous(&self) -> Vec2<BigRational> {
        match self {
            Projective::Finite(v) => [v.clone(), BigRational::one()],
            Projective::Infinity => [BigRational::one(), BigRational::zero()],
        }
    }

    pub fn from_homogeneous(num: &BigRational, den: &BigRational) -> Option<Self> {
        match (num.is_zero(), den.is_zero()) {
            (true, true) => None,
            (_, true) => Some(Projective::Infinity),
            _ => Some(Projective::Finite(num / den)),
        }
    }
}

impl fmt::Display for Projective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projective::Finite(v) => write!(f, "{v}"),
            Projective::Infinity => f.write_str("inf"),
        }
    }
}

impl Mat2<BigRational> {
    /// `z -> (a z + b) / (c z + d)`; fails only when the matrix annihilates `z`.
    pub fn mobius(&self, z: &Projective) -> Result<Projective, ExactError> {
        let v = self.apply(&z.homogeneous());
        Projective::from_homogeneous(&v[0], &v[1]).ok_or(ExactError::SingularMatrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rat;

    fn m(a: i64, b: i64, c: i64, d: i64) -> Mat2<BigRational> {
        Mat2::new(rat(a), rat(b), rat(c), rat(d))
    }

    #[test]
    fn product_and_det() {
        let a = m(1, 2, 3, 4);
        let b = m(0, 1, 1, 0);
        assert_eq!(a.mul(&b), m(2, 1, 4, 3));
        assert_eq!(a.det(), rat(-2));
        assert_eq!(a.mul(&a.inverse().unwrap()), Mat2::identity());
    }

    #[test]
    fn singular_inverse_is_error() {
        assert!(matches!(m(1, 2, 2, 4).inverse(), Err(ExactError::SingularMatrix)));
    }

    #[test]
    fn mobius_handles_infinity() {
        let a = m(1, 0, 1, 0);
        assert_eq!(a.mobius(&Projective::Finite(rat(0))), Err(ExactError::SingularMatrix));
        let b = m(0, 1, 1, 0);
        assert_eq!(b.mobius(&Projective::Finite(rat(0))).unwrap(), Projective::Infinity);
        assert_eq!(b.mobius(&Projective::Infinity).unwrap(), Projective::Finite(rat(0)));
        let c = m(2, 1, 1, 1);
        assert_eq!(c.mobius(&Projective::Infinity).unwrap(), Projective::Finite(rat(2)));
    }

    #[test]
    fn polynomial_matrices() {
        let x = BiPoly::x();
        let a = Mat2::new(BiPoly::zero(), BiPoly::one(), x.clone(), BiPoly::one());
        assert_eq!(a.det(), -x);
    }
}
