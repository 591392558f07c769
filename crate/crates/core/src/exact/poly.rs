//! Bivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ExactError;

/// Which of the two variables an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

/// A polynomial in `x` and `y` over the rationals.
///
/// Stored sparsely as a map from exponent pairs `(i, j)` (meaning `x^i y^j`)
/// to nonzero coefficients, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

/// Result of splitting a polynomial without mixed monomials into `bx(x) + by(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveSplit {
    pub bx: BiPoly,
    pub by: BiPoly,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Self::x(),
            Var::Y => Self::y(),
        }
    }

    pub fn monomial(i: u32, j: u32, c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert((i, j), c);
        }
        p
    }

    /// Builds a polynomial from `((i, j), c)` triples; repeated exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), BigRational)>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Integer coefficient convenience used heavily by tests and presets.
    pub fn from_int_terms(terms: &[((u32, u32), i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(e, c)| (e, rat(c))))
    }

    /// Univariate polynomial in `v` from ascending coefficients.
    pub fn from_univariate(v: Var, coeffs: &[BigRational]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(k, c)| {
            let k = k as u32;
            let e = match v {
                Var::X => (k, 0),
                Var::Y => (0, k),
            };
            (e, c.clone())
        }))
    }

    fn add_term(&mut self, e: (u32, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == (0, 0))
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(0, 0)
    }

    /// Degree in `x`; `None` stands for the degree of the zero polynomial.
    pub fn deg_x(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.0).max()
    }

    pub fn deg_y(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.1).max()
    }

    pub fn deg(&self, v: Var) -> Option<u32> {
        match v {
            Var::X => self.deg_x(),
            Var::Y => self.deg_y(),
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.0 + e.1).max()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Whether the polynomial depends on `v` only (constants count).
    pub fn is_univariate_in(&self, v: Var) -> bool {
        self.terms.keys().all(|e| match v {
            Var::X => e.1 == 0,
            Var::Y => e.0 == 0,
        })
    }

    /// Ascending coefficients when univariate in `v`.
    pub fn to_univariate(&self, v: Var) -> Result<Vec<BigRational>, ExactError> {
        if !self.is_univariate_in(v) {
            return Err(ExactError::NotUnivariate);
        }
        let d = match self.deg(v) {
            None => return Ok(Vec::new()),
            Some(d) => d as usize,
        };
        let mut out = vec![BigRational::zero(); d + 1];
        for (e, c) in &self.terms {
            let k = match v {
                Var::X => e.0,
                Var::Y => e.1,
            } as usize;
            out[k] = c.clone();
        }
        Ok(out)
    }

    /// Leading coefficient with respect to the total-degree-then-`x` order.
    pub fn leading_coeff(&self) -> BigRational {
        self.terms
            .iter()
            .max_by_key(|(e, _)| (e.0 + e.1, e.0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let xs = powers(x, self.deg_x().unwrap_or(0));
        let ys = powers(y, self.deg_y().unwrap_or(0));
        let mut acc = BigRational::zero();
        for ((i, j), c) in &self.terms {
            acc += c * &xs[*i as usize] * &ys[*j as usize];
        }
        acc
    }

    pub fn eval_i64(&self, x: i64, y: i64) -> BigRational {
        self.eval(&rat(x), &rat(y))
    }

    /// Value of a polynomial univariate in `x` (any `y` terms are evaluated at 0).
    pub fn eval_x(&self, x: &BigRational) -> BigRational {
        self.eval(x, &BigRational::zero())
    }

    /// Substitutes `v := value`, leaving a polynomial in the other variable.
    pub fn partial_eval(&self, v: Var, value: &BigRational) -> Self {
        let d = self.deg(v).unwrap_or(0);
        let pw = powers(value, d);
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            match v {
                Var::X => out.add_term((0, *j), c * &pw[*i as usize]),
                Var::Y => out.add_term((*i, 0), c * &pw[*j as usize]),
            }
        }
        out
    }

    /// Composition `p(sx(x, y), sy(x, y))`.
    pub fn substitute(&self, sx: &BiPoly, sy: &BiPoly) -> Self {
        let xs = poly_powers(sx, self.deg_x().unwrap_or(0));
        let ys = poly_powers(sy, self.deg_y().unwrap_or(0));
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            let t = (&xs[*i as usize] * &ys[*j as usize]).scale(c);
            out += t;
        }
        out
    }

    /// `p(x + dx, y + dy)`, by binomial expansion of each term.
    pub fn shift(&self, dx: &BigRational, dy: &BigRational) -> Self {
        let rows = |d: &BigRational, n: u32| -> Vec<Vec<BigRational>> {
            // rows[i][k] = C(i, k) d^(i-k)
            let mut out: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
            for i in 1..=n as usize {
                let prev = &out[i - 1];
                let mut row = vec![BigRational::zero(); i + 1];
                for (k, v) in prev.iter().enumerate() {
                    row[k] += v * d;
                    row[k + 1] += v;
                }
                out.push(row);
            }
            out
        };
        let bx = rows(dx, self.deg_x().unwrap_or(0));
        let by = rows(dy, self.deg_y().unwrap_or(0));
        let mut acc: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for ((i, j), c) in &self.terms {
            for (k, cx) in bx[*i as usize].iter().enumerate() {
                if cx.is_zero() {
                    continue;
                }
                let cc = c * cx;
                for (l, cy) in by[*j as usize].iter().enumerate() {
                    if !cy.is_zero() {
                        *acc.entry((k as u32, l as u32)).or_insert_with(BigRational::zero) += &cc * cy;
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Self { terms: acc }
    }

    pub fn shift_i64(&self, dx: i64, dy: i64) -> Self {
        self.shift(&rat(dx), &rat(dy))
    }

    /// `p(y, x)`.
    pub fn swap(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        }
    }

    /// `p(-x, y)`.
    pub fn reflect_x(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|((i, j), c)| ((*i, *j), if i % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// `p(x, -y)`.
    pub fn reflect_y(&self) -> Self {
        self.swap().reflect_x().swap()
    }

    /// Terms in which both variables occur.
    pub fn mixed_part(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| *i > 0 && *j > 0)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Splits into `bx(x) + by(y)` with `bx = p(x,0) - p(0,0) + offset`
    /// and `by = p(0,y) - offset`.
    pub fn split_additive(&self, offset: &BigRational) -> Result<AdditiveSplit, ExactError> {
        let mixed = self.mixed_part();
        if !mixed.is_zero() {
            return Err(ExactError::MixedTerms {
                monomials: mixed.terms.keys().copied().collect(),
            });
        }
        let c0 = self.constant_term();
        let mut bx = Self::zero();
        let mut by = Self::zero();
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                bx.add_term((*i, 0), c.clone());
            } else if *j > 0 {
                by.add_term((0, *j), c.clone());
            }
        }
        bx.add_term((0, 0), offset.clone());
        by.add_term((0, 0), c0 - offset);
        Ok(AdditiveSplit { bx, by })
    }

    /// Multiplies by the lcm of the coefficient denominators; returns the
    /// integral polynomial and that multiplier.
    pub fn clear_denominators(&self) -> (Self, BigInt) {
        let l = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
        (self.scale(&BigRational::from_integer(l.clone())), l)
    }

    /// Gcd of the numerators after clearing denominators (nonnegative).
    pub fn content(&self) -> BigInt {
        let (p, _) = self.clear_denominators();
        p.terms
            .values()
            .fold(BigInt::zero(), |acc, c| num_integer::Integer::gcd(&acc, c.numer()))
    }

    /// Division with remainder of polynomials univariate in `v`.
    pub fn div_rem_univariate(&self, d: &BiPoly, v: Var) -> Result<(BiPoly, BiPoly), ExactError> {
        let mut r = self.to_univariate(v)?;
        let dv = d.to_univariate(v)?;
        let Some(lead) = dv.last().cloned() else {
            return Err(ExactError::SingularMatrix);
        };
        let dd = dv.len() - 1;
        let mut q = vec![BigRational::zero(); r.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().cloned().unwrap_or_else(BigRational::zero) / &lead;
            for (i, dc) in dv.iter().enumerate() {
                r[k + i] -= &c * dc;
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Ok((Self::from_univariate(v, &q), Self::from_univariate(v, &r)))
    }

    /// Monic gcd of two polynomials univariate in `v`; `gcd(0, 0) = 0`.
    pub fn gcd_univariate(&self, other: &BiPoly, v: Var) -> Result<BiPoly, ExactError> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem_univariate(&b, v)?;
            a = std::mem::replace(&mut b, r);
        }
        if a.is_zero() {
            return Ok(a);
        }
        let lc = a.to_univariate(v)?.last().cloned().unwrap_or_else(BigRational::one);
        Ok(a.scale(&lc.recip()))
    }

    fn display_order(&self) -> Vec<(&(u32, u32), &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let ka = (a.0 .0 + a.0 .1, a.0 .0);
            let kb = (b.0 .0 + b.0 .1, b.0 .0);
            kb.cmp(&ka)
        });
        v
    }

    /// Display using custom variable names, e.g. `("k", "y")`.
    pub fn display_with(&self, xname: &str, yname: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, ((i, j), c)) in self.display_order().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (*i == 0 && *j == 0) {
                if mag.is_integer() {
                    factors.push(mag.to_integer().to_string());
                } else {
                    factors.push(format!("({}/{})", mag.numer(), mag.denom()));
                }
            }
            for (name, e) in [(xname, *i), (yname, *j)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

fn powers(v: &BigRational, d: u32) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(d as usize + 1);
    out.push(BigRational::one());
    for k in 0..d as usize {
        let next = &out[k] * v;
        out.push(next);
    }
    out
}

fn poly_powers(p: &BiPoly, d: u32) -> Vec<BiPoly> {
    let mut out = Vec::with_capacity(d as usize + 1);
    out.push(BiPoly::one());
    for k in 0..d as usize {
        let next = &out[k] * p;
        out.push(next);
    }
    out
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("x", "y"))
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly({self})")
    }
}

impl<'a> Add<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        -&self
    }
}

impl AddAssign<&BiPoly> for BiPoly {
    fn add_assign(&mut self, rhs: &BiPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl AddAssign<BiPoly> for BiPoly {
    fn add_assign(&mut self, rhs: BiPoly) {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
    }
}

impl SubAssign<&BiPoly> for BiPoly {
    fn sub_assign(&mut self, rhs: &BiPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c);
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<BiPoly> for BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: BiPoly) -> BiPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BiPoly> for BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: &BiPoly) -> BiPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<BiPoly> for &BiPoly {
            type Output = BiPoly;
            fn $m(self, rhs: BiPoly) -> BiPoly {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Zero for BiPoly {
    fn zero() -> Self {
        BiPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for BiPoly {
    fn one() -> Self {
        BiPoly::one()
    }
}

impl From<BigRational> for BiPoly {
    fn from(c: BigRational) -> Self {
        BiPoly::constant(c)
    }
}

impl From<i64> for BiPoly {
    fn from(c: i64) -> Self {
        BiPoly::from_int(c)
    }
}
