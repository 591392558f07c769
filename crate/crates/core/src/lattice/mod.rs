//! Convergent tables over the lattice of a matrix field and the exact
//! identities relating rows, columns and the dual field.

mod diagonal;
mod heat;

pub use diagonal::*;
pub use heat::*;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cf::{reduce, CfError, Delta};
use crate::exact::{factorial, lcm_upto, rat, BiPoly, Mat2, Var, Vec2};
use crate::field::{ConjugatePair, FieldError, MatrixField};
use crate::par::par_map;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("matrix {which} is singular at lattice point ({x}, {y})")]
    Singular { which: &'static str, x: i64, y: i64 },
    #[error("field was not built from a conjugate pair")]
    NoPair,
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("unsupported field: {0}")]
    Unsupported(String),
    #[error("v_{n} is not an integer")]
    NonIntegral { n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// One cell `(n, m)` of the convergent table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergentRecord {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "ser_big")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub q: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub p_red: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub q_red: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub gcd: BigInt,
    pub delta: Option<Delta>,
}

pub(crate) fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl ConvergentRecord {
    pub fn new(n: usize, m: usize, p: BigInt, q: BigInt) -> Self {
        let (p_red, q_red, gcd) = reduce(&p, &q);
        Self { n, m, p, q, p_red, q_red, gcd, delta: None }
    }

    pub fn value(&self) -> Option<BigRational> {
        (!self.q.is_zero()).then(|| BigRational::new(self.p.clone(), self.q.clone()))
    }
}

/// Integer representative of a projective pair: unchanged when already
/// integral, otherwise multiplied by the lcm of the denominators.
pub fn to_int_pair(v: &Vec2<BigRational>) -> (BigInt, BigInt) {
    let l = v[0].denom().lcm(v[1].denom());
    let lr = BigRational::from_integer(l);
    ((&v[0] * &lr).to_integer(), (&v[1] * &lr).to_integer())
}

/// Integer matrix proportional to `m`.
pub fn int_mat(m: &Mat2<BigRational>) -> Mat2<BigInt> {
    let l = m.m.iter().flatten().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let lr = BigRational::from_integer(l);
    m.map(|v| (v * &lr).to_integer())
}

pub(crate) fn checked(m: Mat2<BigRational>, which: &'static str, x: i64, y: i64) -> Result<Mat2<BigRational>, LatticeError> {
    if m.det().is_zero() {
        Err(LatticeError::Singular { which, x, y })
    } else {
        Ok(m)
    }
}

fn pair_of(field: &MatrixField) -> Result<&ConjugatePair, LatticeError> {
    field.pair.as_ref().ok_or(LatticeError::NoPair)
}

/// `prod_{k=1}^{m-1} M_Y(0, k)`.
pub fn column_prefix(field: &MatrixField, m: usize) -> Result<Mat2<BigRational>, LatticeError> {
    let mut acc = Mat2::identity();
    for k in 1..m as i64 {
        acc = acc.mul(&checked(field.my_at(0, k), "M_Y", 0, k)?);
    }
    Ok(acc)
}

/// `(P(n,m), Q(n,m)) = [prod_{k=1}^{m-1} M_Y(0,k)] [prod_{k=0}^{n-1} M_X(k,m)] e2`.
pub fn potential_pair(field: &MatrixField, n: usize, m: usize) -> Result<Vec2<BigRational>, LatticeError> {
    let mut acc = column_prefix(field, m)?;
    for k in 0..n as i64 {
        acc = acc.mul(&checked(field.mx_at(k, m as i64), "M_X", k, m as i64)?);
    }
    Ok(acc.col(1))
}

/// The grid of convergents for `0 <= n <= n_max`, `1 <= m <= m_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PqTable {
    pub n_max: usize,
    pub m_max: usize,
    rows: Vec<Vec<ConvergentRecord>>,
}

impl PqTable {
    pub fn get(&self, n: usize, m: usize) -> Option<&ConvergentRecord> {
        self.rows.get(m.checked_sub(1)?)?.get(n)
    }

    pub fn get_mut(&mut self, n: usize, m: usize) -> Option<&mut ConvergentRecord> {
        self.rows.get_mut(m.checked_sub(1)?)?.get_mut(n)
    }

    pub fn records(&self) -> impl Iterator<Item = &ConvergentRecord> {
        self.rows.iter().flatten()
    }

    pub fn records_mut(&mut self) -> impl Iterator<Item = &mut ConvergentRecord> {
        self.rows.iter_mut().flatten()
    }
}

/// Builds the table row by row: the column prefix is shared and extended
/// by one `M_Y` per row, then each row is an incremental `M_X` product.
pub fn pq_table(field: &MatrixField, n_max: usize, m_max: usize) -> Result<PqTable, LatticeError> {
    let mut prefixes = Vec::with_capacity(m_max);
    let mut acc = Mat2::<BigRational>::identity();
    for m in 1..=m_max as i64 {
        prefixes.push((m, acc.clone()));
        acc = acc.mul(&checked(field.my_at(0, m), "M_Y", 0, m)?);
    }
    let rows = par_map(prefixes, |(m, prefix)| -> Result<Vec<ConvergentRecord>, LatticeError> {
        let mut row = Vec::with_capacity(n_max + 1);
        let mut r = Mat2::<BigRational>::identity();
        for n in 0..=n_max {
            let (p, q) = to_int_pair(&prefix.apply(&r.col(1)));
            row.push(ConvergentRecord::new(n, m as usize, p, q));
            if n < n_max {
                r = r.mul(&checked(field.mx_at(n as i64, m), "M_X", n as i64, m)?);
            }
        }
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(PqTable { n_max, m_max, rows })
}

/// `prod_{k=0}^{n-1} M_X(k, y)` as a matrix of polynomials in `y`.
pub fn row_product(field: &MatrixField, n: usize) -> Mat2<BiPoly> {
    let mut acc = Mat2::<BiPoly>::identity();
    for k in 0..n as i64 {
        let mk = field.mx.map(|p| p.partial_eval(Var::X, &rat(k)));
        acc = acc.mul(&mk);
    }
    acc
}

/// Row polynomials `p_n(y), q_n(y)` of a field and of its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct RowPolys {
    pub n: usize,
    pub product: Mat2<BiPoly>,
    pub p: BiPoly,
    pub q: BiPoly,
    pub hat_p: BiPoly,
    pub hat_q: BiPoly,
}

pub fn row_polys(field: &MatrixField, n: usize) -> Result<RowPolys, LatticeError> {
    let dual = pair_of(field)?.dual()?.twisted_field()?;
    let product = row_product(field, n);
    let dual_product = row_product(&dual, n);
    Ok(RowPolys {
        n,
        p: product.m[0][1].clone(),
        q: product.m[1][1].clone(),
        hat_p: dual_product.m[0][1].clone(),
        hat_q: dual_product.m[1][1].clone(),
        product,
    })
}

/// `(p_n(y), q_n(y))` at an integer `y`, by direct multiplication.
pub fn row_values(field: &MatrixField, n: usize, y: i64) -> Vec2<BigRational> {
    let mut acc = Mat2::<BigRational>::identity();
    for k in 0..n as i64 {
        acc = acc.mul(&field.mx_at(k, y));
    }
    acc.col(1)
}

/// `(p_n(m+1), q_n(m+1)) = M_Y(0,m)^{-1} [prod_k M_X(k,m)] M_Y(n,m) e2`.
pub fn vertical_step(field: &MatrixField, row: &RowPolys, m: i64) -> Result<Vec2<BigRational>, LatticeError> {
    let my0 = field.my_at(0, m);
    let inv = my0
        .inverse()
        .map_err(|_| LatticeError::Inapplicable(format!("det M_Y(0,{m}) = 0")))?;
    let r = row.product.map(|p| p.eval(&BigRational::zero(), &rat(m)));
    Ok(inv.mul(&r).mul(&field.my_at(row.n as i64, m)).col(1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditiveFormReport {
    pub n: usize,
    pub m: usize,
    /// Conjugating the first row product into upper triangular factors.
    pub first_line: Option<bool>,
    /// Factorization through the column `x = 0` and the row `y = m+1`.
    pub via_column: Option<bool>,
    /// Factorization through the row `y = 1` and the dual row at `n+1`.
    pub via_row: Option<bool>,
    /// `Q(n,m+1) = q^_m(1) q_n(m+1) = q_n(1) q^_m(n+1)`, only when `fbar(0,0) = 0`.
    pub q_product: Option<bool>,
    pub note: Option<String>,
}

impl AdditiveFormReport {
    pub fn all_hold(&self) -> bool {
        [self.first_line, self.via_column, self.via_row, self.q_product]
            .iter()
            .all(|v| v.unwrap_or(true))
    }
}

fn upper(a: BigRational, b: BigRational, d: BigRational) -> Mat2<BigRational> {
    Mat2::new(a, b, BigRational::zero(), d)
}

/// Checks the additive-form identities at `(n, m)` exactly, where the split
/// hypotheses hold; otherwise reports them as not applicable.
pub fn additive_form_check(field: &MatrixField, n: usize, m: usize) -> Result<AdditiveFormReport, LatticeError> {
    let pair = pair_of(field)?;
    let mut report = AdditiveFormReport { n, m, first_line: None, via_column: None, via_row: None, q_product: None, note: None };
    let x_axis = pair.ffbar.partial_eval(Var::Y, &BigRational::zero());
    if pair.bx != x_axis {
        report.note = Some("bx differs from (f fbar)(x,0)".into());
        return Ok(report);
    }
    let f = |x: i64, y: i64| pair.f.eval_i64(x, y);
    let fb = |x: i64, y: i64| pair.fbar.eval_i64(x, y);

    let mut lhs = Mat2::lower(fb(0, 0));
    for i in 0..n as i64 {
        lhs = lhs.mul(&field.mx_at(i, 1));
    }
    lhs = lhs.mul(&Mat2::lower(-fb(n as i64, 0)));
    let mut rhs = Mat2::identity();
    for i in 1..=n as i64 {
        rhs = rhs.mul(&upper(-fb(i, 0), BigRational::one(), f(i, 0)));
    }
    report.first_line = Some(lhs == rhs);

    if !pair.has_axis_split() {
        report.note = Some("by differs from (f fbar)(0,y)".into());
        return Ok(report);
    }
    let dual = pair.dual()?.twisted_field()?;
    let (n_i, m_i) = (n as i64, m as i64);
    let target = potential_pair(field, n, m + 1)?;
    let row_m1 = row_values(field, n, m_i + 1);
    let row_1 = row_values(field, n, 1);
    let hat_1 = row_values(&dual, m, 1);
    let hat_n1 = row_values(&dual, m, n_i + 1);
    let prod = |g: &dyn Fn(i64) -> BigRational, hi: i64| (1..=hi).fold(BigRational::one(), |acc, k| acc * g(k));

    let col = upper(prod(&|k| fb(0, k), m_i), hat_1[0].clone(), prod(&|k| f(0, k), m_i));
    report.via_column = Some(col.apply(&row_m1) == target);

    let rowm = upper(prod(&|k| -fb(k, 0), n_i), row_1[0].clone(), prod(&|k| f(k, 0), n_i));
    let via_row = Mat2::lower(-fb(0, 0)).apply(&rowm.apply(&hat_n1));
    report.via_row = Some(via_row == target);

    if fb(0, 0).is_zero() {
        let a = &hat_1[1] * &row_m1[1];
        let b = &row_1[1] * &hat_n1[1];
        report.q_product = Some(a == target[1] && b == target[1]);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    /// `(n!)^c | q_n(m)`
    QDivisible,
    /// `(n!/lcm[n])^c | p_n(m)`
    PDivisible,
    /// `q_n(1) = (n!)^c`
    QRowOneEquality,
    /// `((n!)^2/lcm[n])^c | gcd(P(n,n+1), Q(n,n+1))`
    DiagonalGcd,
    /// `q_n(1)^2 | Q(n,n+1)`
    DiagonalQProduct,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub kind: AuditKind,
    pub n: usize,
    pub m: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub exponent: u32,
    pub n_max: usize,
    pub checks: usize,
    pub violations: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exponent `c` used by the factorial audits: the `x`-degree of `f(x, 0)`.
pub fn factorial_exponent(pair: &ConjugatePair) -> u32 {
    pair.f.partial_eval(Var::Y, &BigRational::zero()).deg_x().unwrap_or(0)
}

fn int_divides(k: &BigInt, v: &BigRational) -> bool {
    crate::exact::intpoly::divides(k, v)
}

/// Exact divisibility audit for `n <= n_max` and `m` in `window(n)`
/// (default `-n..=n+1`). Violations are reported, not raised.
pub fn factorial_reduction_audit(
    field: &MatrixField,
    n_max: usize,
    exponent: Option<u32>,
    window: Option<&(dyn Fn(usize) -> (i64, i64) + Sync)>,
) -> Result<AuditReport, LatticeError> {
    let pair = pair_of(field)?;
    let c = exponent.unwrap_or_else(|| factorial_exponent(pair));
    let default_window = |n: usize| (-(n as i64), n as i64 + 1);
    let win = |n: usize| window.map_or_else(|| default_window(n), |w| w(n));
    let (lo, hi) = (0..=n_max).map(win).fold((i64::MAX, i64::MIN), |acc, (a, b)| (acc.0.min(a), acc.1.max(b)));
    let facts: Vec<BigInt> = (0..=n_max as u64).map(|n| factorial(n).pow(c)).collect();
    let reduced: Vec<BigInt> = (0..=n_max as u64).map(|n| (factorial(n) / lcm_upto(n)).pow(c)).collect();

    let ms: Vec<i64> = (lo..=hi).collect();
    let per_row = par_map(ms, |m| {
        let mut checks = 0usize;
        let mut bad = Vec::new();
        let mut r = Mat2::<BigRational>::identity();
        for n in 0..=n_max {
            let (wl, wh) = win(n);
            if (wl..=wh).contains(&m) {
                let (p, q) = (&r.m[0][1], &r.m[1][1]);
                checks += 2;
                if !int_divides(&facts[n], q) {
                    bad.push(AuditEntry { kind: AuditKind::QDivisible, n, m: Some(m) });
                }
                if !int_divides(&reduced[n], p) {
                    bad.push(AuditEntry { kind: AuditKind::PDivisible, n, m: Some(m) });
                }
                if m == 1 {
                    checks += 1;
                    if q.abs() != BigRational::from_integer(facts[n].clone()) {
                        bad.push(AuditEntry { kind: AuditKind::QRowOneEquality, n, m: Some(1) });
                    }
                }
            }
            r = r.mul(&field.mx_at(n as i64, m));
        }
        (checks, bad)
    });
    let mut checks = 0;
    let mut violations = Vec::new();
    for (c, b) in per_row {
        checks += c;
        violations.extend(b);
    }

    let diag = diagonal_records(field, n_max)?;
    for (n, (p, q)) in diag.iter().enumerate() {
        let g = BigRational::from_integer(p.gcd(q));
        let d = (factorial(n as u64).pow(2) / lcm_upto(n as u64)).pow(c);
        checks += 2;
        if !int_divides(&d, &g) {
            violations.push(AuditEntry { kind: AuditKind::DiagonalGcd, n, m: Some(n as i64 + 1) });
        }
        let q1 = row_values(field, n, 1)[1].clone();
        if !(q1.is_zero() || (BigRational::from_integer(q.clone()) / (&q1 * &q1)).is_integer()) {
            violations.push(AuditEntry { kind: AuditKind::DiagonalQProduct, n, m: Some(n as i64 + 1) });
        }
    }
    violations.sort_by_key(|v| (v.n, v.m, v.kind as u8));
    Ok(AuditReport { exponent: c, n_max, checks, violations })
}
