//! Generalized continued fractions `a0 + K b_k / a_k`, their convergents,
//! error bounds, Euler continued fractions and the δ approximation measure.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{Approximation, PrecisionLadder, MAX_BITS};
use crate::exact::{ln_abs, ln_abs_int, BiPoly, Mat2, Var, Vec2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    #[error("term {index} requested but the explicit list has only {len} entries")]
    TermOutOfRange { index: usize, len: usize },
    #[error("term polynomial must be univariate in the index variable")]
    NotUnivariate,
    #[error("q_{index} = 0, the error bound is undefined")]
    ZeroDenominator { index: usize },
    #[error("f({index}) = 0 in the Euler continued fraction")]
    ZeroF { index: usize },
    #[error("h2({index}) = 0 in the Euler continued fraction")]
    ZeroH2 { index: usize },
    #[error("the closed-form sum vanishes, the partial value is infinite")]
    ZeroSum,
    #[error("need at least {needed} records, got {given}")]
    TooFewRecords { needed: usize, given: usize },
}

/// Term generator `k -> t_k` for `k >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum TermSeq {
    Poly(BiPoly),
    List(Vec<BigRational>),
}

impl TermSeq {
    pub fn poly(p: BiPoly) -> Result<Self, CfError> {
        if !p.is_univariate_in(Var::X) {
            return Err(CfError::NotUnivariate);
        }
        Ok(TermSeq::Poly(p))
    }

    pub fn at(&self, k: usize) -> Result<BigRational, CfError> {
        match self {
            TermSeq::Poly(p) => Ok(p.eval_i64(k as i64, 0)),
            TermSeq::List(v) => v
                .get(k.wrapping_sub(1))
                .cloned()
                .ok_or(CfError::TermOutOfRange { index: k, len: v.len() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfSpec {
    pub a: TermSeq,
    pub b: TermSeq,
    pub a0: BigRational,
}

impl CfSpec {
    pub fn polynomial(a: BiPoly, b: BiPoly, a0: BigRational) -> Result<Self, CfError> {
        Ok(Self { a: TermSeq::poly(a)?, b: TermSeq::poly(b)?, a0 })
    }

    /// `[[0, b_k], [1, a_k]]`.
    pub fn companion(&self, k: usize) -> Result<Mat2<BigRational>, CfError> {
        Ok(Mat2::new(BigRational::zero(), self.b.at(k)?, BigRational::one(), self.a.at(k)?))
    }
}

/// `(p_n, q_n)` of the tail `K_1^{n-1}`, indexed so that `p_0 = 1, p_1 = 0, q_0 = 0, q_1 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergent {
    pub n: usize,
    pub p: BigRational,
    pub q: BigRational,
}

impl Convergent {
    /// `a0 + p/q`, or `None` when `q = 0`.
    pub fn value(&self, a0: &BigRational) -> Option<BigRational> {
        if self.q.is_zero() {
            None
        } else {
            Some(a0 + &self.p / &self.q)
        }
    }

    /// Numerator of `a0 + p/q` over the same denominator.
    pub fn full_numerator(&self, a0: &BigRational) -> BigRational {
        a0 * &self.q + &self.p
    }
}

/// Convergents `0..=n_max` by the three-term recurrence.
pub fn convergent_stream(cf: &CfSpec, n_max: usize) -> Result<Vec<Convergent>, CfError> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut p0, mut p1) = (BigRational::one(), BigRational::zero());
    let (mut q0, mut q1) = (BigRational::zero(), BigRational::one());
    out.push(Convergent { n: 0, p: p0.clone(), q: q0.clone() });
    if n_max >= 1 {
        out.push(Convergent { n: 1, p: p1.clone(), q: q1.clone() });
    }
    for n in 1..n_max {
        let a = cf.a.at(n)?;
        let b = cf.b.at(n)?;
        let p2 = &a * &p1 + &b * &p0;
        let q2 = &a * &q1 + &b * &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push(Convergent { n: n + 1, p: p1.clone(), q: q1.clone() });
    }
    Ok(out)
}

/// `(prod_{i=1}^{n-1} M_i) e2`, the matrix form of convergent `n` (`n >= 1`).
pub fn convergent_via_matrices(cf: &CfSpec, n: usize) -> Result<Vec2<BigRational>, CfError> {
    let mut m = Mat2::identity();
    for i in 1..n {
        m = m.mul(&cf.companion(i)?);
    }
    Ok(m.col(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBound {
    pub bound: BigRational,
    /// True when a geometric tail cap was justified by the last two summand ratios.
    pub rigorous: bool,
    pub last_ratio: Option<f64>,
}

/// Largest summand ratio for which a geometric tail cap is added.
pub const RATIO_CAP: (i64, i64) = (1, 2);

/// Bound on `|L - p_n/q_n|` from the partial sum over `k = n..=horizon` of
/// `prod_{i<=k} |b_i| / |q_k q_{k+1}|`, plus a geometric tail cap when the
/// last two summand ratios are at most one half.
pub fn error_bound(cf: &CfSpec, n: usize, horizon: usize) -> Result<ErrorBound, CfError> {
    let horizon = horizon.max(n);
    let conv = convergent_stream(cf, horizon + 1)?;
    let mut bprod = BigRational::one();
    for i in 1..n {
        bprod *= cf.b.at(i)?.abs();
    }
    let mut summands = Vec::new();
    for k in n..=horizon {
        bprod *= cf.b.at(k)?.abs();
        let qk = &conv[k].q;
        let qk1 = &conv[k + 1].q;
        if qk.is_zero() {
            return Err(CfError::ZeroDenominator { index: k });
        }
        if qk1.is_zero() {
            return Err(CfError::ZeroDenominator { index: k + 1 });
        }
        summands.push(&bprod / (qk * qk1).abs());
    }
    let mut bound = summands.iter().fold(BigRational::zero(), |acc, s| acc + s);
    let ratio = |i: usize| -> Option<BigRational> {
        let prev = &summands[i - 1];
        if prev.is_zero() {
            None
        } else {
            Some(&summands[i] / prev)
        }
    };
    let len = summands.len();
    let mut rigorous = false;
    let mut last_ratio = None;
    if len >= 3 {
        if let (Some(r1), Some(r2)) = (ratio(len - 2), ratio(len - 1)) {
            let r = if r1 > r2 { r1 } else { r2 };
            last_ratio = Some(crate::exact::to_f64(&r));
            let cap = BigRational::new(RATIO_CAP.0.into(), RATIO_CAP.1.into());
            if r <= cap {
                let last = &summands[len - 1];
                bound += last * &r / (BigRational::one() - &r);
                rigorous = true;
            }
        }
    }
    Ok(ErrorBound { bound, rigorous, last_ratio })
}

/// Euler continued fraction data: `b(k) = -h1(k) h2(k)` and
/// `a(k) = (f(k-1) h1(k) + f(k+1) h2(k+1)) / f(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerSpec {
    pub h1: BiPoly,
    pub h2: BiPoly,
    pub f: BiPoly,
}

impl EulerSpec {
    fn at(p: &BiPoly, k: i64) -> BigRational {
        p.eval_i64(k, 0)
    }

    pub fn b(&self, k: usize) -> BigRational {
        let k = k as i64;
        -(Self::at(&self.h1, k) * Self::at(&self.h2, k))
    }

    pub fn a(&self, k: usize) -> Result<BigRational, CfError> {
        let k = k as i64;
        let fk = Self::at(&self.f, k);
        if fk.is_zero() {
            return Err(CfError::ZeroF { index: k as usize });
        }
        let num = Self::at(&self.f, k - 1) * Self::at(&self.h1, k) + Self::at(&self.f, k + 1) * Self::at(&self.h2, k + 1);
        Ok(num / fk)
    }

    /// The generated continued fraction with explicit terms `1..=depth`.
    pub fn generated_cf(&self, depth: usize) -> Result<CfSpec, CfError> {
        let a = (1..=depth).map(|k| self.a(k)).collect::<Result<Vec<_>, _>>()?;
        let b = (1..=depth).map(|k| self.b(k)).collect();
        Ok(CfSpec { a: TermSeq::List(a), b: TermSeq::List(b), a0: BigRational::zero() })
    }
}

/// Closed form of `K_1^n b(i)/a(i)` for an Euler continued fraction:
/// `(f(1) h2(1) / f(0)) (1 / S_n - 1)` with
/// `S_n = sum_{k=0}^n f(0) f(1) / (f(k) f(k+1)) prod_{i=1}^k h1(i) / h2(i+1)`.
pub fn euler_partial(spec: &EulerSpec, n: usize) -> Result<BigRational, CfError> {
    let fv = |k: usize| -> Result<BigRational, CfError> {
        let v = spec.f.eval_i64(k as i64, 0);
        if v.is_zero() {
            Err(CfError::ZeroF { index: k })
        } else {
            Ok(v)
        }
    };
    let f0 = fv(0)?;
    let f1 = fv(1)?;
    let mut sum = BigRational::zero();
    let mut prod = BigRational::one();
    for k in 0..=n {
        if k >= 1 {
            let h2 = spec.h2.eval_i64(k as i64 + 1, 0);
            if h2.is_zero() {
                return Err(CfError::ZeroH2 { index: k + 1 });
            }
            prod *= spec.h1.eval_i64(k as i64, 0) / h2;
        }
        sum += &f0 * &f1 / (fv(k)? * fv(k + 1)?) * &prod;
    }
    if sum.is_zero() {
        return Err(CfError::ZeroSum);
    }
    let lead = &f1 * spec.h2.eval_i64(1, 0) / &f0;
    Ok(lead * (sum.recip() - BigRational::one()))
}

/// Value of `-1 - ln|L - p/q| / ln|q|` for the reduced fraction, or a sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Delta {
    Finite(f64),
    /// `p/q` equals `L` exactly.
    Infinite,
    /// Reduced denominator is `±1`, so `ln|q| = 0`.
    Undefined,
    /// The reference value is not precise enough to separate it from `p/q`.
    Undetermined,
}

impl Delta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Delta::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `6` decimals, or `INF`, `UNDEF`, `UNDET`.
    pub fn render(self) -> String {
        match self {
            Delta::Finite(v) => format!("{v:.6}"),
            Delta::Infinite => "INF".into(),
            Delta::Undefined => "UNDEF".into(),
            Delta::Undetermined => "UNDET".into(),
        }
    }
}

/// Bits of slack required between the error radius and `|L - p/q|`.
pub const SEPARATION_BITS: u32 = 32;

/// Reduces `p/q`; the sign is carried by the numerator.
pub fn reduce(p: &BigInt, q: &BigInt) -> (BigInt, BigInt, BigInt) {
    let g = p.gcd(q);
    if g.is_zero() {
        return (p.clone(), q.clone(), g);
    }
    let (mut pr, mut qr) = (p / &g, q / &g);
    if qr.is_negative() {
        pr = -pr;
        qr = -qr;
    }
    (pr, qr, g)
}

/// δ against a fixed approximation, with no precision escalation.
pub fn delta_with(p: &BigInt, q: &BigInt, approx: &Approximation) -> Delta {
    let (pr, qr, _) = reduce(p, q);
    if qr.is_zero() {
        return Delta::Undefined;
    }
    let x = BigRational::new(pr, qr.clone());
    let diff = (&approx.value - &x).abs();
    if approx.radius.is_zero() && diff.is_zero() {
        return Delta::Infinite;
    }
    if qr.is_one() {
        return Delta::Undefined;
    }
    if !approx.radius.is_zero() && !approx.separates(&x, SEPARATION_BITS) {
        return Delta::Undetermined;
    }
    Delta::Finite(-1.0 - ln_abs(&diff) / ln_abs_int(&qr))
}

/// Initial precision guess for a denominator of the given size.
pub fn bits_for(q: &BigInt) -> u64 {
    64 + 4 * q.bits()
}

/// δ with the precision ladder: retries with doubled precision while undetermined.
pub fn delta_measure(p: &BigInt, q: &BigInt, ladder: &PrecisionLadder) -> Delta {
    let mut bits = bits_for(q);
    loop {
        let d = delta_with(p, q, &ladder.approx(bits));
        if d != Delta::Undetermined || !ladder.constant().refinable() || bits >= MAX_BITS {
            return d;
        }
        bits *= 2;
    }
}

/// `|L - x|` to about 50 bits, as its natural logarithm; `None` when `x = L` exactly
/// or the ladder cannot separate them.
pub fn ln_error(x: &BigRational, ladder: &PrecisionLadder, start_bits: u64) -> Option<f64> {
    let mut bits = start_bits.max(64);
    loop {
        let a = ladder.approx(bits);
        if a.radius.is_zero() {
            let d = (&a.value - x).abs();
            return if d.is_zero() { None } else { Some(ln_abs(&d)) };
        }
        if a.separates(x, SEPARATION_BITS) {
            return Some(ln_abs(&(&a.value - x)));
        }
        if !ladder.constant().refinable() || bits >= MAX_BITS {
            return None;
        }
        bits *= 2;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SupportsIrrationality,
    Inconclusive,
    NoSupport,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::SupportsIrrationality => "supports-irrationality",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NoSupport => "no-support",
        }
    }
}

/// Trend analysis of `|q_n L - p_n| / gcd(p_n, q_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrationalityReport {
    /// `ln(|q_n L - p_n| / gcd)` per record; `None` for exact hits.
    pub ln_scaled_error: Vec<Option<f64>>,
    /// `ln |L - p_n/q_n|` per record.
    pub ln_error: Vec<Option<f64>>,
    /// Per-step factor of the scaled error from a least-squares fit over the last three quarters.
    pub scaled_error_ratio: Option<f64>,
    /// Per-step factor of the plain error.
    pub error_ratio: Option<f64>,
    pub eventually_constant: bool,
    pub verdict: Verdict,
}

/// Slope of the least-squares line through `(i, v_i)`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Per-step factor below which a sequence is considered decaying.
pub const DECAY_THRESHOLD: f64 = 0.98;

pub fn irrationality_check(records: &[(BigInt, BigInt)], ladder: &PrecisionLadder) -> Result<IrrationalityReport, CfError> {
    if records.len() < 3 {
        return Err(CfError::TooFewRecords { needed: 3, given: records.len() });
    }
    let mut ln_scaled = Vec::with_capacity(records.len());
    let mut ln_err = Vec::with_capacity(records.len());
    for (p, q) in records {
        if q.is_zero() {
            ln_scaled.push(None);
            ln_err.push(None);
            continue;
        }
        let x = BigRational::new(p.clone(), q.clone());
        let e = ln_error(&x, ladder, 2 * bits_for(q));
        let g = p.gcd(q);
        ln_err.push(e);
        ln_scaled.push(e.map(|e| e + ln_abs_int(q) - ln_abs_int(&g)));
    }
    let tail = 3.min(records.len());
    let last = &records[records.len() - tail..];
    let eventually_constant = last.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        !a.1.is_zero() && !b.1.is_zero() && &a.0 * &b.1 == &b.0 * &a.1
    });
    let start = records.len() / 4;
    let fit = |v: &[Option<f64>]| -> Option<f64> {
        let pts: Vec<(f64, f64)> = v
            .iter()
            .enumerate()
            .skip(start)
            .filter_map(|(i, x)| x.map(|x| (i as f64, x)))
            .collect();
        fit_slope(&pts).map(f64::exp)
    };
    let scaled_error_ratio = fit(&ln_scaled);
    let error_ratio = fit(&ln_err);
    let verdict = if eventually_constant {
        Verdict::Inconclusive
    } else if !error_ratio.is_some_and(|r| r < DECAY_THRESHOLD) {
        Verdict::NoSupport
    } else if scaled_error_ratio.is_some_and(|r| r < DECAY_THRESHOLD) {
        Verdict::SupportsIrrationality
    } else {
        Verdict::Inconclusive
    };
    Ok(IrrationalityReport {
        ln_scaled_error: ln_scaled,
        ln_error: ln_err,
        scaled_error_ratio,
        error_ratio,
        eventually_constant,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{Builtin, Constant};
    use crate::exact::parse::parse_index_poly;
    use crate::exact::rat;

    fn zeta3_euler() -> CfSpec {
        CfSpec::polynomial(
            parse_index_poly("k^3 + (k+1)^3").unwrap(),
            parse_index_poly("-k^6").unwrap(),
            rat(1),
        )
        .unwrap()
    }

    #[test]
    fn initial_convergents_follow_convention() {
        let c = convergent_stream(&zeta3_euler(), 3).unwrap();
        assert_eq!((c[0].p.clone(), c[0].q.clone()), (rat(1), rat(0)));
        assert_eq!((c[1].p.clone(), c[1].q.clone()), (rat(0), rat(1)));
        assert_eq!(c[2].p.clone() / c[2].q.clone(), BigRational::new((-1).into(), 9.into()));
    }

    #[test]
    fn zeta3_euler_cf_inverts_partial_sums() {
        let cf = zeta3_euler();
        let c = convergent_stream(&cf, 12).unwrap();
        for n in 1..=11 {
            let sum = (1..=n).fold(BigRational::zero(), |acc, k| acc + BigRational::new(1.into(), BigInt::from(k).pow(3)));
            assert_eq!(c[n].value(&cf.a0).unwrap(), sum.recip(), "n={n}");
        }
    }

    #[test]
    fn zero_b_terms_freeze() {
        let cf = CfSpec::polynomial(parse_index_poly("k").unwrap(), BiPoly::zero(), rat(0)).unwrap();
        let c = convergent_stream(&cf, 6).unwrap();
        for v in &c[1..] {
            assert_eq!(v.value(&cf.a0), Some(rat(0)));
        }
    }

    #[test]
    fn pi_at_depth_200() {
        let cf = CfSpec::polynomial(BiPoly::from_int(6), parse_index_poly("(2*n-1)^2").unwrap(), rat(3)).unwrap();
        let c = convergent_stream(&cf, 200).unwrap();
        let v = c[200].value(&cf.a0).unwrap();
        let pi = crate::constants::compute_builtin(Builtin::Pi, 64).value;
        assert!((v - pi).abs() < BigRational::new(1.into(), 1000.into()));
    }

    #[test]
    fn matrices_agree_with_recurrence() {
        let cf = zeta3_euler();
        let c = convergent_stream(&cf, 20).unwrap();
        for n in 1..=20 {
            let v = convergent_via_matrices(&cf, n).unwrap();
            assert_eq!((v[0].clone(), v[1].clone()), (c[n].p.clone(), c[n].q.clone()));
        }
    }

    #[test]
    fn single_term_error_bound() {
        let cf = zeta3_euler();
        let c = convergent_stream(&cf, 6).unwrap();
        let eb = error_bound(&cf, 5, 5).unwrap();
        let prod: BigRational = (1..=5).fold(rat(1), |acc, i| acc * cf.b.at(i).unwrap().abs());
        assert_eq!(eb.bound, prod / (&c[5].q * &c[6].q).abs());
        assert!(!eb.rigorous);
    }

    #[test]
    fn ln2_family_bound_is_heuristic() {
        let cf = CfSpec::polynomial(BiPoly::one(), parse_index_poly("k^2").unwrap(), rat(0)).unwrap();
        let eb = error_bound(&cf, 10, 40).unwrap();
        assert!(!eb.rigorous);
    }

    #[test]
    fn euler_closed_form_examples() {
        let cube = parse_index_poly("x^3").unwrap();
        let spec = EulerSpec { h1: cube.clone(), h2: cube, f: BiPoly::one() };
        let sum = (0..=5).fold(BigRational::zero(), |acc, k: i64| acc + BigRational::new(1.into(), BigInt::from(k + 1).pow(3)));
        assert_eq!(euler_partial(&spec, 5).unwrap(), sum.recip() - rat(1));
        assert_eq!(euler_partial(&spec, 0).unwrap(), rat(0));
        let cf = spec.generated_cf(8).unwrap();
        let c = convergent_stream(&cf, 7).unwrap();
        assert_eq!(c[6].value(&cf.a0).unwrap(), euler_partial(&spec, 5).unwrap());
    }

    #[test]
    fn delta_sentinels() {
        let third = PrecisionLadder::new(Constant::Exact(BigRational::new(1.into(), 3.into())));
        assert_eq!(delta_measure(&BigInt::from(1), &BigInt::from(3), &third), Delta::Infinite);
        assert_eq!(delta_measure(&BigInt::from(4), &BigInt::from(2), &third), Delta::Undefined);
        let rough = PrecisionLadder::new("1.2".parse().unwrap());
        assert_eq!(delta_measure(&BigInt::from(6), &BigInt::from(5), &rough), Delta::Undetermined);
    }

    #[test]
    fn delta_partial_sum_negative() {
        let z = PrecisionLadder::new(Constant::Builtin(Builtin::Zeta3));
        let s = (1..=10).fold(BigRational::zero(), |acc, k: i64| acc + BigRational::new(1.into(), BigInt::from(k).pow(3)));
        let d = delta_measure(s.numer(), s.denom(), &z).finite().unwrap();
        assert!(d < 0.0);
    }

    #[test]
    fn delta_grows_as_error_shrinks() {
        let l = PrecisionLadder::new(Constant::Exact(BigRational::new(1.into(), 7.into())));
        let q = BigInt::from(1009);
        let far = delta_measure(&BigInt::from(150), &q, &l).finite().unwrap();
        let near = delta_measure(&BigInt::from(144), &q, &l).finite().unwrap();
        assert!(near > far);
    }

    #[test]
    fn constant_sequence_is_inconclusive() {
        let l = PrecisionLadder::new(Constant::Exact(BigRational::new(1.into(), 2.into())));
        let recs: Vec<_> = (1..6).map(|k| (BigInt::from(k), BigInt::from(2 * k))).collect();
        let r = irrationality_check(&recs, &l).unwrap();
        assert!(r.eventually_constant);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
