use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{checked, pair_of, to_int_pair, LatticeError};
use crate::cf::{irrationality_check, IrrationalityReport, Verdict, CfSpec, DECAY_THRESHOLD};
use crate::constants::PrecisionLadder;
use crate::exact::{factorial, ln_abs_int, rat, BiPoly, Mat2, Var};
use crate::field::MatrixField;

/// `(P(n, n+1), Q(n, n+1))` for `0 <= n <= n_max`, along the staircase
/// `(0,1) -> (1,1) -> (1,2) -> ...`.
pub fn diagonal_records(field: &MatrixField, n_max: usize) -> Result<Vec<(BigInt, BigInt)>, LatticeError> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = Mat2::<BigRational>::identity();
    out.push(to_int_pair(&acc.col(1)));
    for k in 1..=n_max as i64 {
        acc = acc.mul(&checked(field.mx_at(k - 1, k), "M_X", k - 1, k)?);
        acc = acc.mul(&checked(field.my_at(k, k), "M_Y", k, k)?);
        out.push(to_int_pair(&acc.col(1)));
    }
    Ok(out)
}

/// Polynomial continued fraction read off the diagonal of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPcf {
    /// `A(k) = M_X(k-1, k) M_Y(k, k)`, in the variable `x`.
    pub step: Mat2<BiPoly>,
    /// Monic gcd of the entries of `A`.
    pub scale: BiPoly,
    pub reduced: Mat2<BiPoly>,
    /// Conjugator `U(k) = [[0, u], [1, t(k)]]`.
    pub u: BigRational,
    pub t: BiPoly,
    pub a: BiPoly,
    pub b: BiPoly,
    /// `U(1)`, mapping `K_1^{n-1}` to `P(n,n+1)/Q(n,n+1)`.
    pub prefix: Mat2<BigRational>,
}

impl DiagonalPcf {
    pub fn cf(&self) -> CfSpec {
        CfSpec::polynomial(self.a.clone(), self.b.clone(), BigRational::zero()).expect("univariate by construction")
    }

    /// Exponent `c` when the scale is `x^c`.
    pub fn monomial_scale(&self) -> Option<u32> {
        let d = self.scale.deg_x()?;
        (self.scale == BiPoly::monomial(d, 0, rat(1))).then_some(d)
    }
}

/// `17 (k^3 + (k+1)^3) - 12 (2k + 1)` in the variable `x`.
pub fn apery_polynomial() -> BiPoly {
    let k = BiPoly::x();
    let k1 = &k + BiPoly::one();
    (k.pow(3) + k1.pow(3)).scale(&rat(17)) - (k.scale(&rat(2)) + BiPoly::one()).scale(&rat(12))
}

/// Extracts the diagonal PCF with a conjugator `U(k) = [[0, u], [1, t(k)]]`:
/// `u` is the constant top-right entry of the reduced step and `t` its
/// bottom-right entry, after which `U(k)^{-1} B(k) U(k+1)` is a companion matrix.
pub fn diagonal_pcf(field: &MatrixField) -> Result<DiagonalPcf, LatticeError> {
    let x = BiPoly::x();
    let mx = field.mx.map(|p| p.substitute(&(&x - BiPoly::one()), &x));
    let my = field.my.map(|p| p.substitute(&x, &x));
    let step = mx.mul(&my);
    let unsupported = |s: &str| LatticeError::Unsupported(s.to_string());

    let mut scale = BiPoly::zero();
    for e in step.m.iter().flatten() {
        scale = scale.gcd_univariate(e, Var::X).map_err(|_| unsupported("diagonal step is not univariate"))?;
    }
    if scale.is_zero() {
        return Err(unsupported("diagonal step vanishes"));
    }
    let reduced = step.map(|e| e.div_rem_univariate(&scale, Var::X).expect("univariate").0);

    let u_poly = &reduced.m[0][1];
    if !u_poly.is_constant() || u_poly.is_zero() {
        return Err(unsupported("top-right entry of the reduced diagonal step is not a nonzero constant"));
    }
    let u = u_poly.constant_term();
    let t = reduced.m[1][1].clone();
    let t_next = t.shift_i64(1, 0);
    let a = &reduced.m[0][0] + &t_next;
    let b = -reduced.det();

    // adj(U(k)) B(k) U(k+1) = det U(k) [[0, b], [1, a]] with det U = -u.
    let conj = |tt: &BiPoly| Mat2::new(BiPoly::zero(), BiPoly::constant(u.clone()), BiPoly::one(), tt.clone());
    let lhs = conj(&t).adjugate().mul(&reduced).mul(&conj(&t_next));
    let rhs = Mat2::new(BiPoly::zero(), b.clone(), BiPoly::one(), a.clone()).scale(&BiPoly::constant(-u.clone()));
    if lhs != rhs {
        return Err(unsupported("conjugation ansatz does not produce a companion matrix"));
    }
    let prefix = Mat2::new(BigRational::zero(), u.clone(), BigRational::one(), t.eval_i64(1, 0));
    Ok(DiagonalPcf { step, scale, reduced, u, t, a, b, prefix })
}

/// Exact characteristic roots `(trace +- sqrt(disc)) / 2` of `x^2 - trace x + norm`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticRoots {
    pub trace: String,
    pub norm: String,
    pub description: String,
    pub plus: f64,
    pub minus: f64,
}

/// `s^2 r = d` with `r` square-free, by trial division; `None` past 2^64.
fn square_free(d: &BigInt) -> Option<(u64, u64)> {
    let mut r = d.to_u64()?;
    let mut s = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= r {
        while r % (p * p) == 0 {
            r /= p * p;
            s *= p;
        }
        p += 1;
    }
    Some((s, r))
}

pub fn quadratic_roots(trace: &BigRational, norm: &BigRational) -> QuadraticRoots {
    let disc = trace * trace - norm * rat(4);
    let tf = crate::exact::to_f64(trace);
    let df = crate::exact::to_f64(&disc);
    let (plus, minus) = if df >= 0.0 {
        ((tf + df.sqrt()) / 2.0, (tf - df.sqrt()) / 2.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    let description = match (disc.is_integer() && trace.is_integer() && !disc.is_negative(), square_free(&disc.to_integer())) {
        (true, Some((s, r))) => {
            let tr = trace.to_integer();
            let s = BigInt::from(s);
            let radical = format!("√{r}");
            if r == 1 {
                let half = BigRational::new(BigInt::from(1), BigInt::from(2));
                let (hi, lo) = ((trace + rat_big(&s)) * &half, (trace - rat_big(&s)) * &half);
                format!("{hi}, {lo}")
            } else if tr.is_even() && s.is_even() {
                format!("{} ± {}{}", &tr / 2, &s / 2, radical)
            } else {
                format!("({tr} ± {s}{radical})/2")
            }
        }
        _ => format!("({trace} ± √({disc}))/2"),
    };
    QuadraticRoots { trace: trace.to_string(), norm: norm.to_string(), description, plus, minus }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// `v_N / v_{N-1}`.
    pub lambda_hat: f64,
    /// Aitken extrapolation of the last three ratios.
    pub lambda_aitken: Option<f64>,
    pub roots: Option<QuadraticRoots>,
    pub n_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VSequence {
    pub exponent: u32,
    #[serde(serialize_with = "ser_vec")]
    pub v: Vec<BigInt>,
    /// Every residual of the diagonal recurrence vanished; `None` when the
    /// diagonal PCF is not available in normalized form.
    pub recurrence_holds: Option<bool>,
    /// `v_{n+1} >= 10 v_n` for `3 <= n < N`.
    pub tenfold_growth: bool,
    pub growth: GrowthEstimate,
}

fn ser_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

fn rat_big(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

fn ratio(a: &BigInt, b: &BigInt) -> f64 {
    (ln_abs_int(a) - ln_abs_int(b)).exp()
}

/// `v_n = Q(n, n+1) / (n!)^(2c)` for `n <= n_max`.
pub fn v_sequence(field: &MatrixField, n_max: usize) -> Result<VSequence, LatticeError> {
    let c = super::factorial_exponent(pair_of(field)?);
    let records = diagonal_records(field, n_max)?;
    let mut v = Vec::with_capacity(records.len());
    for (n, (_, q)) in records.iter().enumerate() {
        let d = factorial(n as u64).pow(2 * c);
        let (quo, rem) = q.div_rem(&d);
        if !rem.is_zero() {
            return Err(LatticeError::NonIntegral { n });
        }
        v.push(quo);
    }

    let pcf = diagonal_pcf(field).ok();
    let mut recurrence_holds = None;
    let mut roots = None;
    if let Some(p) = pcf.as_ref().filter(|p| p.monomial_scale() == Some(c)) {
        let ok = (1..n_max).all(|n| {
            let nn = n as i64;
            let nc = BigRational::from_integer(BigInt::from(nn).pow(c));
            let lhs = p.a.eval_i64(nn, 0) * BigRational::from_integer(v[n].clone())
                + p.b.eval_i64(nn, 0) / &nc * BigRational::from_integer(v[n - 1].clone());
            lhs == BigRational::from_integer(BigInt::from(nn + 1).pow(c) * &v[n + 1])
        });
        recurrence_holds = Some(ok);
        if p.a.deg_x() == Some(c) && p.b.deg_x() == Some(2 * c) {
            let trace = p.a.coeff(c, 0);
            let norm = -p.b.coeff(2 * c, 0);
            roots = Some(quadratic_roots(&trace, &norm));
        }
    }

    let tenfold_growth = (3..n_max).all(|n| v[n + 1] >= &v[n] * 10);
    let ratios: Vec<f64> = (1..v.len()).filter(|&n| !v[n - 1].is_zero()).map(|n| ratio(&v[n], &v[n - 1])).collect();
    let lambda_hat = ratios.last().copied().unwrap_or(f64::NAN);
    let lambda_aitken = (ratios.len() >= 3).then(|| {
        let r = &ratios[ratios.len() - 3..];
        let d2 = r[2] - 2.0 * r[1] + r[0];
        if d2 == 0.0 {
            r[2]
        } else {
            r[2] - (r[2] - r[1]).powi(2) / d2
        }
    });
    Ok(VSequence {
        exponent: c,
        v,
        recurrence_holds,
        tenfold_growth,
        growth: GrowthEstimate { lambda_hat, lambda_aitken, roots, n_used: n_max },
    })
}

/// Depth below which a certificate is flagged as low confidence.
pub const SHALLOW_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub constant: String,
    pub depth: usize,
    pub verdict: Verdict,
    pub low_confidence: bool,
    /// Per-step factor of `|Q_n L - P_n| / gcd`.
    pub error_rate: Option<f64>,
    /// Per-step factor of `|L - P_n/Q_n|`.
    pub plain_error_rate: Option<f64>,
    /// Per-step factor of `gcd_n / (n!)^(2c)`; the reduction lower bound predicts `>= e^-c`.
    pub gcd_rate: Option<f64>,
    pub lambda_hat: Option<f64>,
    pub exponent: u32,
    /// `e^c`, to be compared with `lambda_hat`.
    pub factorial_margin: f64,
    pub margin_holds: Option<bool>,
    #[serde(skip)]
    pub report: IrrationalityReport,
}

impl Certificate {
    pub fn to_text(&self) -> String {
        let f = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
        let mut s = String::new();
        s.push_str(&format!("constant: {}\n", self.constant));
        s.push_str(&format!("depth: {}\n", self.depth));
        s.push_str(&format!("verdict: {}\n", self.verdict.as_str()));
        if self.low_confidence {
            s.push_str(&format!("low-confidence: depth below {SHALLOW_DEPTH}\n"));
        }
        s.push_str(&format!("error decay per step |Q_n L - P_n|/gcd: {}\n", f(self.error_rate)));
        s.push_str(&format!("error decay per step |L - P_n/Q_n|: {}\n", f(self.plain_error_rate)));
        s.push_str(&format!("gcd growth per step relative to (n!)^{}: {}\n", 2 * self.exponent, f(self.gcd_rate)));
        s.push_str(&format!("lambda_hat: {}\n", f(self.lambda_hat)));
        let cmp = match self.margin_holds {
            Some(true) => "<",
            Some(false) => ">=",
            None => "?",
        };
        s.push_str(&format!("e^{} = {:.4} {} lambda_hat = {}\n", self.exponent, self.factorial_margin, cmp, f(self.lambda_hat)));
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.verdict.as_str(),
            "error_rate": self.error_rate,
            "gcd_rate": self.gcd_rate,
            "lambda_hat": self.lambda_hat,
            "low_confidence": self.low_confidence,
            "depth": self.depth,
            "constant": self.constant,
            "factorial_margin": self.factorial_margin,
            "margin_holds": self.margin_holds,
        })
    }
}

fn fitted_rate(values: &[(usize, f64)]) -> Option<f64> {
    let start = values.len() / 4;
    let pts: Vec<(f64, f64)> = values[start..].iter().map(|&(n, v)| (n as f64, v)).collect();
    crate::cf::fit_slope(&pts).map(f64::exp)
}

/// Irrationality evidence along the diagonal `m = n + 1` for `1 <= n <= depth`.
pub fn certificate(field: &MatrixField, ladder: &PrecisionLadder, depth: usize) -> Result<Certificate, LatticeError> {
    let records = diagonal_records(field, depth)?;
    certificate_from_records(field, ladder, &records[1..])
}

/// Same analysis over arbitrary records `(P_n, Q_n)`, `n = 1, 2, ...`.
pub fn certificate_from_records(
    field: &MatrixField,
    ladder: &PrecisionLadder,
    records: &[(BigInt, BigInt)],
) -> Result<Certificate, LatticeError> {
    let depth = records.len();
    let c = field.pair.as_ref().map(super::factorial_exponent).unwrap_or(0);
    let report = irrationality_check(records, ladder)?;

    let gcds: Vec<(usize, f64)> = records
        .iter()
        .enumerate()
        .map(|(i, (p, q))| (i + 1, p.gcd(q)))
        .filter(|(_, g)| !g.is_zero())
        .map(|(n, g)| (n, ln_abs_int(&g) - 2.0 * c as f64 * ln_abs_int(&factorial(n as u64))))
        .collect();
    let gcd_rate = if gcds.len() >= 3 { fitted_rate(&gcds) } else { None };

    let lambda_hat = v_sequence(field, depth).ok().map(|v| v.growth.lambda_hat).filter(|x| x.is_finite());
    let factorial_margin = (c as f64).exp();
    let margin_holds = lambda_hat.map(|l| factorial_margin < l);

    Ok(Certificate {
        constant: ladder.constant().name(),
        depth,
        verdict: report.verdict,
        low_confidence: depth < SHALLOW_DEPTH,
        error_rate: report.scaled_error_ratio,
        plain_error_rate: report.error_ratio,
        gcd_rate,
        lambda_hat,
        exponent: c,
        factorial_margin,
        margin_holds,
        report,
    })
}

/// Whether a fitted rate counts as decay.
pub fn is_decaying(rate: Option<f64>) -> bool {
    rate.is_some_and(|r| r < DECAY_THRESHOLD)
}
