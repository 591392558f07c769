use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{int_mat, pair_of, potential_pair, pq_table, to_int_pair, ConvergentRecord, LatticeError};
use crate::cf::{delta_measure, ln_error, Delta};
use crate::constants::PrecisionLadder;
use crate::exact::{to_decimal, to_f64, BiPoly, Mat2, Var};
use crate::field::{FieldDefinition, MatrixField};
use crate::par::par_map;

/// δ over `1 <= n <= n_max`, `1 <= m <= m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub n_max: usize,
    pub m_max: usize,
    /// Row-major by `m`, then `n`.
    pub cells: Vec<ConvergentRecord>,
    pub constant: String,
    pub constant_value_hash: String,
    pub constant_radius_log2: Option<f64>,
}

pub fn heatmap(field: &MatrixField, n_max: usize, m_max: usize, ladder: &PrecisionLadder) -> Result<Heatmap, LatticeError> {
    let table = pq_table(field, n_max, m_max)?;
    let cells: Vec<ConvergentRecord> = table.records().filter(|r| r.n >= 1).cloned().collect();
    let cells = par_map(cells, |mut r| {
        r.delta = Some(delta_measure(&r.p, &r.q, ladder));
        r
    });
    let approx = ladder.current().unwrap_or_else(|| ladder.approx(64));
    let value_text = to_decimal(&approx.value, 60);
    let hash = Sha256::digest(value_text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let radius_log2 = (!approx.radius.is_zero()).then(|| crate::exact::ln_abs(&approx.radius) / std::f64::consts::LN_2);
    Ok(Heatmap {
        n_max,
        m_max,
        cells,
        constant: ladder.constant().name(),
        constant_value_hash: hash,
        constant_radius_log2: radius_log2,
    })
}

fn digits(v: &BigInt) -> usize {
    v.abs().to_string().len()
}

impl Heatmap {
    pub fn get(&self, n: usize, m: usize) -> Option<&ConvergentRecord> {
        if n == 0 || n > self.n_max || m == 0 || m > self.m_max {
            return None;
        }
        self.cells.get((m - 1) * self.n_max + (n - 1))
    }

    pub fn delta(&self, n: usize, m: usize) -> Option<Delta> {
        self.get(n, m)?.delta
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,P_digits,Q_digits,delta\n");
        for c in &self.cells {
            let d = c.delta.map_or_else(|| "UNDET".to_string(), |d| d.render());
            s.push_str(&format!("{},{},{},{},{}\n", c.n, c.m, digits(&c.p), digits(&c.q), d));
        }
        s
    }

    pub fn to_json(&self, definition: Option<&FieldDefinition>) -> serde_json::Value {
        let cells: Vec<_> = self
            .cells
            .iter()
            .map(|c| {
                serde_json::json!({
                    "n": c.n,
                    "m": c.m,
                    "P_digits": digits(&c.p),
                    "Q_digits": digits(&c.q),
                    "delta": c.delta.map_or_else(|| "UNDET".to_string(), |d| d.render()),
                })
            })
            .collect();
        serde_json::json!({
            "field": definition,
            "constant": {
                "name": self.constant,
                "value_sha256": self.constant_value_hash,
                "radius_log2": self.constant_radius_log2,
            },
            "n_max": self.n_max,
            "m_max": self.m_max,
            "cells": cells,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum RatioClass {
    Bounded,
    /// `O(n^(exponent + eps))`.
    PowerGrowth { exponent: String, value: f64 },
    /// The numerator has lower degree, so the products decay faster than any power.
    Decaying,
    /// Leading terms differ; `dominant_ratio` is `|lc(Fbar)/lc(F)|` at equal degree, infinite otherwise.
    NeedsAnalysis { dominant_ratio: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductRatioReport {
    pub class: RatioClass,
    /// `|prod_{k=1}^n Fbar(k)/F(k)|` at `n = 10, 100, 1000, 10000`, skipping zeros of `F`.
    pub partial_products: Vec<(usize, f64)>,
}

pub const RATIO_CHECKPOINTS: [usize; 4] = [10, 100, 1_000, 10_000];

fn f64_coeffs(p: &BiPoly) -> Vec<f64> {
    p.to_univariate(Var::X).map(|v| v.iter().map(to_f64).collect()).unwrap_or_default()
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Classifies `|prod Fbar(k)/F(k)|` for univariate `F`, `Fbar` in `x`.
pub fn product_ratio(f: &BiPoly, fbar: &BiPoly) -> ProductRatioReport {
    let (df, dg) = (f.deg_x().unwrap_or(0), fbar.deg_x().unwrap_or(0));
    let (lf, lg) = (f.coeff(df, 0), fbar.coeff(dg, 0));
    let class = if fbar.is_zero() || dg < df {
        RatioClass::Decaying
    } else if dg > df {
        RatioClass::NeedsAnalysis { dominant_ratio: f64::INFINITY }
    } else if lf.abs() != lg.abs() {
        RatioClass::NeedsAnalysis { dominant_ratio: to_f64(&(&lg / &lf).abs()) }
    } else if df == 0 {
        RatioClass::Bounded
    } else {
        let sub_f = f.coeff(df - 1, 0) / &lf;
        let sub_g = fbar.coeff(dg - 1, 0) / &lg;
        if sub_f == sub_g {
            RatioClass::Bounded
        } else {
            let e = sub_g - sub_f;
            RatioClass::PowerGrowth { exponent: e.to_string(), value: to_f64(&e) }
        }
    };

    let (cf, cg) = (f64_coeffs(f), f64_coeffs(fbar));
    let mut log = 0.0f64;
    let mut zero = false;
    let mut partial_products = Vec::new();
    for k in 1..=*RATIO_CHECKPOINTS.last().unwrap() {
        let (a, b) = (horner(&cf, k as f64), horner(&cg, k as f64));
        if a != 0.0 {
            if b == 0.0 {
                zero = true;
            } else {
                log += (b / a).abs().ln();
            }
        }
        if RATIO_CHECKPOINTS.contains(&k) {
            partial_products.push((k, if zero { 0.0 } else { log.exp() }));
        }
    }
    ProductRatioReport { class, partial_products }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Holds,
    Fails,
    Unknown,
}

/// Whether `|prod fbar(k,0)/f(k,0)| = o(n^d)` with `d` the `y`-degree of the dual `a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub d: Option<u32>,
    pub ratio: ProductRatioReport,
    pub axis_split: bool,
    pub status: HypothesisStatus,
}

pub fn line_hypothesis(field: &MatrixField) -> Result<HypothesisReport, LatticeError> {
    let pair = pair_of(field)?;
    let zero = BigRational::zero();
    let f = pair.f.partial_eval(Var::Y, &zero);
    let fbar = pair.fbar.partial_eval(Var::Y, &zero);
    let ratio = product_ratio(&f, &fbar);
    let d = pair.dual()?.a.deg_y();
    let axis_split = pair.has_axis_split();
    let dd = d.unwrap_or(0) as f64;
    let status = if !axis_split {
        HypothesisStatus::Unknown
    } else {
        match &ratio.class {
            RatioClass::Decaying => HypothesisStatus::Holds,
            RatioClass::Bounded if dd >= 1.0 => HypothesisStatus::Holds,
            RatioClass::Bounded => HypothesisStatus::Fails,
            RatioClass::PowerGrowth { value, .. } if *value < dd => HypothesisStatus::Holds,
            RatioClass::PowerGrowth { .. } => HypothesisStatus::Fails,
            RatioClass::NeedsAnalysis { dominant_ratio } if *dominant_ratio < 1.0 => HypothesisStatus::Holds,
            RatioClass::NeedsAnalysis { .. } => HypothesisStatus::Unknown,
        }
    };
    Ok(HypothesisReport { d, ratio, axis_split, status })
}

/// Values along the row `y = m` at depth `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineLimit {
    pub m: usize,
    pub depth: usize,
    /// `P(n,m)/Q(n,m)`.
    pub potential: f64,
    /// `p_n(m)/q_n(m)`.
    pub row: f64,
    /// `Q(n,m)/P(n,m) - a(0,1)`: the row read in continued fraction form.
    pub cf_form: Option<f64>,
    pub hypothesis: HypothesisReport,
}

pub fn line_limit(field: &MatrixField, m: usize, depth: usize) -> Result<LineLimit, LatticeError> {
    let pair = pair_of(field)?;
    let hypothesis = line_hypothesis(field)?;
    let mi = m as i64;
    let mut r = Mat2::<BigInt>::identity();
    for k in 0..depth as i64 {
        r = r.mul(&int_mat(&field.mx_at(k, mi)));
    }
    let row_v = [BigRational::from_integer(r.m[0][1].clone()), BigRational::from_integer(r.m[1][1].clone())];
    let prefix = super::column_prefix(field, m)?;
    let (p, q) = to_int_pair(&prefix.apply(&row_v));
    let ratio = |a: &BigRational, b: &BigRational| if b.is_zero() { f64::NAN } else { to_f64(&(a / b)) };
    let (pr, qr) = (BigRational::from_integer(p), BigRational::from_integer(q));
    let a01 = pair.a.eval_i64(0, 1);
    let cf_form = (!pr.is_zero()).then(|| to_f64(&(&qr / &pr - a01)));
    Ok(LineLimit {
        m,
        depth,
        potential: ratio(&pr, &qr),
        row: ratio(&row_v[0], &row_v[1]),
        cf_form,
        hypothesis,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathPoint {
    pub n: usize,
    pub m: usize,
    pub estimate: f64,
    pub ln_error: Option<f64>,
    /// `|p_n(m)/q_n(m)| <= |L - P(0,m)/Q(0,m)| prod_{k<m} |f(0,k)/fbar(0,k)|`.
    pub row_bound: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathProbe {
    pub points: Vec<PathPoint>,
}

impl PathProbe {
    pub fn final_error(&self) -> Option<f64> {
        self.points.last()?.ln_error.map(f64::exp)
    }

    pub fn bounds_hold(&self) -> bool {
        self.points.iter().all(|p| p.row_bound != Some(false))
    }
}

/// Estimates of `P(n_i, m_i)/Q(n_i, m_i)` along each supplied path.
pub fn any_path_limit_probe(
    field: &MatrixField,
    paths: &[Vec<(usize, usize)>],
    ladder: &PrecisionLadder,
) -> Result<Vec<PathProbe>, LatticeError> {
    let pair = pair_of(field)?;
    let l = ladder.approx(256).value;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let mut points = Vec::with_capacity(path.len());
        for &(n, m) in path {
            let v = potential_pair(field, n, m)?;
            let x = (!v[1].is_zero()).then(|| &v[0] / &v[1]);
            let start_bits = 64 + 8 * v[1].numer().bits();
            let ln_err = x.as_ref().and_then(|x| ln_error(x, ladder, start_bits));
            let row_bound = (|| {
                let head = potential_pair(field, 0, m).ok()?;
                if head[1].is_zero() {
                    return None;
                }
                let mut scale = (&l - &head[0] / &head[1]).abs();
                for k in 1..m as i64 {
                    let fb = pair.fbar.eval_i64(0, k);
                    if fb.is_zero() {
                        return None;
                    }
                    scale *= (pair.f.eval_i64(0, k) / fb).abs();
                }
                let row = super::row_values(field, n, m as i64);
                if row[1].is_zero() {
                    return None;
                }
                let lhs = to_f64(&(&row[0] / &row[1]).abs());
                Some(lhs <= to_f64(&scale) * (1.0 + 1e-12))
            })();
            points.push(PathPoint { n, m, estimate: x.as_ref().map_or(f64::NAN, to_f64), ln_error: ln_err, row_bound });
        }
        out.push(PathProbe { points });
    }
    Ok(out)
}
