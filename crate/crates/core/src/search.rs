//! Searches for conjugate pairs and for completions of a partial field.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::linalg::{nullspace, solve_affine};
use crate::exact::{rat, BiPoly, Mat2};
use crate::field::{validate_pair, ConjugatePair, FieldError};
use crate::par::par_map;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("search space has {size} points, above the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Exponents `(i, j)` with `i + j <= deg`, by degree then descending `x` power.
pub fn monomials_upto(deg: u32) -> Vec<(u32, u32)> {
    (0..=deg).flat_map(|t| (0..=t).rev().map(move |i| (i, t - i))).collect()
}

fn poly_from(monos: &[(u32, u32)], coeffs: &[BigRational]) -> BiPoly {
    BiPoly::from_terms(monos.iter().copied().zip(coeffs.iter().cloned()))
}

/// Solutions `M_Y` of `M_X(x,y) M_Y(x+1,y) = M_Y(x,y) M_X(x,y+1)` with entries
/// of degree at most `deg_x` in `x` and `deg_y` in `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub basis: Vec<Mat2<BiPoly>>,
    /// Whether `det` of each basis element is a nonzero polynomial.
    pub nonsingular: Vec<bool>,
    unknowns: Vec<(usize, (u32, u32))>,
}

impl Completion {
    fn coords(&self, m: &Mat2<BiPoly>) -> Option<Vec<BigRational>> {
        let mut v: Vec<BigRational> =
            self.unknowns.iter().map(|&(e, (i, j))| m.m[e / 2][e % 2].coeff(i, j)).collect();
        let total: usize = m.m.iter().flatten().map(BiPoly::num_terms).sum();
        let seen = v.iter().filter(|c| !c.is_zero()).count();
        (seen == total).then(|| std::mem::take(&mut v))
    }

    /// Whether `m` lies in the span of the basis.
    pub fn contains(&self, m: &Mat2<BiPoly>) -> bool {
        let Some(target) = self.coords(m) else {
            return false;
        };
        if self.basis.is_empty() {
            return target.iter().all(Zero::is_zero);
        }
        let cols: Vec<Vec<BigRational>> = self.basis.iter().map(|b| self.coords(b).expect("in box")).collect();
        let rows: Vec<Vec<BigRational>> =
            (0..target.len()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        solve_affine(&rows, &target, cols.len()).is_some()
    }
}

pub const MAX_UNKNOWNS: usize = 4096;

pub fn complete_my(mx: &Mat2<BiPoly>, deg_x: u32, deg_y: u32) -> Result<Completion, SearchError> {
    let monos: Vec<(u32, u32)> = (0..=deg_x).flat_map(|i| (0..=deg_y).map(move |j| (i, j))).collect();
    let unknowns: Vec<(usize, (u32, u32))> = (0..4).flat_map(|e| monos.iter().map(move |&m| (e, m))).collect();
    if unknowns.len() > MAX_UNKNOWNS {
        return Err(SearchError::InvalidSpace(format!("{} unknowns", unknowns.len())));
    }
    let mx_up = mx.map(|p| p.shift_i64(0, 1));
    let images: Vec<Mat2<BiPoly>> = par_map(unknowns.clone(), |(e, (i, j))| {
        let mut unit = Mat2::<BiPoly>::zero();
        unit.m[e / 2][e % 2] = BiPoly::monomial(i, j, BigRational::one());
        let shifted = unit.map(|p| p.shift_i64(1, 0));
        mx.mul(&shifted).sub(&unit.mul(&mx_up))
    });
    let mut rows: BTreeMap<(usize, (u32, u32)), Vec<BigRational>> = BTreeMap::new();
    for (u, img) in images.iter().enumerate() {
        for (e, p) in img.m.iter().flatten().enumerate() {
            for (mono, c) in p.terms() {
                rows.entry((e, *mono)).or_insert_with(|| vec![BigRational::zero(); unknowns.len()])[u] = c.clone();
            }
        }
    }
    let a: Vec<Vec<BigRational>> = rows.into_values().collect();
    let kernel = nullspace(&a, unknowns.len());
    let basis: Vec<Mat2<BiPoly>> = kernel
        .iter()
        .map(|v| {
            let mut m = Mat2::<BiPoly>::zero();
            for (c, &(e, mono)) in v.iter().zip(&unknowns) {
                if !c.is_zero() {
                    m.m[e / 2][e % 2] += BiPoly::monomial(mono.0, mono.1, c.clone());
                }
            }
            m
        })
        .collect();
    let nonsingular = basis.iter().map(|m| !m.det().is_zero()).collect();
    Ok(Completion { basis, nonsingular, unknowns })
}

/// Box of integer polynomials of total degree at most `deg` with coefficients in `[-coeff_box, coeff_box]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    pub deg: u32,
    pub coeff_box: i64,
    pub cap: u128,
}

pub const DEFAULT_CAP: u128 = 2_000_000;

impl SearchSpace {
    pub fn new(deg: u32, coeff_box: i64) -> Self {
        Self { deg, coeff_box, cap: DEFAULT_CAP }
    }

    /// Number of candidate `f`.
    pub fn size(&self) -> Option<u128> {
        let side = (2 * self.coeff_box + 1) as u128;
        let n = monomials_upto(self.deg).len() as u32;
        side.checked_pow(n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoundPair {
    pub pair: ConjugatePair,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub space_size: u128,
    /// Candidate pairs before deduplication.
    pub raw_count: usize,
    pub pairs: Vec<FoundPair>,
}

impl SearchReport {
    pub fn degenerate_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.degenerate).count()
    }
}

fn joint_content(f: &BiPoly, g: &BiPoly) -> BigInt {
    f.content().gcd(&g.content())
}

/// Scales by a nonzero rational so that `f` and `fbar` are integral with
/// coprime joint content and `f` has positive leading coefficient.
pub fn canonical(pair: &ConjugatePair) -> Result<ConjugatePair, FieldError> {
    let (f, lf) = pair.f.clear_denominators();
    let (g, lg) = pair.fbar.clear_denominators();
    let l = BigRational::from_integer(lf.lcm(&lg));
    let (f, g) = if l.is_one() { (f, g) } else { (pair.f.scale(&l), pair.fbar.scale(&l)) };
    let c = joint_content(&f, &g);
    let sign = if f.leading_coeff().is_negative() { -BigInt::one() } else { BigInt::one() };
    let s = BigRational::new(sign, if c.is_zero() { BigInt::one() } else { c });
    validate_pair(&f.scale(&s), &g.scale(&s))
}

fn homogeneous_top(p: &BiPoly) -> BiPoly {
    let d = p.total_degree();
    BiPoly::from_terms(p.terms().filter(|(e, _)| Some(e.0 + e.1) == d).map(|(e, c)| (*e, c.clone())))
}

fn partial(p: &BiPoly, wrt_x: bool) -> BiPoly {
    BiPoly::from_terms(p.terms().filter_map(|(&(i, j), c)| {
        let k = if wrt_x { i } else { j };
        (k > 0).then(|| (if wrt_x { (i - 1, j) } else { (i, j - 1) }, c * rat(k as i64)))
    }))
}

/// Linear constraints on a translation `(alpha, beta)` taking `a` to `b`, read off the
/// degree `d-1` parts: `b_{d-1} - a_{d-1} = alpha d_x a_d + beta d_y a_d`.
fn translation_rows(a: &BiPoly, b: &BiPoly) -> Vec<[BigRational; 3]> {
    let Some(d) = a.total_degree().filter(|&d| d > 0) else {
        return Vec::new();
    };
    let top = homogeneous_top(a);
    let (gx, gy) = (partial(&top, true), partial(&top, false));
    let diff = b - a;
    let mut monos: Vec<(u32, u32)> = gx.terms().chain(gy.terms()).chain(diff.terms()).map(|(e, _)| *e).collect();
    monos.retain(|e| e.0 + e.1 == d - 1);
    monos.sort();
    monos.dedup();
    monos.iter().map(|&(i, j)| [gx.coeff(i, j), gy.coeff(i, j), diff.coeff(i, j)]).collect()
}

/// Rows `[d_x top, d_y top, coefficient]` over the degree `d-1` monomials of `f`
/// and `fbar`: shifting by `(alpha, beta)` moves each coefficient by
/// `alpha d_x top + beta d_y top`.
fn gradient_rows(p: &ConjugatePair) -> Vec<[BigRational; 3]> {
    let mut g = Vec::new();
    for q in [&p.f, &p.fbar] {
        let Some(d) = q.total_degree().filter(|&d| d > 0) else {
            continue;
        };
        let top = homogeneous_top(q);
        let (gx, gy) = (partial(&top, true), partial(&top, false));
        for (i, j) in monomials_upto(d - 1).into_iter().filter(|e| e.0 + e.1 == d - 1) {
            g.push([gx.coeff(i, j), gy.coeff(i, j), q.coeff(i, j)]);
        }
    }
    g
}

/// Shift to the representative of the translation class of a pair: the translate
/// whose degree `d-1` coefficients have least squared norm, ties broken
/// lexicographically. `None` when those coefficients do not pin down the shift.
pub fn translation_normal_shift(p: &ConjugatePair) -> Option<(i64, i64)> {
    let g = gradient_rows(p);
    let dot = |a: usize, b: usize| g.iter().fold(BigRational::zero(), |acc, r| acc + &r[a] * &r[b]);
    let (m00, m01, m11) = (dot(0, 0), dot(0, 1), dot(1, 1));
    let det = &m00 * &m11 - &m01 * &m01;
    if det.is_zero() {
        return None;
    }
    let (r0, r1) = (dot(0, 2), dot(1, 2));
    let t0 = -(&m11 * &r0 - &m01 * &r1) / &det;
    let t1 = -(&m00 * &r1 - &m01 * &r0) / &det;
    let (c0, c1) = (t0.floor().to_integer(), t1.floor().to_integer());
    let mut best: Option<(BigRational, Vec<BigRational>, (BigInt, BigInt))> = None;
    for da in -3i64..=4 {
        for db in -3i64..=4 {
            let (a, b) = (&c0 + da, &c1 + db);
            let (ar, br) = (BigRational::from_integer(a.clone()), BigRational::from_integer(b.clone()));
            let w: Vec<BigRational> = g.iter().map(|r| &r[2] + &r[0] * &ar + &r[1] * &br).collect();
            let norm = w.iter().fold(BigRational::zero(), |acc, v| acc + v * v);
            let better = match &best {
                None => true,
                Some((bn, bw, _)) => norm < *bn || (norm == *bn && w < *bw),
            };
            if better {
                best = Some((norm, w, (a, b)));
            }
        }
    }
    let (_, _, (a, b)) = best?;
    Some((a.try_into().ok()?, b.try_into().ok()?))
}

/// Least display string among translates whose coefficients stay in `[-b, b]`;
/// the window covers every such translate of a pair inside the box.
fn boxed_orbit_key(p: &ConjugatePair, b: i64) -> String {
    let w = 4 * b.max(1) + 2;
    let bound = rat(b);
    let inside = |q: &BiPoly| q.terms().all(|(_, c)| c.abs() <= bound);
    let g = gradient_rows(p);
    let mut best = format!("{} | {}", p.f, p.fbar);
    for alpha in -w..=w {
        for beta in -w..=w {
            let (ar, br) = (rat(alpha), rat(beta));
            if g.iter().any(|r| (&r[2] + &r[0] * &ar + &r[1] * &br).abs() > bound) {
                continue;
            }
            let f = p.f.shift_i64(alpha, beta);
            if !inside(&f) {
                continue;
            }
            let g = p.fbar.shift_i64(alpha, beta);
            if inside(&g) {
                best = best.min(format!("{f} | {g}"));
            }
        }
    }
    best
}

/// An integer translation `(alpha, beta)` with `b = a(x+alpha, y+beta)`, searched in a window.
pub fn translation_between(a: &ConjugatePair, b: &ConjugatePair, window: i64) -> Option<(i64, i64)> {
    if homogeneous_top(&a.f) != homogeneous_top(&b.f) || homogeneous_top(&a.fbar) != homogeneous_top(&b.fbar) {
        return None;
    }
    let mut rows = translation_rows(&a.f, &b.f);
    rows.extend(translation_rows(&a.fbar, &b.fbar));
    for alpha in -window..=window {
        for beta in -window..=window {
            let (ar, br) = (rat(alpha), rat(beta));
            if rows.iter().any(|r| &r[0] * &ar + &r[1] * &br != r[2]) {
                continue;
            }
            if a.f.shift_i64(alpha, beta) == b.f && a.fbar.shift_i64(alpha, beta) == b.fbar {
                return Some((alpha, beta));
            }
        }
    }
    None
}

fn coeffs_from_index(mut idx: u128, n: usize, b: i64) -> Vec<BigRational> {
    let side = (2 * b + 1) as u128;
    (0..n)
        .map(|_| {
            let d = (idx % side) as i64 - b;
            idx /= side;
            rat(d)
        })
        .collect()
}

fn weight(p: &ConjugatePair) -> (BigRational, String) {
    let w = p.f.terms().chain(p.fbar.terms()).fold(BigRational::zero(), |acc, (_, c)| acc + c.abs());
    (w, format!("{} | {}", p.f, p.fbar))
}

/// For each `f` in the box, solves the linear condition together with the
/// vanishing of the mixed part of `f fbar` (both linear in `fbar`), then keeps
/// the integral solutions inside the box.
fn pairs_for_f(f: &BiPoly, monos: &[(u32, u32)], shifts: &[BiPoly], b: i64) -> Vec<ConjugatePair> {
    let n = monos.len();
    let mut rows: BTreeMap<(u8, (u32, u32)), (Vec<BigRational>, BigRational)> = BTreeMap::new();
    let fixed = f.shift_i64(1, -1) - f;
    for (e, c) in fixed.terms() {
        rows.entry((0, *e)).or_insert_with(|| (vec![BigRational::zero(); n], BigRational::zero())).1 = -c.clone();
    }
    for (j, s) in shifts.iter().enumerate() {
        for (e, c) in s.terms() {
            rows.entry((0, *e)).or_insert_with(|| (vec![BigRational::zero(); n], BigRational::zero())).0[j] = c.clone();
        }
    }
    for (j, &(i, k)) in monos.iter().enumerate() {
        let prod = (f * &BiPoly::monomial(i, k, BigRational::one())).mixed_part();
        for (e, c) in prod.terms() {
            rows.entry((1, *e)).or_insert_with(|| (vec![BigRational::zero(); n], BigRational::zero())).0[j] = c.clone();
        }
    }
    let (a, rhs): (Vec<_>, Vec<_>) = rows.into_values().unzip();
    let Some(sol) = solve_affine(&a, &rhs, n) else {
        return Vec::new();
    };
    let side = (2 * b + 1) as u128;
    let Some(count) = side.checked_pow(sol.free.len() as u32) else {
        return Vec::new();
    };
    let bound = rat(b);
    let mut out = Vec::new();
    for idx in 0..count {
        let t = coeffs_from_index(idx, sol.free.len(), b);
        let mut v = sol.particular.clone();
        for (ti, k) in t.iter().zip(&sol.kernel) {
            for (vi, ki) in v.iter_mut().zip(k) {
                *vi += ti * ki;
            }
        }
        if v.iter().any(|c| !c.is_integer() || c.abs() > bound) {
            continue;
        }
        let fbar = poly_from(monos, &v);
        if let Ok(p) = validate_pair(f, &fbar) {
            out.push(p);
        }
    }
    out
}

const CHUNK: u128 = 512;

pub fn enumerate_pairs(space: &SearchSpace) -> Result<SearchReport, SearchError> {
    if space.coeff_box < 0 {
        return Err(SearchError::InvalidSpace("negative coefficient box".into()));
    }
    let size = space.size().ok_or(SearchError::CapExceeded { size: u128::MAX, cap: space.cap })?;
    if size > space.cap {
        return Err(SearchError::CapExceeded { size, cap: space.cap });
    }
    let monos = monomials_upto(space.deg);
    let shifts: Vec<BiPoly> = monos
        .iter()
        .map(|&(i, j)| {
            let m = BiPoly::monomial(i, j, BigRational::one());
            m.shift_i64(1, 0) - m.shift_i64(0, -1)
        })
        .collect();
    let starts: Vec<u128> = (0..size.div_ceil(CHUNK)).map(|c| c * CHUNK).collect();
    let chunks = par_map(starts, |start| {
        let mut found = Vec::new();
        for idx in start..(start + CHUNK).min(size) {
            let f = poly_from(&monos, &coeffs_from_index(idx, monos.len(), space.coeff_box));
            if f.is_zero() || f.leading_coeff().is_negative() {
                continue;
            }
            found.extend(pairs_for_f(&f, &monos, &shifts, space.coeff_box));
        }
        found
    });
    let raw: Vec<ConjugatePair> = chunks.into_iter().flatten().collect();
    let raw_count = raw.len();
    let mut canon: Vec<ConjugatePair> = raw.iter().filter_map(|p| canonical(p).ok()).collect();
    canon.sort_by_key(weight);
    canon.dedup();

    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut kept: Vec<ConjugatePair> = Vec::new();
    for p in canon {
        let key = match translation_normal_shift(&p) {
            Some((a, b)) => format!("{} | {}", p.f.shift_i64(a, b), p.fbar.shift_i64(a, b)),
            None => boxed_orbit_key(&p, space.coeff_box),
        };
        if seen.insert(key, ()).is_none() {
            kept.push(p);
        }
    }
    let pairs = kept.into_iter().map(|p| FoundPair { degenerate: p.is_degenerate(), pair: p }).collect();
    Ok(SearchReport { space_size: size, raw_count, pairs })
}

/// Whether `target` matches a found pair up to scaling and translation.
pub fn report_contains(report: &SearchReport, target: &ConjugatePair, window: i64) -> bool {
    let Ok(t) = canonical(target) else {
        return false;
    };
    report.pairs.iter().any(|p| translation_between(&p.pair, &t, window).is_some())
}

/// Size estimate as a float, for spaces too large to count exactly.
pub fn size_estimate(space: &SearchSpace) -> f64 {
    let n = monomials_upto(space.deg).len() as f64;
    ((2 * space.coeff_box + 1) as f64).powf(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse::parse_poly;
    use crate::field::{Degree2Row, Preset};

    #[test]
    fn completes_zeta3_field() {
        let pair = Preset::Zeta3.pair();
        let cf = pair.cf_field().unwrap();
        let c = complete_my(&cf.mx, 6, 3).unwrap();
        assert!(!c.basis.is_empty());
        assert!(c.contains(&cf.my));
        assert!(c.contains(&cf.my.scale(&BiPoly::constant(rat(3)))));
        assert!(!c.contains(&Mat2::identity().scale(&BiPoly::x())));
    }

    #[test]
    fn identity_completion_is_y_free() {
        // M_Y(x+1, y) = M_Y(x, y): every entry is free in y and constant in x
        let c = complete_my(&Mat2::identity(), 1, 2).unwrap();
        assert_eq!(c.basis.len(), 12);
        for b in &c.basis {
            assert!(b.m.iter().flatten().all(|p| p.deg_x().unwrap_or(0) == 0));
        }
    }

    #[test]
    fn degree_one_family() {
        let r = enumerate_pairs(&SearchSpace::new(1, 2)).unwrap();
        assert!(!r.pairs.is_empty());
        for p in r.pairs.iter().filter(|p| !p.degenerate) {
            let f = &p.pair.f;
            assert_eq!(f.coeff(1, 0), f.coeff(0, 1));
            let g = &p.pair.fbar;
            assert_eq!(g.coeff(1, 0), -g.coeff(0, 1));
        }
        let ln2 = Preset::Ln2.pair();
        assert!(report_contains(&r, &ln2, 4));
    }

    #[test]
    fn empty_box_is_empty() {
        let r = enumerate_pairs(&SearchSpace::new(2, 0)).unwrap();
        assert!(r.pairs.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let s = SearchSpace { deg: 3, coeff_box: 3, cap: 1000 };
        assert!(matches!(enumerate_pairs(&s), Err(SearchError::CapExceeded { .. })));
    }

    #[test]
    fn canonical_forms_are_scale_invariant() {
        let p = Preset::Zeta3.pair();
        let c = canonical(&p).unwrap();
        for s in [2, -1, 3] {
            assert_eq!(canonical(&p.scale(&rat(s)).unwrap()).unwrap(), c);
        }
        let t = p.translate(1, 2).unwrap();
        assert_eq!(translation_between(&p, &t, 3), Some((1, 2)));
    }

    #[test]
    fn degree_two_rows_are_pairs() {
        for row in Degree2Row::ALL {
            let p = row.pair(0).unwrap();
            assert!(validate_pair(&p.f, &p.fbar).is_ok());
        }
        assert_eq!(monomials_upto(1), vec![(0, 0), (1, 0), (0, 1)]);
        let _ = parse_poly("x").unwrap();
    }
}
