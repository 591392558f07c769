//! Conjugate polynomial pairs and the conservative matrix fields they generate.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::parse::{parse_poly, ParseError};
use crate::exact::{fmt_monomials, parse_rational, rat, BiPoly, ExactError, Mat2, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("linear condition fails: f(x+1,y-1) - fbar(x,y-1) - f(x,y) + fbar(x+1,y) = {residual}")]
    LinearCondition { residual: BiPoly },
    #[error("quadratic condition fails: f*fbar has mixed monomials {}", fmt_monomials(.monomials))]
    QuadraticCondition { monomials: Vec<(u32, u32)> },
    #[error("b = (f*fbar)(x,0) split is identically zero")]
    ZeroB,
    #[error("split bx + by does not reproduce f*fbar")]
    BadSplit,
    #[error("fields are not conservative: residual {residual}")]
    NotConservative { residual: Box<Mat2<BiPoly>> },
    #[error("determinant identity fails for {which}: got {got}, expected {expected}")]
    Determinant { which: &'static str, got: BiPoly, expected: BiPoly },
    #[error("operation needs a {expected} field")]
    WrongForm { expected: &'static str },
    #[error("field was not built from a conjugate pair")]
    NoPair,
    #[error("matrix {which} is singular at lattice point ({x}, {y})")]
    Singular { which: &'static str, x: i64, y: i64 },
    #[error("polynomial matrix for inflation must be univariate")]
    NotUnivariate,
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("bad rational '{0}'")]
    BadRational(String),
    #[error("unknown preset '{0}': expected zeta3, zeta2, ln2 or e")]
    UnknownPreset(String),
}

impl From<ExactError> for FieldError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::MixedTerms { monomials } => FieldError::QuadraticCondition { monomials },
            ExactError::Parse(p) => FieldError::Parse(p),
            _ => FieldError::NotUnivariate,
        }
    }
}

/// A validated conjugate pair with its derived data.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatePair {
    pub f: BiPoly,
    pub fbar: BiPoly,
    /// `f(x,y) - fbar(x+1,y)`.
    pub a: BiPoly,
    pub ffbar: BiPoly,
    pub bx: BiPoly,
    pub by: BiPoly,
    /// `bx(0) - (f fbar)(0,0)`; zero means `bx(x) = (f fbar)(x,0)`.
    pub split_offset: BigRational,
}

/// Left minus right side of the linear condition.
pub fn linear_residual(f: &BiPoly, fbar: &BiPoly) -> BiPoly {
    f.shift_i64(1, -1) - fbar.shift_i64(0, -1) - f + fbar.shift_i64(1, 0)
}

pub fn validate_pair(f: &BiPoly, fbar: &BiPoly) -> Result<ConjugatePair, FieldError> {
    validate_pair_with_offset(f, fbar, &BigRational::zero())
}

/// Validates with `bx = (f fbar)(x,0) + offset` and `by = (f fbar)(0,y) - (f fbar)(0,0) - offset`.
pub fn validate_pair_with_offset(f: &BiPoly, fbar: &BiPoly, offset: &BigRational) -> Result<ConjugatePair, FieldError> {
    let ffbar = f * fbar;
    let split = ffbar.split_additive(&(ffbar.constant_term() + offset))?;
    check_linear(f, fbar)?;
    ConjugatePair::assemble(f.clone(), fbar.clone(), ffbar, split.bx, split.by)
}

fn check_linear(f: &BiPoly, fbar: &BiPoly) -> Result<(), FieldError> {
    let residual = linear_residual(f, fbar);
    if residual.is_zero() {
        Ok(())
    } else {
        Err(FieldError::LinearCondition { residual })
    }
}

impl ConjugatePair {
    /// Validates a pair with an explicitly chosen split.
    pub fn with_split(f: BiPoly, fbar: BiPoly, bx: BiPoly, by: BiPoly) -> Result<Self, FieldError> {
        let ffbar = &f * &fbar;
        let mixed = ffbar.mixed_part();
        if !mixed.is_zero() {
            return Err(FieldError::QuadraticCondition { monomials: mixed.terms().map(|(e, _)| *e).collect() });
        }
        check_linear(&f, &fbar)?;
        if !bx.is_univariate_in(Var::X) || !by.is_univariate_in(Var::Y) || &bx + &by != ffbar {
            return Err(FieldError::BadSplit);
        }
        Self::assemble(f, fbar, ffbar, bx, by)
    }

    fn assemble(f: BiPoly, fbar: BiPoly, ffbar: BiPoly, bx: BiPoly, by: BiPoly) -> Result<Self, FieldError> {
        if bx.is_zero() {
            return Err(FieldError::ZeroB);
        }
        let a = &f - &fbar.shift_i64(1, 0);
        let split_offset = bx.constant_term() - ffbar.constant_term();
        Ok(Self { f, fbar, a, ffbar, bx, by, split_offset })
    }

    /// The pair `(f(y,x), -fbar(y,x))` with split `(-by(x), -bx(y))`.
    pub fn dual(&self) -> Result<Self, FieldError> {
        let bx = -self.by.swap();
        let by = -self.bx.swap();
        Self::with_split(self.f.swap(), -self.fbar.swap(), bx, by)
    }

    /// Moves the origin to `(alpha, beta)`.
    pub fn translate(&self, alpha: i64, beta: i64) -> Result<Self, FieldError> {
        Self::with_split(
            self.f.shift_i64(alpha, beta),
            self.fbar.shift_i64(alpha, beta),
            self.bx.shift_i64(alpha, 0),
            self.by.shift_i64(0, beta),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Result<Self, FieldError> {
        let c2 = c * c;
        Self::with_split(self.f.scale(c), self.fbar.scale(c), self.bx.scale(&c2), self.by.scale(&c2))
    }

    /// True when `a` does not depend on `y`, so every horizontal line is the same.
    pub fn is_degenerate(&self) -> bool {
        self.a.deg_y().unwrap_or(0) == 0
    }

    /// Whether the split is `bx(x) = (f fbar)(x,0)`, `by(y) = (f fbar)(0,y)`, which
    /// forces `(f fbar)(0,0) = 0`.
    pub fn has_axis_split(&self) -> bool {
        let x0 = self.ffbar.partial_eval(Var::Y, &BigRational::zero());
        let y0 = self.ffbar.partial_eval(Var::X, &BigRational::zero());
        self.bx == x0 && self.by == y0
    }

    pub fn cf_field(&self) -> Result<MatrixField, FieldError> {
        build_cf_field(self)
    }

    pub fn twisted_field(&self) -> Result<MatrixField, FieldError> {
        twist(&build_cf_field(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldForm {
    Cf,
    Twisted,
    General,
}

/// Two polynomial matrices `M_X`, `M_Y` satisfying the conservativeness identity.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    pub mx: Mat2<BiPoly>,
    pub my: Mat2<BiPoly>,
    pub form: FieldForm,
    pub origin: (i64, i64),
    pub pair: Option<ConjugatePair>,
}

pub fn shift_mat(m: &Mat2<BiPoly>, dx: i64, dy: i64) -> Mat2<BiPoly> {
    m.map(|p| p.shift_i64(dx, dy))
}

pub fn eval_mat(m: &Mat2<BiPoly>, x: i64, y: i64) -> Mat2<BigRational> {
    let (xr, yr) = (rat(x), rat(y));
    m.map(|p| p.eval(&xr, &yr))
}

/// `M_X(x,y) M_Y(x+1,y) - M_Y(x,y) M_X(x,y+1)`.
pub fn conservative_residual(mx: &Mat2<BiPoly>, my: &Mat2<BiPoly>) -> Mat2<BiPoly> {
    mx.mul(&shift_mat(my, 1, 0)).sub(&my.mul(&shift_mat(mx, 0, 1)))
}

pub fn check_conservative(mx: &Mat2<BiPoly>, my: &Mat2<BiPoly>) -> Result<(), FieldError> {
    let residual = conservative_residual(mx, my);
    if residual.is_zero() {
        Ok(())
    } else {
        Err(FieldError::NotConservative { residual: Box::new(residual) })
    }
}

fn check_det(which: &'static str, m: &Mat2<BiPoly>, expected: BiPoly) -> Result<(), FieldError> {
    let got = m.det();
    if got == expected {
        Ok(())
    } else {
        Err(FieldError::Determinant { which, got, expected })
    }
}

/// `M_X = [[0, b(x)], [1, a]]`, `M_Y = [[fbar, b(x)], [1, f]]`.
pub fn build_cf_field(pair: &ConjugatePair) -> Result<MatrixField, FieldError> {
    let (z, one) = (BiPoly::zero(), BiPoly::one());
    let mx = Mat2::new(z, pair.bx.clone(), one.clone(), pair.a.clone());
    let my = Mat2::new(pair.fbar.clone(), pair.bx.clone(), one, pair.f.clone());
    check_conservative(&mx, &my)?;
    check_det("M_X", &mx, -pair.bx.clone())?;
    check_det("M_Y", &my, pair.by.clone())?;
    Ok(MatrixField { mx, my, form: FieldForm::Cf, origin: (0, 0), pair: Some(pair.clone()) })
}

/// Conjugates the cf form by `diag(b(x), 1)`: `M_X = [[0, 1], [b(x+1), a]]`,
/// `M_Y = [[fbar, 1], [b(x), f]]`.
pub fn twist(field: &MatrixField) -> Result<MatrixField, FieldError> {
    if field.form != FieldForm::Cf {
        return Err(FieldError::WrongForm { expected: "cf-form" });
    }
    let pair = field.pair.as_ref().ok_or(FieldError::NoPair)?;
    let (z, one) = (BiPoly::zero(), BiPoly::one());
    let b1 = pair.bx.shift_i64(1, 0);
    let mx = Mat2::new(z, one.clone(), b1.clone(), pair.a.clone());
    let my = Mat2::new(pair.fbar.clone(), one, pair.bx.clone(), pair.f.clone());
    check_conservative(&mx, &my)?;
    check_det("M_X", &mx, -b1)?;
    check_det("M_Y", &my, pair.by.clone())?;
    Ok(MatrixField { mx, my, form: FieldForm::Twisted, origin: field.origin, pair: field.pair.clone() })
}

/// `M_X = M_Y = M(x + y)` for a polynomial matrix `M(t)` written in `x`.
pub fn inflation(m: &Mat2<BiPoly>) -> Result<MatrixField, FieldError> {
    if !m.m.iter().flatten().all(|p| p.is_univariate_in(Var::X)) {
        return Err(FieldError::NotUnivariate);
    }
    let s = BiPoly::x() + BiPoly::y();
    let mm = m.map(|p| p.substitute(&s, &BiPoly::y()));
    check_conservative(&mm, &mm)?;
    Ok(MatrixField { mx: mm.clone(), my: mm, form: FieldForm::General, origin: (0, 0), pair: None })
}

/// `M_X = fx(x I, B)` and `M_Y = fy(y I, B)` for polynomials `fx(u, v)`, `fy(u, v)`
/// written with `u` as `x` and `v` as `y`.
pub fn commutative(fx: &BiPoly, fy: &BiPoly, b: &Mat2<BigRational>) -> Result<MatrixField, FieldError> {
    let bp = b.map(|c| BiPoly::constant(c.clone()));
    let eval = |p: &BiPoly, var: Var| -> Mat2<BiPoly> {
        let mut acc = Mat2::<BiPoly>::zero();
        let mut bpow: Vec<Mat2<BiPoly>> = vec![Mat2::identity()];
        for ((i, j), c) in p.terms() {
            while bpow.len() <= *j as usize {
                let next = bpow.last().map(|m| m.mul(&bp)).unwrap_or_else(Mat2::identity);
                bpow.push(next);
            }
            let scalar = BiPoly::var(var).pow(*i).scale(c);
            acc = acc.add(&bpow[*j as usize].scale(&scalar));
        }
        acc
    };
    let mx = eval(fx, Var::X);
    let my = eval(fy, Var::Y);
    check_conservative(&mx, &my)?;
    Ok(MatrixField { mx, my, form: FieldForm::General, origin: (0, 0), pair: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Right,
    Up,
}

/// A monotone lattice path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePath {
    pub start: (i64, i64),
    pub steps: Vec<Step>,
}

impl LatticePath {
    /// Right steps first, then up steps.
    pub fn canonical(start: (i64, i64), end: (i64, i64)) -> Self {
        let mut steps = vec![Step::Right; (end.0 - start.0).max(0) as usize];
        steps.extend(std::iter::repeat(Step::Up).take((end.1 - start.1).max(0) as usize));
        Self { start, steps }
    }

    pub fn end(&self) -> (i64, i64) {
        self.steps.iter().fold(self.start, |(x, y), s| match s {
            Step::Right => (x + 1, y),
            Step::Up => (x, y + 1),
        })
    }
}

impl MatrixField {
    pub fn mx_at(&self, x: i64, y: i64) -> Mat2<BigRational> {
        eval_mat(&self.mx, x, y)
    }

    pub fn my_at(&self, x: i64, y: i64) -> Mat2<BigRational> {
        eval_mat(&self.my, x, y)
    }

    /// Re-checks the defining identity.
    pub fn verify(&self) -> Result<(), FieldError> {
        check_conservative(&self.mx, &self.my)
    }
}

/// Product of the field matrices along a monotone path.
pub fn potential(field: &MatrixField, path: &LatticePath) -> Result<Mat2<BigRational>, FieldError> {
    let (mut x, mut y) = path.start;
    let mut acc = Mat2::identity();
    for s in &path.steps {
        let (m, which) = match s {
            Step::Right => (field.mx_at(x, y), "M_X"),
            Step::Up => (field.my_at(x, y), "M_Y"),
        };
        if m.det().is_zero() {
            return Err(FieldError::Singular { which, x, y });
        }
        acc = acc.mul(&m);
        match s {
            Step::Right => x += 1,
            Step::Up => y += 1,
        }
    }
    Ok(acc)
}

/// The JSON field-definition document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDefinition {
    pub f: String,
    pub fbar: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_offset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[i64; 2]>,
}

impl FieldDefinition {
    pub fn from_pair(pair: &ConjugatePair) -> Self {
        Self {
            f: pair.f.to_string(),
            fbar: pair.fbar.to_string(),
            split_offset: (!pair.split_offset.is_zero()).then(|| pair.split_offset.to_string()),
            origin: None,
        }
    }

    /// Parses, validates, and applies the origin shift.
    pub fn to_pair(&self) -> Result<ConjugatePair, FieldError> {
        let f = parse_poly(&self.f)?;
        let fbar = parse_poly(&self.fbar)?;
        let offset = match &self.split_offset {
            None => BigRational::zero(),
            Some(s) => parse_rational(s).ok_or_else(|| FieldError::BadRational(s.clone()))?,
        };
        let pair = validate_pair_with_offset(&f, &fbar, &offset)?;
        match self.origin {
            Some([a, b]) if (a, b) != (0, 0) => pair.translate(a, b),
            _ => Ok(pair),
        }
    }
}

/// Named example pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Zeta3,
    Zeta2,
    Ln2,
    E,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Zeta3, Preset::Zeta2, Preset::Ln2, Preset::E];

    pub fn parse(s: &str) -> Result<Self, FieldError> {
        match s.to_ascii_lowercase().as_str() {
            "zeta3" => Ok(Preset::Zeta3),
            "zeta2" => Ok(Preset::Zeta2),
            "ln2" => Ok(Preset::Ln2),
            "e" => Ok(Preset::E),
            _ => Err(FieldError::UnknownPreset(s.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Zeta3 => "zeta3",
            Preset::Zeta2 => "zeta2",
            Preset::Ln2 => "ln2",
            Preset::E => "e",
        }
    }

    pub fn definition(self) -> FieldDefinition {
        let (f, fbar) = match self {
            Preset::Zeta3 => ("x^3 + 2*x^2*y + 2*x*y^2 + y^3", "-x^3 + 2*x^2*y - 2*x*y^2 + y^3"),
            Preset::Zeta2 => ("2*x^2 + 2*x*y + y^2", "-2*x^2 + 2*x*y - y^2"),
            Preset::Ln2 => ("x + y", "x - y"),
            Preset::E => ("x + y", "1"),
        };
        FieldDefinition { f: f.into(), fbar: fbar.into(), split_offset: None, origin: None }
    }

    pub fn pair(self) -> ConjugatePair {
        self.definition().to_pair().expect("preset pairs are valid")
    }

    /// The constant the field is associated with.
    pub fn constant(self) -> crate::constants::Constant {
        use crate::constants::{Builtin, Constant};
        match self {
            Preset::Zeta3 => Constant::Builtin(Builtin::Zeta3),
            Preset::Zeta2 => Constant::Builtin(Builtin::PiSquaredOver12),
            Preset::Ln2 => Constant::Builtin(Builtin::Ln2),
            Preset::E => Constant::Builtin(Builtin::EMinusOne),
        }
    }
}

/// Rows of the degree-2 family table, parameterised by `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree2Row {
    /// `fbar(x,y) = -f(-x,y)`
    NegReflectX,
    /// `fbar(x,y) = f(-x,y)`
    ReflectX,
    /// `fbar(x,y) = f(x,-y)`
    ReflectY,
    /// `fbar(x,y) = -f(x,-y)`
    NegReflectY,
}

impl Degree2Row {
    pub const ALL: [Degree2Row; 4] = [Degree2Row::NegReflectX, Degree2Row::ReflectX, Degree2Row::ReflectY, Degree2Row::NegReflectY];

    /// Applies the row's linear map to a polynomial.
    pub fn apply(self, g: &BiPoly) -> BiPoly {
        match self {
            Degree2Row::NegReflectX => -g.reflect_x(),
            Degree2Row::ReflectX => g.reflect_x(),
            Degree2Row::ReflectY => g.reflect_y(),
            Degree2Row::NegReflectY => -g.reflect_y(),
        }
    }

    pub fn f(self, c: i64) -> BiPoly {
        let s = match self {
            Degree2Row::NegReflectX => format!("x^2 + x*y + y^2/2 + {c}*(x + y)"),
            Degree2Row::ReflectX => format!("x^2 + 2*x*y + 2*y^2 + {c}*(x + 2*y)"),
            Degree2Row::ReflectY => format!("x^2 + 2*x*y + 2*y^2 + {c}*(x + y)"),
            Degree2Row::NegReflectY => format!("(2*x^2 + 2*x*y + y^2 + {c}*(2*x + y))/2"),
        };
        parse_poly(&s).expect("static polynomial")
    }

    pub fn pair(self, c: i64) -> Result<ConjugatePair, FieldError> {
        let f = self.f(c);
        validate_pair(&f, &self.apply(&f))
    }
}

/// The degree-3 family with `fbar(x,y) = f(-x,y)`; `c = 0` is the ζ(3) pair.
pub fn degree3_family(c: i64) -> Result<ConjugatePair, FieldError> {
    let s = format!("x^3 + 2*x^2*(y - {c}) + 2*x*(y - {c})^2 + (y - {c})^3 - (x + y - {c})*{c}^2");
    let f = parse_poly(&s)?;
    validate_pair(&f, &f.reflect_x())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BiPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn zeta3_pair_data() {
        let pair = Preset::Zeta3.pair();
        assert_eq!(pair.ffbar, p("y^6 - x^6"));
        assert_eq!(pair.bx, p("-x^6"));
        assert_eq!(pair.by, p("y^6"));
        assert_eq!(pair.a, p("x^3 + (1+x)^3 + 2*y*(y-1)*(2*x+1)"));
        assert_eq!(pair.a.eval_i64(1, 1), rat(9));
        assert_eq!(pair.f.eval_i64(2, 1), rat(21));
        assert!(!pair.is_degenerate());
        assert!(pair.has_axis_split());
    }

    #[test]
    fn linear_pairs() {
        let ln2 = Preset::Ln2.pair();
        assert_eq!(ln2.bx, p("x^2"));
        assert_eq!(ln2.a, p("2*y - 1"));
        let e = Preset::E.pair();
        let field = e.cf_field().unwrap();
        assert_eq!(field.mx, Mat2::new(BiPoly::zero(), p("x"), BiPoly::one(), p("x + y - 1")));
        let deg = validate_pair(&p("x + y"), &p("y - x")).unwrap();
        assert!(deg.is_degenerate());
        assert_eq!(deg.a, p("2*x + 1"));
        assert!(deg.cf_field().is_ok());
    }

    #[test]
    fn rejects_bad_pairs() {
        match validate_pair(&p("x + y"), &p("x*y")) {
            Err(FieldError::QuadraticCondition { monomials }) => assert!(monomials.contains(&(2, 1))),
            other => panic!("{other:?}"),
        }
        assert!(matches!(validate_pair(&p("x"), &p("x")), Err(FieldError::LinearCondition { .. })));
        assert!(matches!(validate_pair(&p("y"), &p("y")), Err(FieldError::ZeroB)));
    }

    #[test]
    fn quadratic_condition_message_names_monomials() {
        let err = validate_pair(&p("x + y"), &p("x*y")).unwrap_err();
        assert!(err.to_string().contains("x^2*y"));
    }

    #[test]
    fn cf_and_twisted_examples() {
        let pair = Preset::Zeta3.pair();
        let cf = pair.cf_field().unwrap();
        assert_eq!(cf.my_at(1, 1), Mat2::new(rat(0), rat(-1), rat(1), rat(6)));
        assert_eq!(cf.mx_at(1, 1), Mat2::new(rat(0), rat(-1), rat(1), rat(9)));
        assert_eq!(cf.mx_at(2, 1).m[0][1], rat(-64));
        let tw = twist(&cf).unwrap();
        assert_eq!(tw.mx.m[1][0], p("-(x+1)^6"));
        assert_eq!(eval_mat(&tw.mx, 2, 5).det(), rat(729));
        assert!(twist(&tw).is_err());
    }

    #[test]
    fn dual_examples() {
        let z3 = Preset::Zeta3.pair();
        assert_eq!(z3.dual().unwrap(), z3);
        let z2 = Preset::Zeta2.pair();
        let d = z2.dual().unwrap();
        assert_eq!(d.f, p("x^2 + 2*x*y + 2*y^2"));
        assert_eq!(d.a, p("(2*y - 1)*(2*x + 1)"));
        assert_eq!(d.bx, p("x^4"));
        assert_eq!(d.dual().unwrap(), z2);
    }

    #[test]
    fn translation() {
        let z3 = Preset::Zeta3.pair();
        assert_eq!(z3.translate(0, 0).unwrap(), z3);
        let t = z3.translate(1, 0).unwrap();
        assert_eq!(t.bx, p("-(x+1)^6"));
        assert!(t.twisted_field().is_ok());
    }

    #[test]
    fn trivial_constructions() {
        let m = Mat2::new(BiPoly::zero(), BiPoly::one(), BiPoly::one(), BiPoly::x());
        assert!(inflation(&m).is_ok());
        let id = Mat2::<BigRational>::identity();
        let u = BiPoly::x();
        let c = commutative(&u, &u, &id).unwrap();
        assert_eq!(c.mx, Mat2::diag(BiPoly::x(), BiPoly::x()));
        let tau = Mat2::<BigRational>::swap_matrix();
        assert!(commutative(&p("x + y"), &p("x*y"), &tau).is_ok());
    }

    #[test]
    fn non_conservative_detected() {
        let mx = Mat2::new(BiPoly::zero(), BiPoly::one(), BiPoly::one(), p("y"));
        let my = Mat2::new(BiPoly::one(), BiPoly::zero(), p("x"), BiPoly::one());
        assert!(matches!(check_conservative(&mx, &my), Err(FieldError::NotConservative { .. })));
    }

    #[test]
    fn potentials() {
        let f = Preset::Zeta3.pair().twisted_field().unwrap();
        assert_eq!(potential(&f, &LatticePath { start: (1, 1), steps: vec![] }).unwrap(), Mat2::identity());
        let ru = LatticePath { start: (1, 1), steps: vec![Step::Right, Step::Up] };
        let ur = LatticePath { start: (1, 1), steps: vec![Step::Up, Step::Right] };
        assert_eq!(potential(&f, &ru).unwrap(), potential(&f, &ur).unwrap());
        let cf = Preset::Zeta3.pair().cf_field().unwrap();
        let bad = LatticePath { start: (0, 1), steps: vec![Step::Right] };
        assert_eq!(potential(&cf, &bad), Err(FieldError::Singular { which: "M_X", x: 0, y: 1 }));
    }

    #[test]
    fn families_validate() {
        for c in 0..=2 {
            for row in Degree2Row::ALL {
                row.pair(c).unwrap().twisted_field().unwrap();
            }
        }
        for c in 0..=1 {
            let pair = degree3_family(c).unwrap();
            assert_eq!(pair.bx, p(&format!("-x^2*(x-{c})^2*(x+{c})^2")));
            pair.twisted_field().unwrap();
        }
        assert_eq!(degree3_family(0).unwrap(), Preset::Zeta3.pair());
    }

    #[test]
    fn degree2_rows_match_table_columns() {
        for c in 0..=2i64 {
            let expect = [
                (Degree2Row::NegReflectX, format!("(x+1)^2 + x^2 + y*(y-1) + {c}*(2*y-1)"), format!("-x^2*(x^2 - {c}^2)")),
                (Degree2Row::ReflectX, format!("(2*x+1)*(2*y-1+{c})"), format!("x^2*(x^2 - {c}^2)")),
                (Degree2Row::ReflectY, format!("(2*x+1+{c})*(2*y-1)"), format!("x^2*(x+{c})^2")),
                (Degree2Row::NegReflectY, format!("{c}*(2*x+1) + x^2 + (x+1)^2 + y*(y-1)"), format!("-x^2*(x+{c})^2")),
            ];
            for (row, a, b) in expect {
                let pair = row.pair(c).unwrap();
                assert_eq!(pair.a, p(&a), "{row:?} c={c}");
                assert_eq!(pair.bx, p(&b), "{row:?} c={c}");
            }
        }
    }

    #[test]
    fn definition_round_trip() {
        let d = Preset::Zeta3.definition();
        let json = serde_json::to_string(&d).unwrap();
        let back: FieldDefinition = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_pair().unwrap(), Preset::Zeta3.pair());
        let canon = FieldDefinition::from_pair(&back.to_pair().unwrap());
        assert_eq!(FieldDefinition::from_pair(&canon.to_pair().unwrap()), canon);
    }
}
