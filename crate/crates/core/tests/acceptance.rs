//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

use std::time::{Duration, Instant};

use cmfield::cf::{convergent_stream, euler_partial, Delta, EulerSpec};
use cmfield::constants::{compute_builtin, Builtin, Constant, PrecisionLadder};
use cmfield::exact::intpoly::{divisibility_test, from_binomial_basis};
use cmfield::exact::parse::parse_poly;
use cmfield::exact::{lcm_upto, BiPoly, Mat2};
use cmfield::field::{
    commutative, degree3_family, inflation, potential, ConjugatePair, Degree2Row, LatticePath, MatrixField, Preset,
    Step,
};
use cmfield::lattice::{
    certificate, diagonal_pcf, factorial_reduction_audit, heatmap, line_limit, v_sequence, AuditKind,
};
use cmfield::search::{complete_my, enumerate_pairs, report_contains, SearchSpace};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_cf01;

/// ζ(3) to 60 places.
const ZETA3_DIGITS: &str = "1.202056903159594285399738161511449990764986292340498881792271555";

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<String, String>,
}

/// Criteria known to fail; each must still fail, so a fix is noticed.
const EXPECTED_FAILURES: &[u32] = &[3, 8];

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn zeta3_twisted() -> MatrixField {
    Preset::Zeta3.pair().twisted_field().expect("zeta3 field")
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parse_decimal(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap();
    let den = BigInt::from(10).pow(frac.len() as u32);
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(num, den)
}

fn pow10(e: i32) -> BigRational {
    let t = BigRational::from_integer(BigInt::from(10).pow(e.unsigned_abs()));
    if e < 0 {
        t.recip()
    } else {
        t
    }
}

fn golden_sequence() -> Result<String, String> {
    let v = v_sequence(&zeta3_twisted(), 4).map_err(|e| e.to_string())?;
    let want: Vec<BigInt> = [1, 5, 73, 1445, 33001].iter().map(|&x| BigInt::from(x)).collect();
    ensure(v.v == want, || format!("got {:?}", v.v))?;
    Ok("v_0..v_4 = 1, 5, 73, 1445, 33001".into())
}

fn apery_recurrence() -> Result<String, String> {
    let pcf = diagonal_pcf(&zeta3_twisted()).map_err(|e| e.to_string())?;
    let k = BiPoly::x();
    let one = BiPoly::one();
    let k1 = &k + &one;
    let expected = (k.pow(3) + k1.pow(3)).scale(&r(17)) - (k.scale(&r(2)) + one).scale(&r(12));
    ensure(pcf.a == expected, || format!("derived a(k) = {}", pcf.a))?;
    ensure(pcf.a == parse_poly("34*x^3 + 51*x^2 + 27*x + 5").unwrap(), || format!("derived a(k) = {}", pcf.a))?;
    Ok(format!("derived F(k) = {}", pcf.a.display_with("k", "y")))
}

fn growth_rate() -> Result<String, String> {
    let v = v_sequence(&zeta3_twisted(), 31).map_err(|e| e.to_string())?;
    let ratio = BigRational::new(v.v[31].clone(), v.v[30].clone()).to_f64().unwrap();
    let target = (1.0 + 2f64.sqrt()).powi(4);
    let rel = (ratio / target - 1.0).abs();
    ensure(rel < 0.01, || format!("v_31/v_30 = {ratio}, relative gap {rel:.3e}"))?;
    Ok(format!("v_31/v_30 = {ratio:.6}, (1+√2)^4 = {target:.6}, relative gap {rel:.2e}"))
}

fn apery_value() -> Result<String, String> {
    let pcf = diagonal_pcf(&zeta3_twisted()).map_err(|e| e.to_string())?;
    ensure(pcf.prefix == Mat2::new(r(0), r(6), r(1), r(5)), || format!("prefix {}", pcf.prefix))?;
    let conv = convergent_stream(&pcf.cf(), 61).map_err(|e| e.to_string())?;
    let c = &conv[61];
    let tail = &c.p / &c.q;
    let value = r(6) / (r(5) + tail);

    let reference = compute_builtin(Builtin::Zeta3, 160);
    ensure(reference.radius < pow10(-40), || "reference radius above 1e-40".into())?;
    let pinned = parse_decimal(ZETA3_DIGITS);
    ensure((&reference.value - &pinned).abs() < pow10(-40), || "builtin disagrees with pinned digits".into())?;
    let err = (&value - &reference.value).abs();
    ensure(err < pow10(-30), || format!("|value - zeta(3)| = {:.3e}", err.to_f64().unwrap()))?;
    Ok(format!("|6/(5 + K_1^60) - zeta(3)| = {:.3e}", err.to_f64().unwrap()))
}

fn factorial_reduction() -> Result<String, String> {
    let field = zeta3_twisted();
    let n_max = 25usize;
    let audit = factorial_reduction_audit(&field, n_max, Some(3), None).map_err(|e| e.to_string())?;
    let relevant: Vec<_> = audit
        .violations
        .iter()
        .filter(|v| matches!(v.kind, AuditKind::QDivisible | AuditKind::DiagonalGcd))
        .collect();
    ensure(relevant.is_empty(), || format!("audit violations: {relevant:?}"))?;

    // Direct route: row products by hand and diagonal potentials along an up-then-right path.
    for m in -(n_max as i64)..=(n_max as i64 + 1) {
        let mut acc = Mat2::<BigRational>::identity();
        for n in 0..=n_max {
            if m >= -(n as i64) && m <= n as i64 + 1 {
                let q = &acc.m[1][1];
                ensure(q.is_integer(), || format!("q_{n}({m}) not integral"))?;
                ensure(q.to_integer().is_multiple_of(&factorial(n as u64).pow(3)), || format!("(n!)^3 ∤ q_{n}({m})"))?;
            }
            acc = acc.mul(&field.mx_at(n as i64, m));
        }
    }
    for n in 0..=n_max {
        let mut steps = vec![Step::Up; n];
        steps.extend(std::iter::repeat(Step::Right).take(n));
        let pot = potential(&field, &LatticePath { start: (0, 1), steps }).map_err(|e| e.to_string())?;
        let (p, q) = (&pot.m[0][1], &pot.m[1][1]);
        ensure(p.is_integer() && q.is_integer(), || format!("P, Q at n={n} not integral"))?;
        let g = p.to_integer().gcd(&q.to_integer());
        let d = (factorial(n as u64).pow(2) / lcm_upto(n as u64)).pow(3);
        ensure(g.is_multiple_of(&d), || format!("divisor fails at n={n}"))?;
    }
    Ok(format!("{} audit checks, {} other-kind notes; direct route agrees", audit.checks, audit.violations.len()))
}

fn shift(p: &BiPoly, dx: i64, dy: i64) -> BiPoly {
    p.substitute(&(BiPoly::x() + BiPoly::from_int(dx)), &(BiPoly::y() + BiPoly::from_int(dy)))
}

fn shift_mat(m: &Mat2<BiPoly>, dx: i64, dy: i64) -> Mat2<BiPoly> {
    m.map(|p| shift(p, dx, dy))
}

fn conservative(f: &MatrixField) -> bool {
    let lhs = f.mx.mul(&shift_mat(&f.my, 1, 0));
    let rhs = f.my.mul(&shift_mat(&f.mx, 0, 1));
    lhs.sub(&rhs).m.iter().flatten().all(BiPoly::is_zero)
}

fn pair_identities(name: &str, pair: &ConjugatePair) -> Result<(), String> {
    let cf = pair.cf_field().map_err(|e| format!("{name}: {e}"))?;
    let tw = pair.twisted_field().map_err(|e| format!("{name}: {e}"))?;
    ensure(conservative(&cf), || format!("{name}: cf form not conservative"))?;
    ensure(conservative(&tw), || format!("{name}: twisted form not conservative"))?;
    ensure((cf.mx.det() + pair.bx.clone()).is_zero(), || format!("{name}: det M_X^cf"))?;
    ensure(cf.my.det() == pair.by, || format!("{name}: det M_Y^cf"))?;
    ensure(tw.mx.det() == -shift(&pair.bx, 1, 0), || format!("{name}: det M_X twisted"))?;
    ensure(tw.my.det() == pair.by, || format!("{name}: det M_Y twisted"))?;
    ensure(&pair.bx + &pair.by == &pair.f * &pair.fbar, || format!("{name}: split"))?;
    Ok(())
}

fn field_identities() -> Result<String, String> {
    let mut count = 0;
    for p in [Preset::Zeta3, Preset::Ln2, Preset::E] {
        pair_identities(p.name(), &p.pair())?;
        count += 1;
    }
    for row in Degree2Row::ALL {
        for c in 0..=2 {
            let pair = row.pair(c).map_err(|e| format!("{row:?} C={c}: {e}"))?;
            pair_identities(&format!("{row:?} C={c}"), &pair)?;
            count += 1;
        }
    }
    for c in 0..=1 {
        let pair = degree3_family(c).map_err(|e| e.to_string())?;
        pair_identities(&format!("degree 3 C={c}"), &pair)?;
        count += 1;
    }
    let m = Mat2::new(BiPoly::zero(), BiPoly::one(), parse_poly("x^2").unwrap(), parse_poly("2*x + 1").unwrap());
    let inf = inflation(&m).map_err(|e| e.to_string())?;
    ensure(conservative(&inf), || "inflation".into())?;
    let b = Mat2::new(r(1), r(2), r(3), r(-1));
    let com = commutative(&parse_poly("x^2 + y").unwrap(), &parse_poly("x*y - 3").unwrap(), &b).map_err(|e| e.to_string())?;
    ensure(conservative(&com), || "commutative".into())?;
    Ok(format!("{count} conjugate pairs in both forms, inflation and commutative fields"))
}

fn random_path(rng: &mut ChaCha8Rng, start: (i64, i64), end: (i64, i64)) -> LatticePath {
    let (mut rx, mut uy) = ((end.0 - start.0) as usize, (end.1 - start.1) as usize);
    let mut steps = Vec::new();
    while rx + uy > 0 {
        if rng.gen_range(0..rx + uy) < rx {
            steps.push(Step::Right);
            rx -= 1;
        } else {
            steps.push(Step::Up);
            uy -= 1;
        }
    }
    LatticePath { start, steps }
}

fn path_independence() -> Result<String, String> {
    let field = zeta3_twisted();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut nontrivial = 0;
    for _ in 0..100 {
        let start = (rng.gen_range(1..=15), rng.gen_range(1..=15));
        let end = (rng.gen_range(start.0..=15), rng.gen_range(start.1..=15));
        let a = random_path(&mut rng, start, end);
        let b = random_path(&mut rng, start, end);
        if a.steps != b.steps {
            nontrivial += 1;
        }
        let pa = potential(&field, &a).map_err(|e| e.to_string())?;
        let pb = potential(&field, &b).map_err(|e| e.to_string())?;
        ensure(pa == pb, || format!("paths from {start:?} to {end:?} differ"))?;
    }
    Ok(format!("100 pairs equal ({nontrivial} with distinct step orders)"))
}

fn limits() -> Result<String, String> {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    let ln2 = Preset::Ln2.pair().twisted_field().unwrap();
    let target = (1.0 - 2f64.ln()) / 2f64.ln();
    let mut values = Vec::new();
    for m in 1..=4 {
        let l = line_limit(&ln2, m, 3000).map_err(|e| e.to_string())?;
        let v = l.cf_form.ok_or("ln2 row has no cf-form value")?;
        let err = (v - target).abs();
        notes.push(format!("ln2 m={m}: {v:.10} (err {err:.2e})"));
        if err >= 1e-4 {
            failures.push(format!("ln2 m={m} misses (1-ln2)/ln2 by {err:.2e}"));
        }
        values.push(v);
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let gap = (values[i] - values[j]).abs();
            if gap >= 1e-4 {
                failures.push(format!("ln2 rows {} and {} differ by {gap:.2e}", i + 1, j + 1));
            }
        }
    }
    let e = Preset::E.pair().twisted_field().unwrap();
    let le = line_limit(&e, 1, 40).map_err(|e| e.to_string())?;
    let ev = le.cf_form.ok_or("e row has no cf-form value")?;
    let e_err = (ev - 1.0 / (std::f64::consts::E - 1.0)).abs();
    notes.push(format!("e m=1: err {e_err:.2e}"));
    if e_err >= 1e-6 {
        failures.push(format!("e row 1 misses 1/(e-1) by {e_err:.2e}"));
    }
    let z = line_limit(&zeta3_twisted(), 2, 200).map_err(|e| e.to_string())?;
    let z_err = (z.row - (1.2020569031595942 - 1.0)).abs();
    notes.push(format!("zeta3 m=2: err {z_err:.2e}"));
    if z_err >= 1e-4 {
        failures.push(format!("zeta3 row 2 misses zeta(3)-1 by {z_err:.2e}"));
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn heatmap_shape() -> Result<String, String> {
    let ladder = PrecisionLadder::new(Constant::Builtin(Builtin::Zeta3));
    let hm = heatmap(&zeta3_twisted(), 30, 30, &ladder).map_err(|e| e.to_string())?;
    let finite = |n: usize, m: usize| match hm.delta(n, m) {
        Some(Delta::Finite(v)) => Ok(v),
        other => Err(format!("delta({n},{m}) = {other:?}")),
    };
    let mut row_max = f64::MIN;
    for n in 5..=30 {
        let d = finite(n, 1)?;
        ensure(d < 0.0, || format!("delta({n},1) = {d}"))?;
        row_max = row_max.max(d);
    }
    let mut diag_min = f64::MAX;
    for n in 10..=29 {
        let d = finite(n, n + 1)?;
        ensure(d > 0.0, || format!("delta({n},{}) = {d}", n + 1))?;
        diag_min = diag_min.min(d);
    }
    Ok(format!("max delta(n,1) for n>=5 is {row_max:.4}; min delta(n,n+1) for 10<=n<=29 is {diag_min:.4}"))
}

fn certificate_zeta3() -> Result<String, String> {
    let ladder = PrecisionLadder::new(Preset::Zeta3.constant());
    let cert = certificate(&zeta3_twisted(), &ladder, 40).map_err(|e| e.to_string())?;
    let rate = cert.error_rate.ok_or("no error rate")?;
    ensure(cert.verdict.as_str() == "supports-irrationality", || format!("verdict {}", cert.verdict.as_str()))?;
    ensure(rate > 0.4 && rate < 0.8, || format!("decay ratio {rate}"))?;
    Ok(format!("supports-irrationality, decay ratio {rate:.4}"))
}

fn random_upoly(rng: &mut ChaCha8Rng) -> BiPoly {
    let deg = rng.gen_range(0..=3u32);
    BiPoly::from_terms((0..=deg).map(|i| ((i, 0), r(rng.gen_range(-5..=5)))))
}

fn euler_identity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let mut done = 0;
    let mut checked = 0;
    let mut skipped = 0;
    while done < 50 {
        let spec = EulerSpec { h1: random_upoly(&mut rng), h2: random_upoly(&mut rng), f: random_upoly(&mut rng) };
        let depth = rng.gen_range(1..=12usize);
        let at = |p: &BiPoly, k: i64| p.eval_i64(k, 0);
        if (0..=depth as i64 + 1).any(|k| at(&spec.f, k).is_zero()) || (2..=depth as i64 + 1).any(|k| at(&spec.h2, k).is_zero()) {
            continue;
        }
        // A vanishing closed-form sum is an infinite convergent; such specs are out of scope.
        let closed: Result<Vec<_>, _> = (1..=depth).map(|k| euler_partial(&spec, k)).collect();
        let Ok(closed) = closed else {
            skipped += 1;
            continue;
        };
        // Terms and convergents by hand.
        let (mut p0, mut p1, mut q0, mut q1) = (r(1), r(0), r(0), r(1));
        for k in 1..=depth as i64 {
            let b = -(at(&spec.h1, k) * at(&spec.h2, k));
            let a = (at(&spec.f, k - 1) * at(&spec.h1, k) + at(&spec.f, k + 1) * at(&spec.h2, k + 1)) / at(&spec.f, k);
            let p2 = &a * &p1 + &b * &p0;
            let q2 = &a * &q1 + &b * &q0;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            ensure(!q1.is_zero(), || format!("zero denominator at k={k} with a finite closed form"))?;
            ensure(p1.clone() / &q1 == closed[k as usize - 1], || format!("mismatch at k={k} for {spec:?}"))?;
            checked += 1;
        }
        let cf = spec.generated_cf(depth).map_err(|e| e.to_string())?;
        let conv = convergent_stream(&cf, depth + 1).map_err(|e| e.to_string())?;
        ensure(conv[depth + 1].value(&cf.a0) == Some(&p1 / &q1), || "library stream disagrees".into())?;
        done += 1;
    }
    Ok(format!("50 specs, {checked} depths exact; {skipped} specs with an infinite convergent redrawn"))
}

fn binom(m: i64, n: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n as i64 {
        num *= BigInt::from(m - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

fn binomial_lemma() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let mut divisible = 0;
    for _ in 0..200 {
        let k: i64 = rng.gen_range(1..=50);
        let len = rng.gen_range(1..=7usize);
        let mult = rng.gen_bool(0.5);
        let a: Vec<i64> = (0..len).map(|_| rng.gen_range(-40..=40) * if mult { k } else { 1 }).collect();
        let p = from_binomial_basis(&a.iter().map(|&v| r(v)).collect::<Vec<_>>());
        let d = p.deg_x().map_or(0, |d| d as usize);
        let kk = BigInt::from(k);
        let value = |m: i64| -> BigInt { a.iter().enumerate().map(|(n, &c)| BigInt::from(c) * binom(m, n)).sum() };
        for m in -3..=3 {
            ensure(p.eval_i64(m, 0) == BigRational::from_integer(value(m)), || "synthesis disagrees".into())?;
        }
        let c1 = a.iter().all(|v| v % k == 0);
        let c2 = (-60..=60).all(|m| (value(m) % &kk).is_zero());
        let c3 = divisibility_test(&p, &kk, &BigInt::zero(), d + 1).map_err(|e| e.to_string())?;
        let m0 = rng.gen_range(-1000..=1000i64);
        let c4 = divisibility_test(&p, &kk, &BigInt::from(m0), d + 1).map_err(|e| e.to_string())?;
        ensure(c1 == c2 && c2 == c3 && c3 == c4, || format!("a={a:?} k={k}: {c1} {c2} {c3} {c4}"))?;
        divisible += c1 as usize;
    }
    Ok(format!("200 instances agree ({divisible} divisible)"))
}

fn search_recovery() -> Result<String, String> {
    let report = enumerate_pairs(&SearchSpace::new(2, 2)).map_err(|e| e.to_string())?;
    for row in Degree2Row::ALL {
        let target = row.pair(0).map_err(|e| e.to_string())?;
        ensure(report_contains(&report, &target, 6), || format!("{row:?} at C=0 not recovered"))?;
    }
    let cf = Preset::Zeta3.pair().cf_field().map_err(|e| e.to_string())?;
    let completion = complete_my(&cf.mx, 6, 3).map_err(|e| e.to_string())?;
    ensure(completion.contains(&cf.my), || "M_Y^cf not in the completion".into())?;
    Ok(format!(
        "{} pairs kept from {} raw; completion dimension {}",
        report.pairs.len(),
        report.raw_count,
        completion.basis.len()
    ))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "zeta(3) golden sequence", limit: Duration::from_secs(1), run: golden_sequence },
        Criterion { id: 2, name: "Apery recurrence polynomial", limit: Duration::from_secs(5), run: apery_recurrence },
        Criterion { id: 3, name: "growth rate", limit: Duration::from_secs(5), run: growth_rate },
        Criterion { id: 4, name: "Apery value", limit: Duration::from_secs(5), run: apery_value },
        Criterion { id: 5, name: "factorial reduction", limit: Duration::from_secs(120), run: factorial_reduction },
        Criterion { id: 6, name: "field identities", limit: Duration::from_secs(10), run: field_identities },
        Criterion { id: 7, name: "path independence", limit: Duration::from_secs(60), run: path_independence },
        Criterion { id: 8, name: "line limits", limit: Duration::from_secs(30), run: limits },
        Criterion { id: 9, name: "heat-map shape", limit: Duration::from_secs(300), run: heatmap_shape },
        Criterion { id: 10, name: "certificate", limit: Duration::from_secs(120), run: certificate_zeta3 },
        Criterion { id: 11, name: "Euler identity", limit: Duration::from_secs(10), run: euler_identity },
        Criterion { id: 12, name: "binomial lemma", limit: Duration::from_secs(10), run: binomial_lemma },
        Criterion { id: 13, name: "search recovery", limit: Duration::from_secs(60), run: search_recovery },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    let mut passed = 0;
    let mut ran = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || c.id.to_string() == *f) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit")),
            Err(e) => (false, e),
        };
        let expected_fail = EXPECTED_FAILURES.contains(&c.id);
        println!(
            "[{}] {:>2} {} ({:.2}s, limit {}s): {}{}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            detail,
            if !ok && expected_fail { " [known failure]" } else { "" }
        );
        passed += ok as usize;
        if ok == expected_fail {
            unexpected.push(c.id);
        }
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
