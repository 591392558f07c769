use cmfield::cf::convergent_stream;
use cmfield::exact::{BiPoly, Var};
use cmfield::field::{MatrixField, Preset};
use cmfield::lattice::{
    additive_form_check, diagonal_pcf, diagonal_records, pq_table, product_ratio, row_polys, v_sequence, RatioClass,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn zeta3() -> MatrixField {
    Preset::Zeta3.pair().twisted_field().unwrap()
}

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[test]
fn table_matches_row_polynomials() {
    let f = zeta3();
    let t = pq_table(&f, 12, 12).unwrap();
    for n in 0..=12 {
        let rows = row_polys(&f, n).unwrap();
        for m in 1..=12i64 {
            // Column prefix applied by hand: prod_{k<m} M_Y(0,k).
            let mut pre = cmfield::exact::Mat2::<BigRational>::identity();
            for k in 1..m {
                pre = pre.mul(&f.my_at(0, k));
            }
            let col = [rows.p.eval(&BigRational::zero(), &r(m)), rows.q.eval(&BigRational::zero(), &r(m))];
            let v = pre.apply(&col);
            let rec = t.get(n, m as usize).unwrap();
            assert_eq!(&v[0] / &v[1], BigRational::new(rec.p.clone(), rec.q.clone()), "n={n} m={m}");
        }
    }
}

#[test]
fn additive_forms_hold_on_small_grid() {
    let f = zeta3();
    for n in 1..=10 {
        for m in 1..=10 {
            let rep = additive_form_check(&f, n, m).unwrap();
            assert!(rep.all_hold(), "n={n} m={m}: {rep:?}");
        }
    }
}

#[test]
fn normalized_denominators_grow_tenfold() {
    let s = v_sequence(&zeta3(), 50).unwrap();
    assert_eq!(s.v.len(), 51);
    for n in 3..50 {
        assert!(&s.v[n + 1] >= &(BigInt::from(10) * &s.v[n]), "n={n}");
    }
    assert!(s.tenfold_growth);
}

#[test]
fn diagonal_cf_matches_table() {
    let f = zeta3();
    let d = diagonal_pcf(&f).unwrap();
    let conv = convergent_stream(&d.cf(), 16).unwrap();
    let recs = diagonal_records(&f, 15).unwrap();
    let t = pq_table(&f, 15, 16).unwrap();
    for n in 1..=15 {
        let v = d.prefix.apply(&[conv[n].p.clone(), conv[n].q.clone()]);
        let via_cf = &v[0] / &v[1];
        assert_eq!(via_cf, BigRational::new(recs[n].0.clone(), recs[n].1.clone()), "n={n}");
        let cell = t.get(n, n + 1).unwrap();
        assert_eq!(via_cf, BigRational::new(cell.p.clone(), cell.q.clone()), "n={n}");
    }
}

#[test]
fn rows_are_symmetric_under_reflection() {
    let f = zeta3();
    let reflect = |p: &BiPoly| p.substitute(&BiPoly::x(), &(BiPoly::one() - BiPoly::y()));
    for n in 0..=8 {
        let rows = row_polys(&f, n).unwrap();
        assert_eq!(reflect(&rows.q), rows.q, "q n={n}");
        assert_eq!(reflect(&rows.p), rows.p, "p n={n}");
        assert!(rows.q.deg_y().map_or(true, |d| d as usize <= 2 * n));
    }
}

#[test]
fn equal_subleading_products_stay_bounded() {
    // Monic cubics sharing the x^2 coefficient.
    let cases = [
        ("x^3 + 2*x^2 + 5", "x^3 + 2*x^2 - 3*x + 1"),
        ("x^2 + x + 1", "x^2 + x - 4"),
        ("x^3 - x^2 + 7*x", "x^3 - x^2 + 2"),
    ];
    for (a, b) in cases {
        let f = cmfield::exact::parse::parse_poly(a).unwrap();
        let g = cmfield::exact::parse::parse_poly(b).unwrap();
        assert!(f.is_univariate_in(Var::X));
        let rep = product_ratio(&f, &g);
        assert_eq!(rep.class, RatioClass::Bounded, "{a} / {b}");
        let vals: Vec<f64> = rep.partial_products.iter().map(|p| p.1).collect();
        let (lo, hi) = vals.iter().fold((f64::MAX, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(lo > 0.0 && hi / lo < 10.0, "{a} / {b}: {vals:?}");
    }
}
