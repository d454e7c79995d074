use k3lat::error::Error;
use k3lat::exact::IntMatrix;
use k3lat::hilb2::{
    ample_model_verdict, contains_class, line_free_excludes, minus10_obstruction_grams, minus10_obstruction_grams_bounded,
    minus2_wall_scan, minus2_wall_scan_bounded, obstruction_report,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn entries(g: &IntMatrix) -> (i64, i64, i64) {
    let e = g.to_i64_rows().unwrap();
    (e[0][0], e[0][1], e[1][1])
}

#[test]
fn doubling_the_box_adds_nothing() {
    for h in (4..=20).step_by(2) {
        let grams = minus10_obstruction_grams(h).unwrap();
        assert_eq!(minus10_obstruction_grams_bounded(h, 100).unwrap(), grams, "h² = {h}");
        assert_eq!(minus10_obstruction_grams_bounded(h, 200).unwrap(), grams, "h² = {h}");
        let walls = minus2_wall_scan(h).unwrap();
        assert_eq!(minus2_wall_scan_bounded(h, 100).unwrap(), walls, "h² = {h}");
        assert_eq!(minus2_wall_scan_bounded(h, 200).unwrap(), walls, "h² = {h}");
    }
}

#[test]
fn degree_two_grows_with_the_box() {
    assert!(matches!(minus10_obstruction_grams(2), Err(Error::Unbounded(_))));
    assert!(matches!(minus2_wall_scan(2), Err(Error::Unbounded(_))));
    let small = minus10_obstruction_grams_bounded(2, 20).unwrap();
    let large = minus10_obstruction_grams_bounded(2, 40).unwrap();
    assert!(large.len() > small.len());
    assert!(small.iter().all(|g| large.contains(g)));
}

#[test]
fn minus10_grams_have_witnesses() {
    for h in (4..=20).step_by(2) {
        for g in minus10_obstruction_grams(h).unwrap() {
            let (x_sq, h_x, hh) = entries(&g);
            assert_eq!(hh, h);
            assert!(x_sq * hh - h_x * h_x < 0, "Hodge index fails for {g:?}");
            assert_eq!(x_sq % 2, 0);
            let witnessed = (-60i64..=60).any(|l| {
                (1i64..=121).any(|k| {
                    let s = 2 * l + 1;
                    let num = 2 * (l * l + l - 1);
                    s % k == 0 && num % (k * k) == 0 && num / (k * k) == x_sq && (s / k).abs() == h_x
                })
            });
            assert!(witnessed, "no (k, l) for {g:?}");
        }
    }
}

#[test]
fn wall_solutions_satisfy_their_system() {
    for h in (4..=20).step_by(2) {
        let scan = minus2_wall_scan(h).unwrap();
        for w in scan.all() {
            assert!(w.k > 0 && w.l > 0);
            assert_eq!(w.x_sq * w.k * w.k, 2 * (w.l * w.l - 1));
            assert_eq!(BigRational::from_integer(w.h_dot_x.into()) * BigInt::from(w.k), w.t.clone() * BigInt::from(2 * w.l));
            assert!(w.t > BigRational::from_integer(0.into()) && w.t <= BigRational::from_integer(1.into()));
            assert_eq!(entries(&w.gram), (w.x_sq, w.h_dot_x, h));
            assert!(w.x_sq * h - w.h_dot_x * w.h_dot_x < 0);
        }
        for w in &scan.interior {
            assert!(w.t < BigRational::from_integer(1.into()));
        }
    }
}

#[test]
fn quartic_verdicts() {
    assert!(ample_model_verdict(4, true, &|_| false).unwrap());
    assert!(!ample_model_verdict(4, false, &|_| false).unwrap());
    assert!(ample_model_verdict(4, false, &|_| true).unwrap());
    let report = obstruction_report(4).unwrap();
    assert!(report.line_class_needed);
    for g in report.grams() {
        assert!(line_free_excludes(&g).unwrap());
    }
}

proptest! {
    #[test]
    fn contains_class_agrees_with_search(a in -12i64..=12, b in -12i64..=12, h in 1i64..=10, norm in -10i64..=4, degree in 0i64..=4) {
        let c = 2 * h;
        prop_assume!(a * c - b * b < 0);
        let g = IntMatrix::from_i64(&[vec![a, b], vec![b, c]]);
        let found = (-40i64..=40).any(|p| (-40i64..=40).any(|q| {
            a * p * p + 2 * b * p * q + c * q * q == norm && p * b + q * c == degree
        }));
        let decided = contains_class(&g, norm, degree).unwrap();
        if found {
            prop_assert!(decided);
        }
    }
}
