mod common;

use k3lat::classify::{
    char_poly_3, classify, good_isometries, polarization_and_transcendental, restrict, ClassificationRow, ClassifyOptions,
};
use k3lat::dataset::Dataset;
use k3lat::exact::IntMatrix;
use k3lat::glue::Mode;
use k3lat::table::run_table;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use common::*;

const SMALL_GROUPS: [&str; 4] = ["3^4:A6", "L2(11)", "A7", "(Z3xA5):Z2"];

fn signature(rows: &[ClassificationRow]) -> Vec<(BigInt, BigInt, u64, IntMatrix, String)> {
    let mut out: Vec<_> =
        rows.iter().map(|r| (r.h_sq.clone(), r.h_div.clone(), r.m, r.t_gram.clone(), r.k3_flag.to_string())).collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_is_basis_independent(seed in any::<u64>(), which in 0usize..SMALL_GROUPS.len()) {
        let mut r = rng(seed);
        let g = Dataset::builtin().group(SMALL_GROUPS[which]).unwrap().clone();
        let data = g.coinvariant_data().unwrap();
        let lattices = g.invariant_lattices().unwrap();
        let moved: Vec<_> = lattices
            .iter()
            .map(|n| n.change_basis(&IntMatrix::from_i64(&random_unimodular(&mut r, 3))).unwrap())
            .collect();
        let opts = ClassifyOptions::default();
        let a = classify(&lattices, &data, &g.name, &opts).unwrap();
        let b = classify(&moved, &data, &g.name, &opts).unwrap();
        prop_assert_eq!(signature(&a.rows), signature(&b.rows));
    }
}

#[test]
fn good_isometries_on_fixtures() {
    for g in &Dataset::builtin().groups {
        for n in g.invariant_lattices().unwrap() {
            for f in good_isometries(&n).unwrap() {
                let ord = f.order(12).unwrap();
                assert!(f.pow(ord).is_identity());
                assert!((1..ord).all(|k| !f.pow(k).is_identity()));
                let (c2, det) = char_poly_3(f.matrix()).unwrap();
                assert_eq!(c2, f.trace());
                assert_eq!(det, BigInt::from(1));

                let pol = polarization_and_transcendental(&n, &f).unwrap();
                assert_eq!(f.apply(&pol.h), pol.h);
                assert_eq!(n.norm(&pol.h), pol.h_sq);
                assert!(pol.h_sq.is_positive());
                for t in pol.t_basis.vectors() {
                    assert!(n.product(&pol.h, &t).is_zero());
                }
                let (a, b, c) = (&pol.t_gram[(0, 0)], &pol.t_gram[(0, 1)], &pol.t_gram[(1, 1)]);
                assert!(!b.is_negative() && BigInt::from(2) * b <= *a && a <= c);
                assert!((a * c - b * b).is_positive());

                // f permutes the isotropic lines of T ⊗ C trivially
                let ft = restrict(&f, &pol.t_basis).unwrap();
                assert_eq!(ft.det().unwrap(), BigInt::from(1), "{}", g.name);
                assert_eq!(ft.trace(), f.trace() - 1, "{}", g.name);
                if ord == 2 {
                    assert_eq!(ft, IntMatrix::identity(2).neg(), "{}", g.name);
                }
            }
        }
    }
}

#[test]
fn table_rows_satisfy_row_invariants() {
    let out = run_table(&Dataset::builtin(), &ClassifyOptions::default()).unwrap();
    assert!(!out.rows.is_empty());
    assert_eq!(out.warnings.len(), 1, "{:?}", out.warnings);
    for r in &out.rows {
        assert!(r.h_sq.is_positive());
        assert!(r.h_div == BigInt::from(1) || r.h_div == BigInt::from(2));
        assert!([2, 3, 4, 6].contains(&r.m));
        let (a, b, c) = (&r.t_gram[(0, 0)], &r.t_gram[(0, 1)], &r.t_gram[(1, 1)]);
        assert!(a.is_positive() && (a * c - b * b).is_positive() && !b.is_negative());
        assert_eq!(r.mode, Mode::Permissive);
    }
}

#[test]
fn thread_count_does_not_change_rows() {
    let ds = Dataset::builtin();
    let g = ds.group("L2(11)").unwrap();
    let run = |jobs| classify(&g.invariant_lattices().unwrap(), &g.coinvariant_data().unwrap(), &g.name, &ClassifyOptions { mode: Mode::Permissive, jobs }).unwrap().rows;
    assert_eq!(run(Some(1)), run(None));
    assert_eq!(run(Some(4)), run(None));
}

#[test]
fn example_transcendental_lattices_appear() {
    let out = run_table(&Dataset::builtin(), &ClassifyOptions::default()).unwrap();
    let expected: [(&str, i64, i64, Option<u64>, [i64; 3]); 9] = [
        ("3^4:A6", 6, 2, Some(6), [6, 3, 6]),
        ("L2(11)", 22, 2, None, [2, 1, 6]),
        ("L2(11)", 6, 2, Some(3), [22, 11, 22]),
        ("L2(11)", 2, 1, None, [22, 0, 22]),
        ("A7", 6, 2, None, [2, 1, 18]),
        ("(Z3xA5):Z2", 6, 2, Some(6), [10, 5, 10]),
        ("3^(1+4):2.2^2", 6, 2, Some(4), [6, 0, 6]),
        ("Z2xL2(7)", 2, 1, None, [14, 0, 14]),
        ("Z2^4:S5", 2, 1, None, [4, 0, 40]),
    ];
    for (group, h_sq, div, m, [a, b, c]) in expected {
        let t = IntMatrix::from_i64(&[vec![a, b], vec![b, c]]);
        assert!(
            out.rows.iter().any(|r| r.group_name == group
                && r.h_sq == BigInt::from(h_sq)
                && r.h_div == BigInt::from(div)
                && m.is_none_or(|m| r.m == m)
                && r.t_gram == t),
            "{group}: missing ({h_sq}, {div}, {a} {b}; {b} {c})"
        );
    }
}
