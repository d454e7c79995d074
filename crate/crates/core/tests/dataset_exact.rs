mod common;

use k3lat::classify::{classify, ClassificationRow, ClassifyOptions};
use k3lat::dataset::{coinvariant_forms, derive_coinvariant_form, emit, load_dataset, parse, Dataset, GroupData};
use k3lat::enumerate::automorphism_group;
use k3lat::exact::IntMatrix;
use k3lat::fqm::{is_isometric, FqmHom};
use k3lat::glue::Mode;
use k3lat::lattice::Lattice;
use k3lat::table::{emit_table, parse_table, run_table, Format};
use num_bigint::BigInt;

use common::*;

#[test]
fn shipped_coinvariant_forms_are_rederived() {
    for g in &Dataset::builtin().groups {
        let lattices = g.invariant_lattices().unwrap();
        match &g.coinv_disc {
            Some(d) => {
                let derived = derive_coinvariant_form(&lattices).unwrap();
                assert!(is_isometric(&derived, d).unwrap(), "{}", g.name);
            }
            None => {
                assert_eq!(g.name, "Z2^4:(S3xS3)");
                let forms = coinvariant_forms(&lattices).unwrap();
                assert_eq!(forms.len(), 2);
                assert!(!is_isometric(&forms[0], &forms[1]).unwrap());
                assert!(derive_coinvariant_form(&lattices).is_err());
            }
        }
    }
}

#[test]
fn builtin_text_round_trips_byte_for_byte() {
    let ds = Dataset::builtin();
    ds.validate().unwrap();
    let text = emit(&ds);
    let again = parse(&text).unwrap();
    assert_eq!(again, ds);
    assert_eq!(emit(&again), text);
    for g in &ds.groups {
        for n in g.invariant_lattices().unwrap() {
            assert!(n.is_even() && n.is_positive_definite() && n.rank() == 3);
        }
    }
}

fn d4_minus() -> Lattice {
    Lattice::from_i64(&cartan_d(4).iter().map(|r| r.iter().map(|x| -x).collect()).collect::<Vec<_>>()).unwrap()
}

/// Toy group on `N = ⟨2⟩³` with coinvariant lattice `D4(−1)`; the symplectic
/// action is generated by two root reflections.
fn toy_group(full_obar: bool) -> GroupData {
    let m = d4_minus();
    let dm = m.discriminant().unwrap();
    let obar: Vec<FqmHom> = if full_obar {
        automorphism_group(&m).unwrap().generators().iter().map(|f| dm.induced_map(f).unwrap()).collect()
    } else {
        vec![FqmHom::identity(dm.form())]
    };
    let g = rows(m.gram());
    let gens = [0usize, 1]
        .iter()
        .map(|&i| {
            // s(x) = x + (x·r) r for a root r of norm −2; here r is the i-th basis vector.
            let mut a: Vec<Vec<i64>> = (0..4).map(|k| (0..4).map(|j| i64::from(k == j)).collect()).collect();
            for j in 0..4 {
                a[i][j] += g[i][j];
            }
            IntMatrix::from_i64(&a)
        })
        .collect();
    GroupData {
        symplectic_order: Some(6),
        invariant_grams: vec![IntMatrix::from_i64(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]])],
        coinv_gram: Some(m.gram().clone()),
        obar_gens: Some(obar),
        generators: Some(gens),
        ..GroupData::new("toy")
    }
}

fn strip(rows: &[ClassificationRow]) -> Vec<(BigInt, BigInt, u64, IntMatrix)> {
    let mut v: Vec<_> = rows.iter().map(|r| (r.h_sq.clone(), r.h_div.clone(), r.m, r.t_gram.clone())).collect();
    v.sort();
    v.dedup();
    v
}

#[test]
fn exact_mode_end_to_end() {
    let run = |g: &GroupData, mode| {
        classify(&g.invariant_lattices().unwrap(), &g.coinvariant_data().unwrap(), &g.name, &ClassifyOptions { mode, jobs: None })
            .unwrap()
    };
    let full = toy_group(true);
    full.validate().unwrap();
    let permissive = run(&full, Mode::Permissive);
    let exact = run(&full, Mode::Exact);
    assert!(!permissive.rows.is_empty());
    assert!(exact.warnings.is_empty(), "{:?}", exact.warnings);
    assert!(exact.rows.iter().all(|r| r.mode == Mode::Exact && r.lift_improved.is_some()));
    assert!(permissive.rows.iter().all(|r| r.mode == Mode::Permissive && r.lift_improved.is_none()));
    assert_eq!(strip(&exact.rows), strip(&permissive.rows));

    let restricted = run(&toy_group(false), Mode::Exact);
    let (r, p) = (strip(&restricted.rows), strip(&permissive.rows));
    assert!(r.iter().all(|row| p.contains(row)));
    assert!(restricted.rows.len() <= exact.rows.len());
}

#[test]
fn exact_request_without_generators_downgrades() {
    let g = GroupData { obar_gens: None, ..toy_group(true) };
    let out = classify(
        &g.invariant_lattices().unwrap(),
        &g.coinvariant_data().unwrap(),
        &g.name,
        &ClassifyOptions { mode: Mode::Exact, jobs: Some(2) },
    )
    .unwrap();
    assert!(out.warnings.iter().any(|w| w.contains("permissive")));
    assert!(out.rows.iter().all(|r| r.mode == Mode::Permissive));
}

#[test]
fn toy_dataset_survives_a_file_round_trip() {
    let ds = Dataset { groups: vec![toy_group(true), toy_group(false)].into_iter().enumerate().map(|(i, g)| GroupData { name: format!("toy{i}"), ..g }).collect() };
    let text = emit(&ds);
    let path = std::env::temp_dir().join(format!("k3lat-toy-{}.k3d", std::process::id()));
    std::fs::write(&path, &text).unwrap();
    let loaded = load_dataset(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(loaded, ds);
    assert_eq!(emit(&loaded), text);

    let opts = ClassifyOptions { mode: Mode::Exact, jobs: None };
    let table = run_table(&loaded, &opts).unwrap();
    for f in [Format::Csv, Format::Markdown] {
        let rendered = emit_table(&table.rows, f);
        assert_eq!(parse_table(&rendered, f).unwrap(), table.rows);
    }
}

#[test]
fn broken_files_report_lines() {
    let path = std::env::temp_dir().join(format!("k3lat-bad-{}.k3d", std::process::id()));
    std::fs::write(&path, "group x\ninvariant\n2 1 0\n1 2\nend\nendgroup\n").unwrap();
    let err = load_dataset(&path).unwrap_err();
    std::fs::remove_file(&path).unwrap();
    assert!(matches!(err, k3lat::error::Error::Parse { line: 5, .. }), "{err}");
    assert!(load_dataset(std::path::Path::new("/nonexistent/k3lat.k3d")).is_err());
}
