mod common;

use k3lat::enumerate::{all_isometries, automorphism_group};
use k3lat::exact::{smith_normal_form, IntMatrix};
use k3lat::fqm::{is_isometric, mod2};
use k3lat::lattice::{divisibility, invariant_and_coinvariant, Lattice};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discriminant_order_is_determinant(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_even_form(&mut r, n, 6)).unwrap();
        let d = l.discriminant().unwrap();
        prop_assert_eq!(BigInt::from(d.form().size()), l.det().abs());
    }

    #[test]
    fn discriminant_form_identities(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_even_form(&mut r, n, 6)).unwrap();
        let d = l.discriminant().unwrap();
        let f = d.form();
        prop_assert_eq!(f.orders().iter().product::<u64>(), f.size());
        for _ in 0..20 {
            let x = f.element_at(r.gen_range(0..f.size()));
            let y = f.element_at(r.gen_range(0..f.size()));
            let lhs = mod2(f.q(&f.add(&x, &y)) - f.q(&x) - f.q(&y));
            prop_assert_eq!(lhs, mod2(f.b(&x, &y) * Rational64::from(2)));
            let k = r.gen_range(-5i64..=5);
            prop_assert_eq!(f.q(&f.scale(k, &x)), mod2(f.q(&x) * Rational64::from(k * k)));
            let back = d.project(&d.lift(&x)).unwrap();
            prop_assert_eq!(back, x);
        }
    }

    #[test]
    fn discriminant_is_a_basis_invariant(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_even_form(&mut r, n, 6)).unwrap();
        let p = IntMatrix::from_i64(&random_unimodular(&mut r, n));
        let l2 = l.change_basis(&p).unwrap();
        prop_assert_eq!(l2.signature(), l.signature());
        prop_assert!(is_isometric(l.discriminant().unwrap().form(), l2.discriminant().unwrap().form()).unwrap());
    }

    #[test]
    fn divisibility_properties(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_even_form(&mut r, n, 8)).unwrap();
        let v: Vec<BigInt> = (0..n).map(|_| BigInt::from(r.gen_range(-4i64..=4))).collect();
        prop_assume!(v.iter().any(|x| !x.is_zero()));
        let div = divisibility(&l, &v).unwrap();
        prop_assert!(div.is_positive());
        prop_assert!(l.norm(&v).is_multiple_of(&div));
        for w in l.gram().mul_vec(&v).unwrap() {
            prop_assert!(w.is_multiple_of(&div));
        }
    }

    #[test]
    fn invariant_and_coinvariant_split(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_even_pd(&mut r, n, 6, 2)).unwrap();
        let all = all_isometries(&l, 100_000).unwrap();
        let gens = vec![all[r.gen_range(0..all.len())].clone(), all[r.gen_range(0..all.len())].clone()];
        let (inv, coinv) = invariant_and_coinvariant(&l, &gens).unwrap();
        prop_assert_eq!(inv.rank() + coinv.rank(), n);
        prop_assert!(inv.is_primitive() && coinv.is_primitive());
        for a in inv.vectors() {
            for g in &gens {
                prop_assert_eq!(g.apply(&a), a.clone());
            }
            for b in coinv.vectors() {
                prop_assert!(l.product(&a, &b).is_zero());
            }
        }
        for s in [&inv, &coinv] {
            if s.rank() > 0 {
                prop_assert!(smith_normal_form(s.rows()).invariant_factors().iter().all(|d| d.is_one()));
            }
        }
    }

    #[test]
    fn automorphism_generators_preserve_the_form(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let l = Lattice::from_i64(&random_pd(&mut r, n, 6)).unwrap();
        let g = automorphism_group(&l).unwrap();
        for f in g.generators() {
            prop_assert_eq!(&f.matrix().congruence(l.gram()).unwrap(), l.gram());
            prop_assert!(f.det().abs().is_one());
        }
    }
}
