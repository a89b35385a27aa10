use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use unbalanced::enumerate::{enumerate_chambers, EnumerateOptions};
use unbalanced::kernel::{nonzero_binary_vectors, span_closure, Field, IntVector};
use unbalanced::lattice::{
    build_flat_lattice, characteristic_polynomial, projective_charpoly, zaslavsky_count, CharPoly,
};

fn gaussian_binomial(m: usize, k: usize) -> u64 {
    let q = |i: usize| (1u64 << i) - 1;
    let num: u64 = (0..k).map(|i| q(m - i)).product();
    let den: u64 = (1..=k).map(q).product();
    num / den
}

#[test]
fn moebius_alternates_and_sums_to_zero() {
    for (field, top) in [(Field::Rationals, 5), (Field::Binary, 5)] {
        for n in 2..=top {
            let lattice = build_flat_lattice(n, field).unwrap();
            for x in lattice.flats() {
                assert!(!x.moebius.is_zero());
                assert_eq!(x.moebius.is_positive(), x.rank % 2 == 0, "{field} n = {n}");
                if x.rank > 0 {
                    let below: BigInt = lattice.flats().filter(|y| y.is_below(x)).map(|y| y.moebius.clone()).sum();
                    assert!(below.is_zero());
                }
            }
        }
    }
}

#[test]
fn leading_whitney_numbers() {
    for n in 2..=6 {
        for field in [Field::Rationals, Field::Binary] {
            let w = characteristic_polynomial(&build_flat_lattice(n, field).unwrap()).whitney();
            assert_eq!(w[0], BigInt::one());
            assert_eq!(w[1], -BigInt::from((1u64 << (n - 1)) - 1));
        }
    }
}

#[test]
fn binary_flats_are_subspaces() {
    for n in 2..=6 {
        let sizes = build_flat_lattice(n, Field::Binary).unwrap().level_sizes();
        let expected: Vec<usize> = (0..n).map(|k| gaussian_binomial(n - 1, k) as usize).collect();
        assert_eq!(sizes, expected, "n = {n}");
    }
}

#[test]
fn binary_polynomial_has_the_closed_form() {
    for n in 2..=6 {
        let p = characteristic_polynomial(&build_flat_lattice(n, Field::Binary).unwrap());
        let mut expected = vec![BigInt::one()];
        for i in 0..n - 1 {
            // multiply by (t - 2^i)
            let mut next = vec![BigInt::zero(); expected.len() + 1];
            for (k, c) in expected.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * (BigInt::one() << i);
            }
            expected = next;
        }
        assert_eq!(p.coeffs, expected, "n = {n}");
        assert_eq!(projective_charpoly(n).unwrap(), p);
    }
}

#[test]
fn flats_are_exactly_the_closed_sets() {
    for n in 2..=5 {
        for field in [Field::Rationals, Field::Binary] {
            let ground = nonzero_binary_vectors::<i64>(n - 1);
            let mut closed = BTreeSet::new();
            for subset in 0u64..1 << ground.len() {
                let gens: Vec<IntVector<i64>> =
                    (0..ground.len()).filter(|i| subset >> i & 1 == 1).map(|i| ground[i].clone()).collect();
                let cl = span_closure(&gens, &ground, field).unwrap();
                closed.insert(cl.iter().fold(0u64, |acc, i| acc | 1 << i));
            }
            let flats: BTreeSet<u64> = build_flat_lattice(n, field).unwrap().flats().map(|f| f.points).collect();
            assert_eq!(flats, closed, "{field} n = {n}");
        }
    }
}

#[test]
fn zaslavsky_counts_chambers() {
    for n in 2..=5 {
        let p = characteristic_polynomial(&build_flat_lattice(n, Field::Rationals).unwrap());
        let by_lattice = zaslavsky_count(&p).unwrap();
        let by_search = enumerate_chambers(n, &EnumerateOptions::default()).unwrap().chambers.count();
        assert_eq!(by_lattice, BigInt::from(by_search), "n = {n}");
        assert!(p.evaluate(&BigInt::one()).is_zero());
    }
}

#[test]
fn polynomial_json_round_trips() {
    let p = characteristic_polynomial(&build_flat_lattice(4, Field::Rationals).unwrap());
    assert_eq!(p.to_string(), "t^3 - 7t^2 + 15t - 9");
    let json = serde_json::to_string(&p.to_json()).unwrap();
    let back = CharPoly::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back, p);
}
