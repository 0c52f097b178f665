use std::collections::HashSet;

use proptest::prelude::*;
use ptlab_core::partitions::{
    catalan, delta, enumerate_bipartite_pairings, enumerate_nc, free_cumulants_to_moments, hat,
    moments_to_free_cumulants, nu1, nu2, univariate_cumulants, univariate_moments, FreeCumulants, MomentTable,
    NoncrossingPartition, Pairing, Partition,
};
use ptlab_core::perms::{EntryPermutation, MatrixShape};
use ptlab_core::rational::{int, rat, Rational};
use ptlab_core::wick::{exact_mixed_moment, WickWord};

fn partition(labels: Vec<usize>) -> Partition {
    Partition::from_labels(&labels)
}

fn labels(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..n.max(1), n)
}

fn same_size_triple() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    (1usize..=12).prop_flat_map(|n| (labels(n), labels(n), labels(n)))
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

#[test]
fn pairing_counts_and_validity() {
    for m in 1..=8 {
        let all = enumerate_bipartite_pairings(m).unwrap();
        assert_eq!(all.len(), factorial(m));
        let distinct: HashSet<Vec<usize>> = all.iter().map(|p| p.partners().to_vec()).collect();
        assert_eq!(distinct.len(), all.len());
        for p in &all {
            assert!(Pairing::new(p.partners().to_vec()).is_ok());
            assert!(p.pairs().iter().all(|&(a, b)| (a + b) % 2 == 1));
        }
    }
}

#[test]
fn noncrossing_counts_are_catalan() {
    for m in 1..=10 {
        let nc = enumerate_nc(m).unwrap();
        assert_eq!(nc.len() as u64, catalan(m as u64));
        assert!(nc.iter().all(|g| g.as_partition().is_noncrossing()));
    }
}

#[test]
fn hat_image_is_the_delta_fixed_noncrossing_set() {
    for m in 1..=5 {
        let d = delta(m);
        let image: HashSet<String> = enumerate_nc(m)
            .unwrap()
            .iter()
            .map(|g| {
                let h = hat(g);
                assert_eq!(h.join(&d).unwrap(), h);
                assert!(h.is_noncrossing());
                h.to_string()
            })
            .collect();
        for rho in enumerate_nc(2 * m).unwrap() {
            let rho = rho.into_partition();
            if rho.join(&d).unwrap() == rho {
                assert!(image.contains(&rho.to_string()), "{rho} at m={m}");
            }
        }
    }
}

#[test]
fn nu_pairings_wrap_around() {
    for m in 3..=8 {
        let n = 2 * m;
        let (a, b) = (nu1(m).unwrap(), nu2(m).unwrap());
        for k in 1..=m {
            assert_eq!(a.partner(2 * k - 1), (2 * k) % n, "nu1 m={m} k={k}");
            assert_eq!(b.partner(2 * k - 2), (2 * k + 1) % n, "nu2 m={m} k={k}");
        }
        assert_eq!(a.to_partition().join(&delta(m)).unwrap(), Partition::one(n));
        assert_eq!(b.to_partition().join(&delta(m)).unwrap(), Partition::one(n));
    }
}

/// Connected pairings other than `ν₁`, `ν₂` lose their Wick weight as the
/// block size grows with the block count held at 2, while `ν₂` keeps a
/// constant weight along the same sequence.
#[test]
fn only_distinguished_connected_pairings_survive() {
    for m in 3..=5usize {
        let d_delta = delta(m);
        let (n1, n2) = (nu1(m).unwrap(), nu2(m).unwrap());
        let sizes: &[usize] = if m == 5 { &[2, 3, 4, 5] } else { &[2, 3, 4, 5, 6] };
        let mut series: Vec<Vec<Rational>> = Vec::new();
        let mut pairings = Vec::new();
        for &d in sizes {
            let w = WickWord::new(MatrixShape::square(2 * d).unwrap(), vec![EntryPermutation::gamma(2, d).unwrap(); m]).unwrap();
            let r = exact_mixed_moment(&w).unwrap();
            pairings = r.per_pairing.iter().map(|t| t.pairing.clone()).collect();
            series.push(r.per_pairing.iter().map(|t| t.value.clone()).collect());
        }
        for (k, pi) in pairings.iter().enumerate() {
            let connected = pi.to_partition().join(&d_delta).unwrap().num_blocks() == 1;
            let values: Vec<&Rational> = series.iter().map(|s| &s[k]).collect();
            if *pi == n2 {
                assert!(values.iter().all(|v| *v == values[0]) && *values[0] > int(0), "nu2 at m={m}: {values:?}");
            } else if connected && *pi != n1 {
                assert!(values.windows(2).all(|w| w[1] < w[0]), "{pi} at m={m}: {values:?}");
                assert!(values[values.len() - 1] * int(4) < *values[0], "{pi} at m={m}: {values:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn join_is_a_semilattice((a, b, c) in same_size_triple()) {
        let (a, b, c) = (partition(a), partition(b), partition(c));
        let ab = a.join(&b).unwrap();
        prop_assert_eq!(&ab, &b.join(&a).unwrap());
        prop_assert_eq!(ab.join(&c).unwrap(), a.join(&b.join(&c).unwrap()).unwrap());
        prop_assert_eq!(a.join(&a).unwrap(), a.clone());
        prop_assert!(a.refines(&ab) && b.refines(&ab));
        if a.refines(&c) {
            prop_assert!(ab.refines(&c.join(&b).unwrap()));
        }
        prop_assert_eq!(a.to_string().parse::<Partition>().unwrap(), a);
    }

    #[test]
    fn univariate_round_trip(ks in proptest::collection::vec(-20i64..20, 1..8)) {
        let ks: Vec<Rational> = ks.into_iter().map(|k| rat(k, 3)).collect();
        let ms = univariate_moments(&ks).unwrap();
        prop_assert_eq!(univariate_cumulants(&ms).unwrap(), ks);
    }

    #[test]
    fn multivariate_round_trip(vals in proptest::collection::vec(-9i64..9, 14)) {
        let mut table = MomentTable::new();
        let mut words = Vec::new();
        for n in 1..=3usize {
            for code in 0..(1usize << n) {
                words.push((0..n).map(|k| (code >> k) & 1).collect::<Vec<_>>());
            }
        }
        for (w, v) in words.iter().zip(&vals) {
            table.insert(w.clone(), rat(*v, 1));
        }
        let kappa = moments_to_free_cumulants(&table).unwrap();
        let back = free_cumulants_to_moments(&kappa).unwrap();
        for w in &words {
            prop_assert_eq!(back.get(w), table.get(w));
        }
        let mut lazy = FreeCumulants::new(table.clone());
        for w in &words {
            prop_assert_eq!(Some(&lazy.cumulant(w).unwrap()), kappa.get(w));
        }
    }

    #[test]
    fn noncrossing_conversion_agrees(lbl in (1usize..=8).prop_flat_map(labels)) {
        let p = partition(lbl);
        prop_assert_eq!(NoncrossingPartition::try_from(p.clone()).is_ok(), p.is_noncrossing());
        prop_assert_eq!(p.is_crossing(), !p.is_noncrossing());
    }
}
