use num_complex::Complex64;
use proptest::prelude::*;
use ptlab_core::matrix::ComplexMatrix;
use ptlab_core::oracle;
use ptlab_core::perms::{
    count_agreements, count_joint, count_joint_second_slot, count_projection_agreement, factorizations,
    random_symmetric_table, EntryPermutation as E, Pattern, Projection,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIDES: [usize; 7] = [4, 6, 8, 12, 16, 24, 36];

fn structured_pool(m: usize) -> Vec<E> {
    let mut pool = vec![E::identity(m).unwrap(), E::transpose(m).unwrap()];
    for (b, d) in factorizations(m) {
        pool.push(E::gamma(b, d).unwrap());
        pool.push(E::left_gamma(b, d).unwrap());
    }
    pool
}

fn pool_with_randoms(m: usize, seed: u64) -> Vec<E> {
    let mut pool = structured_pool(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.push(random_symmetric_table(m, &mut rng).unwrap());
    let mut theta: Vec<usize> = (0..m).collect();
    rand::seq::SliceRandom::shuffle(&mut theta[..], &mut rng);
    pool.push(E::induced_diagonal(&theta).unwrap());
    pool
}

fn random_matrix(m: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(m, m, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn partial_transposes_are_involutions() {
    for m in 1..=36 {
        for (b, d) in factorizations(m) {
            for g in [E::gamma(b, d).unwrap(), E::left_gamma(b, d).unwrap()] {
                assert!(E::compose(&g, &g).unwrap().is_identity(), "{g} at M={m}");
            }
        }
    }
}

#[test]
fn symmetric_kinds_fix_exactly_the_diagonal() {
    for m in 1..=12 {
        for p in pool_with_randoms(m, m as u64) {
            assert!(p.is_symmetric_exhaustive(), "{p} at M={m}");
            for a in 0..m {
                for b in 0..m {
                    let (x, y) = p.image(a, b);
                    assert_eq!(x == y, a == b, "{p} at M={m}: ({a},{b}) -> ({x},{y})");
                }
            }
        }
    }
}

#[test]
fn structured_counts_match_brute_force() {
    for m in [4usize, 6, 12] {
        let fs = factorizations(m);
        for &(b, d) in &fs {
            for &(bb, dd) in &fs {
                let s = |i, j| oracle::gamma_image(b, d, i, j);
                let t = |i, j| oracle::gamma_image(bb, dd, i, j);
                let lt = |i, j| oracle::left_gamma_image(bb, dd, i, j);
                let (gs, gt, glt) = (E::gamma(b, d).unwrap(), E::gamma(bb, dd).unwrap(), E::left_gamma(bb, dd).unwrap());
                assert_eq!(count_agreements(&gs, &gt).unwrap(), oracle::agreements(m, &s, &t));
                assert_eq!(count_joint(&gs, &glt).unwrap(), oracle::joint(m, &s, &lt));
                assert_eq!(count_joint_second_slot(&gs, &gt).unwrap(), oracle::second_slot_joint(m, &s, &t));
                for (x, px) in [(1, Projection::First), (2, Projection::Second)] {
                    for (y, py) in [(1, Projection::First), (2, Projection::Second)] {
                        assert_eq!(
                            count_projection_agreement(&gs, &glt, px, py, Pattern::ShareMiddle).unwrap(),
                            oracle::middle_projection(m, &s, &lt, x, y)
                        );
                        assert_eq!(
                            count_projection_agreement(&gs, &gt, px, py, Pattern::ShareSecondSlot).unwrap(),
                            oracle::second_slot_projection(m, &s, &t, x, y)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn right_projection_bounds() {
    for m in SIDES {
        let m3 = (m * m * m) as u64;
        let fs = factorizations(m);
        for &(b, d) in &fs {
            for &(bb, dd) in &fs {
                let (s, t) = (E::gamma(b, d).unwrap(), E::gamma(bb, dd).unwrap());
                let ss = count_projection_agreement(&s, &t, Projection::Second, Projection::Second, Pattern::ShareSecondSlot)
                    .unwrap();
                let ff =
                    count_projection_agreement(&s, &t, Projection::First, Projection::First, Pattern::ShareSecondSlot).unwrap();
                assert!(ss * dd as u64 <= m3, "M={m} G({b},{d}) G({bb},{dd}): {ss}");
                assert!(ff * bb as u64 <= m3, "M={m} G({b},{d}) G({bb},{dd}): {ff}");
            }
        }
    }
}

#[test]
fn joint_count_paths_agree() {
    for m in [8usize, 12, 66, 70] {
        let pool = pool_with_randoms(m, 3);
        for s in pool.iter().step_by(3) {
            for t in pool.iter().step_by(2) {
                assert_eq!(ptlab_core::perms::count_joint_direct(s, t), ptlab_core::perms::count_joint_indexed(s, t));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_law(m in 1usize..=16, k1 in 0usize..64, k2 in 0usize..64, seed in any::<u64>()) {
        let pool = pool_with_randoms(m, seed);
        let (s, t) = (&pool[k1 % pool.len()], &pool[k2 % pool.len()]);
        let a = random_matrix(m, seed ^ 0xa5);
        let lhs = t.apply(&s.apply(&a).unwrap()).unwrap();
        let rhs = E::compose(s, t).unwrap().apply(&a).unwrap();
        prop_assert_eq!(lhs.max_abs_diff(&rhs), 0.0);
        prop_assert!(E::compose(s, &s.invert()).unwrap().is_identity());
    }

    #[test]
    fn symmetric_permutations_preserve_adjointness_and_trace(m in 1usize..=16, k in 0usize..64, seed in any::<u64>()) {
        let pool = pool_with_randoms(m, seed);
        let s = &pool[k % pool.len()];
        let a = random_matrix(m, seed);
        let h = ComplexMatrix::from_fn(m, m, |i, j| a.get(i, j) + a.get(j, i).conj());
        let hs = s.apply(&h).unwrap();
        prop_assert!(hs.is_hermitian(0.0));
        prop_assert!((s.apply(&a).unwrap().trace() - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn random_table_counts_match_brute_force(m in 1usize..=9, seed in any::<u64>()) {
        let pool = pool_with_randoms(m, seed);
        let (s, t) = (&pool[pool.len() - 2], &pool[pool.len() - 1]);
        let fs = |i: usize, j: usize| { let (x, y) = s.image(i - 1, j - 1); (x + 1, y + 1) };
        let ft = |i: usize, j: usize| { let (x, y) = t.image(i - 1, j - 1); (x + 1, y + 1) };
        prop_assert_eq!(count_agreements(s, t).unwrap(), oracle::agreements(m, &fs, &ft));
        prop_assert_eq!(count_joint(s, t).unwrap(), oracle::joint(m, &fs, &ft));
        prop_assert_eq!(count_agreements(s, t).unwrap(), E::compose(&s.invert(), t).unwrap().fixed_points());
    }
}
