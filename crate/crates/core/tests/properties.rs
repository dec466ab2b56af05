mod common;

use common::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use qgossip::analysis::{build_m, expected_w, fit_decay_rate, gossip_matrix, Series};
use qgossip::evolution::{det_step, limit_state, reduced_step, trial_rng, Schedule, ScheduledClique};
use qgossip::hypergraph::{search_finite_time_schedule, GeneralizedGraph};
use qgossip::permgroup::{cyclic_perm, generate_subgroup, pk_generated_group, Parity, Permutation};
use qgossip::qstate::{conjugate_by_permutation, random_mixed_state, QubitState, StandardState};

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|images| Permutation::from_images(images).unwrap())
}

fn same_size_pair(max_n: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
    (1..=max_n).prop_flat_map(|n| {
        let p = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
        (p.clone(), p).prop_map(|(a, b)| {
            (Permutation::from_images(a).unwrap(), Permutation::from_images(b).unwrap())
        })
    })
}

/// An edge of at least two nodes on `n` nodes, with a cycle index.
fn clique(n: usize) -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2..=n)
        .prop_flat_map(move |k| (proptest::sample::subsequence((0..n).collect::<Vec<_>>(), k), 0..120usize))
        .prop_map(|(edge, c)| {
            let cycles: usize = (1..edge.len()).product();
            let c = c % cycles;
            (edge, c)
        })
}

fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parity_is_a_homomorphism((p, q) in same_size_pair(7)) {
        let pq = p.compose(&q).unwrap();
        let odd = |x: &Permutation| x.parity() == Parity::Odd;
        prop_assert_eq!(odd(&pq), odd(&p) ^ odd(&q));
    }

    #[test]
    fn inverse_and_powers(p in permutation(8)) {
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        prop_assert!(p.pow(p.order()).is_identity());
        prop_assert_eq!(p.pow(3), p.compose(&p).unwrap().compose(&p).unwrap());
    }

    #[test]
    fn permutation_json_round_trip(p in permutation(9)) {
        let json = serde_json::to_string(&p).unwrap();
        let back: Permutation = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn generated_subgroup_is_closed(gens in prop::collection::vec(Just((0..5).collect::<Vec<usize>>()).prop_shuffle(), 1..3)) {
        let gens: Vec<_> = gens.into_iter().map(|g| Permutation::from_images(g).unwrap()).collect();
        let group = generate_subgroup(&gens, 1000).unwrap();
        prop_assert_eq!(120 % group.order(), 0);
        for g in &gens {
            prop_assert!(group.contains(g));
        }
        for a in group.iter() {
            prop_assert!(group.contains(&a.inverse()));
            for b in group.iter().take(10) {
                prop_assert!(group.contains(&a.compose(b).unwrap()));
            }
        }
    }

    #[test]
    fn conjugation_preserves_trace_and_spectrum(seed in any::<u64>(), p in permutation(4)) {
        let n = p.len();
        let rho = random_mixed_state(n, &mut trial_rng(seed, 0)).unwrap();
        let out = conjugate_by_permutation(&rho, &p).unwrap();
        prop_assert!((out.trace() - rho.trace()).norm() < 1e-12);
        let a = hermitian_eigenvalues(rho.matrix());
        let b = hermitian_eigenvalues(out.matrix());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn relabeling_matches_dense_conjugation(seed in any::<u64>(), p in permutation(6)) {
        let rho = random_mixed_state(p.len(), &mut trial_rng(seed, 1)).unwrap();
        let fast = conjugate_by_permutation(&rho, &p).unwrap();
        let slow = explicit_conjugate(rho.matrix(), p.images());
        prop_assert!((fast.matrix() - slow).camax() < 1e-12);
    }

    #[test]
    fn reduced_step_conserves_the_sum(
        symbols in prop::collection::vec(0..4usize, 2..9),
        pick in any::<prop::sample::Index>(),
    ) {
        let all = [StandardState::Ket0, StandardState::Ket1, StandardState::Plus, StandardState::Minus];
        let states: Vec<QubitState> = symbols.iter().map(|&s| all[s].state()).collect();
        let n = states.len();
        let edges = subsets(n, 2);
        let edge = &edges[pick.index(edges.len())];
        let after = reduced_step(&states, edge).unwrap();
        let sum = |v: &[QubitState]| v.iter().fold(nalgebra::Matrix2::zeros(), |acc, q| acc + q.matrix());
        prop_assert!((sum(&states) - sum(&after)).norm() < 1e-14);
        prop_assert_eq!(after[edge[0]], after[edge[1]]);
    }

    #[test]
    fn full_step_reduces_to_averaging(seed in any::<u64>(), (edge, c) in clique(4)) {
        let rho = random_mixed_state(4, &mut trial_rng(seed, 2)).unwrap();
        let p = cyclic_perm(&edge, 4, c).unwrap();
        let full = det_step(&rho, &edge, &p).unwrap();
        let reduced = reduced_step(&rho.reduced_states(), &edge).unwrap();
        for (a, b) in full.reduced_states().iter().zip(&reduced) {
            prop_assert!(a.distance_sq(b) < 1e-24);
        }
        prop_assert!(full.trace_defect() < 1e-12);
    }

    #[test]
    fn consensus_condition_is_monotone(
        edges in prop::collection::vec(proptest::sample::subsequence((0..6usize).collect::<Vec<_>>(), 2..=3), 0..6),
        extra in proptest::sample::subsequence((0..6usize).collect::<Vec<_>>(), 2..=4),
    ) {
        let before = GeneralizedGraph::new(6, edges.clone()).unwrap();
        let mut more = edges;
        more.push(extra);
        let after = GeneralizedGraph::new(6, more).unwrap();
        prop_assert!(!before.reduced_consensus_condition() || after.reduced_consensus_condition());
    }

    #[test]
    fn gossip_matrices_are_projections((edge, _) in clique(7)) {
        let w = gossip_matrix(&edge, 7).unwrap().into_matrix();
        prop_assert!((&w - w.transpose()).amax() == 0.0);
        prop_assert!((&w * &w - &w).amax() < 1e-15);
        for r in 0..7 {
            prop_assert!((w.row(r).sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn expected_w_spectrum(n in 2..=9usize, k in 2..=9usize) {
        prop_assume!(k <= n);
        let eig = SymmetricEigen::new(expected_w(n, k).unwrap()).eigenvalues;
        let nu = (n - k) as f64 / (n - 1) as f64;
        let near_one = eig.iter().filter(|l| (*l - 1.0).abs() < 1e-10).count();
        let near_nu = eig.iter().filter(|l| (*l - nu).abs() < 1e-10).count();
        prop_assert_eq!((near_one, near_nu), (1, n - 1));
    }

    #[test]
    fn geometric_series_fit(rate in 0.05f64..1.0, scale in 1e-3f64..1e3, burn_in in 0usize..5) {
        let s = Series::from_values((0..40).map(|t| scale * rate.powi(t)));
        prop_assert!((fit_decay_rate(&s, burn_in).unwrap() - rate).abs() < 1e-12);
    }

    #[test]
    fn deterministic_schedule_json_round_trip((edge, c) in clique(5), seed in any::<u64>()) {
        let det = Schedule::deterministic(5, vec![ScheduledClique { edge, cycle: c }]).unwrap();
        let json = serde_json::to_string(&det).unwrap();
        prop_assert_eq!(Schedule::from_json_str(&json).unwrap(), det);
        let rnd = Schedule::random(5, 3, seed).unwrap();
        prop_assert_eq!(Schedule::from_json_str(&serde_json::to_string(&rnd).unwrap()).unwrap(), rnd);
    }
}

fn real_vec(m: &CMat, part: fn(&Complex64) -> f64) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.iter().map(part))
}

#[test]
fn group_limits_are_fixed_vectors_of_m() {
    for (n, k) in [(3, 2), (3, 3), (4, 3)] {
        let m = build_m(n, k).unwrap();
        let group = pk_generated_group(n, k, 1000).unwrap();
        for seed in 0..3 {
            let rho = random_mixed_state(n, &mut trial_rng(seed, 9)).unwrap();
            let limit = limit_state(&rho, &group).unwrap();
            for part in [(|z: &Complex64| z.re) as fn(&Complex64) -> f64, |z: &Complex64| z.im] {
                let v = real_vec(limit.matrix(), part);
                assert!((&m * &v - &v).amax() < 1e-12, "n={n} k={k}");
            }
        }
    }
}

#[test]
fn search_finds_only_averaging_schedules() {
    let search = search_finite_time_schedule(4, 2, 4).unwrap();
    let schedule = search.schedule.unwrap();
    let mut product = DMatrix::<f64>::identity(4, 4);
    for e in &schedule {
        product = gossip_matrix(e, 4).unwrap().into_matrix() * product;
    }
    assert!((product - DMatrix::from_element(4, 4, 0.25)).amax() < 1e-15);
}
