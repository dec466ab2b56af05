mod common;

use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use qgossip::analysis::{
    build_m, deterministic_period_gap, exact_h_series, expected_w, gossip_matrix, mc_h_series,
    nu_star, Spectrum,
};
use qgossip::evolution::det_step;
use qgossip::hypergraph::{finite_time_feasible, search_finite_time_schedule, GeneralizedGraph};
use qgossip::permgroup::{canonical_cycle, cyclic_perms_over, enumerate_pk};
use qgossip::qstate::{product_state, StandardState::*};

#[test]
fn three_cycle_step_is_mixture_of_relabelings() {
    let rho = product_state(&[Ket0.state(), Ket0.state(), Ket1.state()]).unwrap();
    let p = canonical_cycle(&[0, 1, 2], 3).unwrap();
    let got = det_step(&rho, &[0, 1, 2], &p).unwrap();

    let mut want = CMat::zeros(8, 8);
    for tau in 1..=3 {
        want += explicit_conjugate(rho.matrix(), &power_images(p.images(), tau));
    }
    want /= Complex64::new(3.0, 0.0);
    assert!((got.matrix() - &want).norm() < 1e-14);
    // |001⟩, |010⟩, |100⟩ each with weight 1/3
    for b in [1, 2, 4] {
        assert!((want[(b, b)].re - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn pair_step_is_swap_average() {
    let rho = product_state(&[Plus.state(), Ket1.state()]).unwrap();
    let p = canonical_cycle(&[0, 1], 2).unwrap();
    let got = det_step(&rho, &[0, 1], &p).unwrap();
    let want = (rho.matrix() + explicit_conjugate(rho.matrix(), &[1, 0])) / Complex64::new(2.0, 0.0);
    assert!((got.matrix() - want).norm() < 1e-15);
}

#[test]
fn cycles_match_brute_force_listing() {
    for (edge, n) in [(vec![0, 2, 3], 5), (vec![1, 2, 3, 4], 5), (vec![0, 1], 2)] {
        let mut got: Vec<Vec<usize>> = cyclic_perms_over(&edge, n)
            .unwrap()
            .iter()
            .map(|p| p.images().to_vec())
            .collect();
        let mut want = brute_cycles(&edge, n);
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn m_matches_literal_kronecker_formula() {
    for (n, k) in [(2, 2), (3, 2), (3, 3)] {
        let fast = build_m(n, k).unwrap();
        let slow = literal_m(n, k);
        assert!((&fast - &slow).amax() < 1e-14, "n={n} k={k}");
    }
}

#[test]
fn two_qubit_rate_from_dense_eigendecomposition() {
    let oracle = literal_m(2, 2);
    let eig = SymmetricEigen::new(oracle.clone()).eigenvalues;
    let reference = eig
        .iter()
        .filter(|l| (*l - 1.0).abs() > 1e-9)
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    // (I + S)/2 with S an involution is a projection
    assert!(reference < 1e-12);
    assert!((nu_star(&build_m(2, 2).unwrap()).unwrap() - reference).abs() < 1e-12);
}

#[test]
fn m_symmetric_for_small_networks() {
    for n in 3..=4 {
        for k in 2..=n {
            let m = build_m(n, k).unwrap();
            assert!((&m - m.transpose()).amax() < 1e-12);
        }
    }
}

#[test]
fn m_eigenvalues_for_three_and_four_qubits() {
    // frozen from the literal Kronecker construction above, via numpy
    let cases = [(3, 2, 0.5), (4, 2, 2.0 / 3.0), (4, 3, 1.0 / 3.0), (4, 4, 0.5)];
    for (n, k, want) in cases {
        let nu = Spectrum::of_symmetric(&build_m(n, k).unwrap()).unwrap().nu_star().unwrap();
        assert!((nu - want).abs() < 1e-9, "n={n} k={k}: {nu}");
    }
    let three = nu_star(&literal_m(3, 2)).unwrap();
    assert!((three - 0.5).abs() < 1e-9);
}

#[test]
fn expected_w_equals_rational_average() {
    for n in 2..=8usize {
        for k in 2..=n {
            let subsets = subsets(n, k);
            let mut avg = vec![vec![Ratio::<i64>::from_integer(0); n]; n];
            for e in &subsets {
                for i in 0..n {
                    for j in 0..n {
                        let w = if e.contains(&i) && e.contains(&j) {
                            Ratio::new(1, k as i64)
                        } else if i == j {
                            Ratio::from_integer(1)
                        } else {
                            Ratio::from_integer(0)
                        };
                        avg[i][j] += w;
                    }
                }
            }
            let closed = expected_w(n, k).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let exact = avg[i][j] / subsets.len() as i64;
                    let exact = *exact.numer() as f64 / *exact.denom() as f64;
                    assert!((closed[(i, j)] - exact).abs() < 1e-14, "n={n} k={k}");
                }
            }
        }
    }
}

#[test]
fn exact_h_agrees_with_monte_carlo() {
    let states: Vec<_> = [Ket0, Ket1, Plus, Minus, Ket0, Plus].map(|s| s.state()).to_vec();
    let exact = exact_h_series(&states, 3, 15).unwrap();
    let mc = mc_h_series(&states, 3, 15, 5_000, 2024).unwrap();
    for (e, m) in exact.points().iter().zip(mc.points()) {
        assert_eq!(e.t, m.t);
        let slack = 3.0 * m.stderr;
        assert!((e.value - m.value).abs() <= slack.max(1e-12), "t={}: {} vs {} ± {}", e.t, e.value, m.value, m.stderr);
    }
}

#[test]
fn path_period_gap_matches_power_iteration() {
    let g = GeneralizedGraph::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
    let gap = deterministic_period_gap(&g, &[0, 1, 2]).unwrap();
    assert!(gap.condition_holds);

    let mut period = DMatrix::<f64>::identity(4, 4);
    for e in g.edges() {
        period = gossip_matrix(e, 4).unwrap().into_matrix() * period;
    }
    let deflated = period - DMatrix::from_element(4, 4, 0.25);
    let reference = power_iteration_radius(&deflated, 1e-15);
    assert!((gap.gap - reference).abs() < 1e-10);
}

#[test]
fn schedule_search_agrees_with_feasibility_for_small_networks() {
    for n in 2..=5 {
        for k in 2..=n {
            let report = finite_time_feasible(n, k).unwrap();
            let bound = report.steps.unwrap_or(n);
            let search = search_finite_time_schedule(n, k, bound).unwrap();
            assert!(!search.budget_exhausted);
            assert_eq!(search.schedule.is_some(), report.feasible, "n={n} k={k}");
            if let Some(s) = search.schedule {
                assert_eq!(Some(s.len()), report.steps);
            }
        }
    }
}

#[test]
fn pk_count() {
    assert_eq!(enumerate_pk(5, 3).unwrap().len(), 20);
    assert_eq!(enumerate_pk(6, 4).unwrap().len(), 90);
}
