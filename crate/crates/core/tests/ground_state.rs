mod common;

use cluster_mbqc::ground_state::{
    build_hamiltonian, dense_real, solve, solve_dmrg, solve_exact, GroundState, Representation, SolverParams,
    AUTO_EXACT_SITES,
};
use cluster_mbqc::pauli::{cluster_stabilizer, string_order_geq, symmetry_generators, ChainSpec, PauliString, Phase};
use cluster_mbqc::Error;

fn spec(n: usize, alpha: f64) -> ChainSpec {
    ChainSpec::new(n, alpha).unwrap()
}

fn dmrg(n: usize, alpha: f64) -> GroundState {
    solve_dmrg(&spec(n, alpha), &SolverParams::default()).unwrap()
}

// (N, alpha, E, <K_{>=3}>, <K_{3,7}>) from the dense oracle in tests/common
const FROZEN: [(usize, f64, f64, f64, f64); 2] = [
    (11, 0.3, -10.715071637480726, 0.987891423417048, 0.975586428381613),
    (11, 0.6, -9.962027867551084, 0.937622090721944, 0.872539901198210),
];

#[test]
fn cluster_point_energy() {
    let st = solve_exact(&spec(5, 0.0), &SolverParams::default()).unwrap();
    assert!((st.energy + 5.0).abs() < 1e-12);
    let st = solve_exact(&spec(7, 0.0), &SolverParams::default()).unwrap();
    for i in 1..=7 {
        assert!((st.expectation(&cluster_stabilizer(i, 7).unwrap()).unwrap() - 1.0).abs() < 1e-10);
    }
    let params = SolverParams { chi_max: 4, ..SolverParams::default() };
    let st = solve_dmrg(&spec(51, 0.0), &params).unwrap();
    assert!((st.energy + 51.0).abs() < 1e-9);
    assert!(st.max_bond() <= 4);
}

#[test]
fn exact_solver_matches_frozen_oracle() {
    for (n, alpha, e, k3, k37) in FROZEN {
        let st = solve_exact(&spec(n, alpha), &SolverParams::default()).unwrap();
        assert!((st.energy - e).abs() < 1e-9);
        assert!((st.expectation(&string_order_geq(3, n).unwrap()).unwrap() - k3).abs() < 1e-9);
        let pair = cluster_mbqc::pauli::string_order_pair(3, 7, n).unwrap();
        assert!((st.expectation(&pair).unwrap() - k37).abs() < 1e-9);
    }
    let (e, _) = common::ground_vector(9, 0.3);
    let st = solve_exact(&spec(9, 0.3), &SolverParams::default()).unwrap();
    assert!((st.energy - e).abs() < 1e-9);
}

#[test]
fn dmrg_matches_exact() {
    for alpha in [0.0, 0.15, 0.3, 0.6, -0.45] {
        let ex = solve_exact(&spec(11, alpha), &SolverParams::default()).unwrap();
        let mp = dmrg(11, alpha);
        assert!(!mp.is_dense() && ex.is_dense());
        assert!((ex.energy - mp.energy).abs() < 1e-7, "alpha={alpha}");
        for k in [2, 3, 5] {
            let op = string_order_geq(k, 11).unwrap();
            assert!((ex.expectation(&op).unwrap() - mp.expectation(&op).unwrap()).abs() < 1e-7);
        }
        let a = dense_real(&ex).unwrap();
        let b = dense_real(&mp).unwrap();
        let overlap: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-7);
    }
}

#[test]
fn state_invariants() {
    for st in [solve_exact(&spec(11, 0.5), &SolverParams::default()).unwrap(), dmrg(31, 0.5)] {
        let n = st.n_sites();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((st.energy_expectation().unwrap() - st.energy).abs() < 1e-8);
        let (g0, g1) = symmetry_generators(n).unwrap();
        assert!((st.expectation(&g0).unwrap() - 1.0).abs() < 1e-8);
        assert!((st.expectation(&g1).unwrap() - 1.0).abs() < 1e-8);
        assert!(st.convergence.converged);
        st.require_converged().unwrap();
    }
}

#[test]
fn exact_ground_state_is_gapped() {
    for alpha in [0.0, 0.4, 0.75] {
        let st = solve_exact(&spec(9, alpha), &SolverParams::default()).unwrap();
        assert!(st.convergence.gap.unwrap() > 1e-8);
        assert!(!st.convergence.near_degenerate);
    }
}

#[test]
fn sweep_energies_do_not_increase() {
    let st = dmrg(41, 0.5);
    let e = &st.convergence.sweep_energies;
    assert!(e.len() >= 2);
    for w in e.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{w:?}");
    }
    assert!(st.max_bond() <= st.params.chi_max);
    assert!(st.convergence.residual < 1e-6);
    match &st.representation {
        Representation::Mps(m) => assert!(m.mps().bond_dims().iter().all(|&d| d <= 64)),
        Representation::Dense(_) => panic!("expected an MPS"),
    }
}

#[test]
fn solve_dispatches_by_size() {
    assert!(solve(&spec(AUTO_EXACT_SITES, 0.2), &SolverParams::default()).unwrap().is_dense());
    assert!(!solve(&spec(AUTO_EXACT_SITES + 2, 0.2), &SolverParams::default()).unwrap().is_dense());
    assert!(matches!(solve_exact(&spec(21, 0.2), &SolverParams::default()), Err(Error::Capacity(_))));
}

#[test]
fn hamiltonian_terms() {
    let h = build_hamiltonian(&spec(7, 0.3)).unwrap();
    assert_eq!(h.terms.len(), 7 + 5);
    let st = solve_exact(&spec(7, 0.3), &SolverParams::default()).unwrap();
    assert!((st.energy_expectation().unwrap() - st.energy).abs() < 1e-10);
}

#[test]
fn expectation_errors() {
    let st = solve_exact(&spec(7, 0.3), &SolverParams::default()).unwrap();
    let anti = PauliString::parse("+iZ1", 7).unwrap();
    assert!(matches!(st.expectation(&anti), Err(Error::NotHermitian(Phase::I))));
    assert!(matches!(st.expectation(&PauliString::identity(9)), Err(Error::ShapeMismatch { .. })));
    let mp = dmrg(9, 0.3);
    assert!(matches!(mp.expectation(&anti), Err(Error::NotHermitian(_))));
    assert!(matches!(ChainSpec::new(11, 0.8), Err(Error::PhaseRange(_))));
    let bad = SolverParams { chi_max: 0, ..SolverParams::default() };
    assert!(matches!(solve(&spec(9, 0.1), &bad), Err(Error::InvalidParams(_))));
}

#[test]
fn translation_invariance_in_the_bulk() {
    let n = 201;
    let st = dmrg(n, 0.7);
    for k in (n / 3..2 * n / 3).filter(|k| k % 2 == 1) {
        let a = st.expectation(&string_order_geq(k, n).unwrap()).unwrap();
        let b = st.expectation(&string_order_geq(k + 2, n).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-4, "k={k}: {a} vs {b}");
    }
}
