use cluster_mbqc::channel::{channel_matrix, Axis, RotationSchedule};
use cluster_mbqc::ground_state::{solve_dmrg, solve_exact, GroundState, SolverParams};
use cluster_mbqc::oracle::{
    decorated_expectation, enumerate_branches, enumerate_channel, logical_expectations, readout_bit, side_process_q,
    LogicalInput, MeasurementPlan, ReadoutBasis,
};
use cluster_mbqc::pauli::ChainSpec;
use cluster_mbqc::Error;
use proptest::prelude::*;

fn exact(n: usize, alpha: f64) -> GroundState {
    solve_exact(&ChainSpec::new(n, alpha).unwrap(), &SolverParams::default()).unwrap()
}

#[test]
fn cluster_wire_is_identity() {
    for n in [5, 7, 9] {
        let st = exact(n, 0.0);
        let plan = MeasurementPlan::wire(n).unwrap();
        let e = logical_expectations(&st, &plan, LogicalInput::Plus).unwrap();
        assert_eq!(e.n_branches, 1 << (n - 1));
        assert!((e.values[0] - 1.0).abs() < 1e-10);
        assert!(e.values[1].abs() < 1e-10 && e.values[2].abs() < 1e-10);
        assert!((e.total_probability - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_rotation_at_cluster_point() {
    let st = exact(9, 0.0);
    let beta = 0.4;
    for k in [3, 5, 7] {
        let plan = MeasurementPlan::wire(9).unwrap().with_angle(k, beta).unwrap();
        let e = logical_expectations(&st, &plan, LogicalInput::Plus).unwrap();
        assert!((e.values[0] - beta.cos()).abs() < 1e-9, "k={k}");
        assert!((e.values[1] - beta.sin()).abs() < 1e-9, "k={k}");
        assert!(e.values[2].abs() < 1e-9);
    }
}

#[test]
fn every_branch_agrees_at_cluster_point() {
    let st = exact(9, 0.0);
    let plan = MeasurementPlan::wire(9)
        .unwrap()
        .with_angle(3, 0.3)
        .unwrap()
        .with_angle(4, -0.7)
        .unwrap()
        .with_angle(7, 0.5)
        .unwrap();
    for input in LogicalInput::ALL {
        let branches = enumerate_branches(&st, &plan, input).unwrap();
        let first = branches[0].logical_bloch(input);
        for b in &branches {
            let v = b.logical_bloch(input);
            assert!((0..3).all(|i| (v[i] - first[i]).abs() < 1e-9), "{input:?} {:?}", b.outcomes);
            assert!((b.probability - 1.0 / branches.len() as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn oracle_matches_channel() {
    for (n, alpha) in [(9, 0.3), (11, 0.5), (11, -0.4)] {
        let st = exact(n, alpha);
        for axis in [Axis::Z, Axis::X] {
            let d = if axis == Axis::Z { 3 } else { 1 };
            for m in 1..=3 {
                let s = RotationSchedule::with_gamma(axis, m, 2, d + 2, 0.35, 0.3).unwrap();
                if !s.fits(n) {
                    continue;
                }
                let plan = MeasurementPlan::from_schedule(n, &s).unwrap();
                let o = enumerate_channel(&st, &plan).unwrap();
                let ch = channel_matrix(&st, &s).unwrap();
                let dev = (o.channel - ch.matrix).abs().max();
                assert!(dev < 1e-8, "N={n} alpha={alpha} {axis:?} m={m}: {dev:e}");
                assert!(o.max_prob_deviation < 1e-12);
            }
        }
    }
}

#[test]
fn decorated_observables_reproduce_branch_sums() {
    let st = exact(9, 0.45);
    let plan = MeasurementPlan::wire(9).unwrap().with_angle(3, 0.3).unwrap().with_angle(6, 0.2).unwrap();
    for input in LogicalInput::ALL {
        let e = logical_expectations(&st, &plan, input).unwrap();
        for (i, basis) in ReadoutBasis::ALL.into_iter().enumerate() {
            let d = decorated_expectation(&st, &plan, input, basis).unwrap();
            assert!((d - e.values[i]).abs() < 1e-12, "{input:?} {basis:?}");
        }
    }
}

#[test]
fn symmetric_wire_has_no_logical_z() {
    for alpha in [0.2, 0.6] {
        let st = exact(9, alpha);
        let plan = MeasurementPlan::wire(9).unwrap().with_angle(5, 0.5).unwrap();
        let e = logical_expectations(&st, &plan, LogicalInput::Plus).unwrap();
        assert!(e.values[2].abs() < 1e-10);
    }
}

#[test]
fn oracle_errors() {
    let st = exact(9, 0.2);
    assert!(matches!(
        logical_expectations(&st, &MeasurementPlan::wire(7).unwrap(), LogicalInput::Plus),
        Err(Error::ShapeMismatch { .. })
    ));
    let plan = MeasurementPlan::wire(9).unwrap().with_angle(1, 0.2).unwrap();
    assert!(matches!(enumerate_channel(&st, &plan), Err(Error::Domain(_))));
    assert!(MeasurementPlan::wire(9).unwrap().with_angle(9, 0.1).is_err());
    assert!(MeasurementPlan::wire(8).is_err());

    let mps = solve_dmrg(&ChainSpec::new(9, 0.2).unwrap(), &SolverParams::default()).unwrap();
    let plan = MeasurementPlan::wire(9).unwrap();
    assert!(matches!(logical_expectations(&mps, &plan, LogicalInput::Plus), Err(Error::Representation(_))));

    let big = solve_exact(&ChainSpec::new(15, 0.2).unwrap(), &SolverParams::default()).unwrap();
    let plan = MeasurementPlan::wire(15).unwrap();
    assert!(matches!(logical_expectations(&big, &plan, LogicalInput::Plus), Err(Error::Capacity(_))));
}

#[test]
fn side_processing_and_readout_examples() {
    // s_2 = 1 flips the basis of sites 4, 6, ..
    let s = [0, 1, 0, 0, 0, 0, 0, 0];
    assert_eq!((2..=8).map(|i| side_process_q(&s, i)).collect::<Vec<_>>(), vec![0, 1, 0, 1, 0, 1, 0]);
    let s = [1, 0, 1, 0, 0, 0];
    assert_eq!(side_process_q(&s, 4), 0);
    assert_eq!(side_process_q(&s, 5), 0);
    assert_eq!(side_process_q(&s, 6), 0);
    let s = [1, 0, 0, 0, 0, 0];
    assert_eq!(side_process_q(&s, 4), 1);
    let s = [1, 1, 0, 1];
    assert_eq!(readout_bit(&s, ReadoutBasis::X), 1);
    assert_eq!(readout_bit(&s, ReadoutBasis::Z), 0);
    assert_eq!(readout_bit(&s, ReadoutBasis::Y), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn branch_probabilities_sum_to_one(
        alpha in -0.7f64..0.7,
        angles in proptest::collection::vec(-1.0f64..1.0, 6),
        input in prop::sample::select(LogicalInput::ALL.to_vec()),
    ) {
        let st = exact(7, alpha);
        let mut plan = MeasurementPlan::wire(7).unwrap();
        for (i, &a) in angles.iter().enumerate().skip(1) {
            plan = plan.with_angle(i + 1, a).unwrap();
        }
        let branches = enumerate_branches(&st, &plan, input).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for b in &branches {
            let v = b.logical_bloch(input);
            prop_assert!(v.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-9);
        }
    }
}
