use cluster_mbqc::channel::{channel_matrix, Axis, RotationSchedule};
use cluster_mbqc::ground_state::{solve_dmrg, solve_exact, GroundState, SolverParams};
use cluster_mbqc::pauli::{string_order_geq, ChainSpec};
use cluster_mbqc_lab::cache::{GroundStateCache, Source};
use cluster_mbqc_lab::config::{Experiment, ExperimentConfig, Overrides};
use cluster_mbqc_lab::persist::{self, decode, encode, load, save, sidecar_path, Sidecar};
use cluster_mbqc_lab::table::{Kind, ResultTable};
use cluster_mbqc_lab::LabError;
use proptest::prelude::*;

fn spec(n: usize, alpha: f64) -> ChainSpec {
    ChainSpec::new(n, alpha).unwrap()
}

fn observables(st: &GroundState) -> Vec<f64> {
    let n = st.n_sites();
    let mut out = vec![st.energy, st.energy_expectation().unwrap()];
    for k in 2..n {
        out.push(st.expectation(&string_order_geq(k, n).unwrap()).unwrap());
    }
    let s = RotationSchedule::with_gamma(Axis::Z, 2, 2, 3, 0.2, 0.3).unwrap();
    out.extend(channel_matrix(st, &s).unwrap().matrix.iter().copied());
    out
}

#[test]
fn round_trip_preserves_states() {
    let dir = tempfile::tempdir().unwrap();
    let states = [
        solve_exact(&spec(9, 0.4), &SolverParams::default()).unwrap(),
        solve_dmrg(&spec(21, -0.3), &SolverParams::default()).unwrap(),
    ];
    for (i, st) in states.iter().enumerate() {
        let path = dir.path().join(format!("s{i}.bin"));
        save(st, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(encode(&back), encode(st));
        assert_eq!(back.energy.to_bits(), st.energy.to_bits());
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side.n_sites, st.n_sites());
        assert_eq!(side.format_version, persist::FORMAT_VERSION);
        assert_eq!(side.representation, if st.is_dense() { "dense" } else { "mps" });
    }
}

#[test]
fn corrupt_files_are_rejected() {
    let st = solve_exact(&spec(7, 0.2), &SolverParams::default()).unwrap();
    let bytes = encode(&st);
    assert!(matches!(decode(&bytes[..bytes.len() - 3]), Err(LabError::Format(_))));
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(matches!(decode(&wrong), Err(LabError::Format(_))));
    assert!(decode(&[]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gs.bin");
    save(&st, &path).unwrap();
    let mut flipped = std::fs::read(&path).unwrap();
    let last = flipped.len() - 1;
    flipped[last] ^= 1;
    std::fs::write(&path, flipped).unwrap();
    assert!(matches!(load(&path), Err(LabError::Format(_))));
}

#[test]
fn cached_state_reproduces_observables() {
    let dir = tempfile::tempdir().unwrap();
    let cache = GroundStateCache::new(dir.path());
    let (s, p) = (spec(25, 0.45), SolverParams::default());
    let (first, src) = cache.get_or_solve(&s, &p).unwrap();
    assert_eq!(src, Source::Solved);
    assert!(cache.path_for(&s, &p).unwrap().exists());
    let (second, src) = cache.get_or_solve(&s, &p).unwrap();
    assert_eq!(src, Source::Cached);
    for (a, b) in observables(&first).iter().zip(observables(&second)) {
        assert!((a - b).abs() <= 1e-10);
    }
    let other = SolverParams { chi_max: 32, ..p.clone() };
    assert_ne!(cache.path_for(&s, &p), cache.path_for(&s, &other));
    assert!(GroundStateCache::disabled().path_for(&s, &p).is_none());
}

#[test]
fn config_round_trip_and_overrides() {
    for e in Experiment::ALL {
        for desk in [false, true] {
            let cfg = ExperimentConfig::preset(e, desk);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
    }
    let mut cfg = ExperimentConfig::preset(Experiment::Custom, false);
    let before = cfg.hash();
    Overrides { alpha: Some(-0.2), n_sites: Some(31), chi_max: Some(16), ..Default::default() }
        .apply(&mut cfg)
        .unwrap();
    assert_eq!(cfg.chain.alpha, vec![-0.2]);
    assert_eq!(cfg.solver.params().chi_max, 16);
    assert_ne!(cfg.hash(), before);
    let bad = Overrides { alpha: Some(0.9), ..Default::default() }.apply(&mut cfg);
    assert!(matches!(bad, Err(LabError::Config(_))));
    assert!(ExperimentConfig::from_toml("experiment = \"custom\"\nbogus = 1").is_err());
    assert_eq!("thm2".parse::<Experiment>().unwrap(), Experiment::Thm2Optimality);
    assert!("fig9".parse::<Experiment>().is_err());
}

#[test]
fn tables_write_csv_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = ResultTable::new("demo", &[("delta", Kind::Int), ("f", Kind::Float)]);
    t.push(vec![2usize.into(), 0.25.into()]).unwrap();
    t.push(vec![4usize.into(), 0.125.into()]).unwrap();
    assert!(t.push(vec![6usize.into()]).is_err());
    t.push_error("delta=8", "does not fit");
    let files = t.write(dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));
    let text = t.to_csv().unwrap();
    assert!(text.starts_with("delta,f\n2,"));
    assert_eq!(t.ints("delta").unwrap(), &[2, 4]);
    assert!(t.errors_csv().unwrap().contains("does not fit"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dense_round_trip(alpha in -0.75f64..0.75, n in prop::sample::select(vec![5usize, 7, 9])) {
        let st = solve_exact(&spec(n, alpha), &SolverParams::default()).unwrap();
        let bytes = encode(&st);
        prop_assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
    }
}
