use cluster_mbqc::dense::pauli_matrix;
use cluster_mbqc::pauli::{
    cluster_stabilizer, string_order_geq, string_order_pair, symmetry_generators, ChainSpec, Pauli, PauliString, Phase,
};
use cluster_mbqc::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn ps(text: &str, n: usize) -> PauliString {
    PauliString::parse(text, n).unwrap()
}

#[test]
fn string_order_examples() {
    assert_eq!(string_order_geq(1, 5).unwrap(), ps("+Z1 X2 X4 Z5", 5));
    assert_eq!(string_order_geq(2, 5).unwrap(), ps("+Z2 X3 X5", 5));
    assert_eq!(string_order_geq(4, 5).unwrap(), ps("+Z4 X5", 5));
    assert!(matches!(string_order_geq(5, 5), Err(Error::IndexOutOfRange { .. })));
    assert!(matches!(string_order_geq(0, 5), Err(Error::IndexOutOfRange { .. })));

    assert_eq!(string_order_pair(1, 3, 5).unwrap(), ps("+Z1 X2 Z3", 5));
    assert_eq!(string_order_pair(1, 5, 5).unwrap(), string_order_geq(1, 5).unwrap());
    assert_eq!(string_order_pair(2, 4, 7).unwrap(), ps("+Z2 X3 Z4", 7));
    assert!(matches!(string_order_pair(1, 4, 7), Err(Error::Parity(_))));
}

#[test]
fn multiplication_examples() {
    let x = PauliString::single(1, 1, Pauli::X).unwrap();
    let y = PauliString::single(1, 1, Pauli::Y).unwrap();
    assert_eq!(x.try_mul(&x).unwrap(), PauliString::identity(1));
    assert_eq!(x.try_mul(&y).unwrap(), ps("+iZ1", 1));
    assert!(matches!(x.try_mul(&PauliString::identity(2)), Err(Error::ShapeMismatch { .. })));
}

#[test]
fn generators_and_stabilizers() {
    let (g0, g1) = symmetry_generators(5).unwrap();
    assert_eq!(g0, ps("+Z1 X2 X4 Z5", 5));
    assert_eq!(g1, ps("+X1 X3 X5", 5));
    assert!(g0.try_mul(&g0).unwrap().is_identity());
    assert!(g1.try_mul(&g1).unwrap().is_identity());
    let g01 = g0.try_mul(&g1).unwrap();
    assert!(g01.commutes(&g0).unwrap() && g01.commutes(&g1).unwrap());
    assert!(matches!(symmetry_generators(6), Err(Error::Parity(_))));

    assert_eq!(cluster_stabilizer(3, 5).unwrap(), ps("+Z2 X3 Z4", 5));
    assert_eq!(cluster_stabilizer(1, 5).unwrap(), ps("+X1 Z2", 5));
    assert_eq!(cluster_stabilizer(5, 5).unwrap(), ps("+Z4 X5", 5));
    assert!(cluster_stabilizer(6, 5).is_err());
}

#[test]
fn stabilizer_products_build_string_order() {
    let n = 9;
    for k in 1..n {
        let mut prod = PauliString::identity(n);
        // K_{k+1} K_{k+3} ... telescopes into Z_k X.. up to the end of the chain
        for i in (k + 1..=n).step_by(2) {
            prod = prod.try_mul(&cluster_stabilizer(i, n).unwrap()).unwrap();
        }
        assert_eq!(prod, string_order_geq(k, n).unwrap(), "k = {k}");
    }
    let mut prod = PauliString::identity(n);
    for i in (4..=6).step_by(2) {
        prod = prod.try_mul(&cluster_stabilizer(i, n).unwrap()).unwrap();
    }
    assert_eq!(prod, string_order_pair(3, 7, n).unwrap());
}

#[test]
fn product_identity_exhaustive() {
    for n in (3..=13).step_by(2) {
        for k in 1..n {
            for l in (k + 2..n).step_by(2) {
                let a = string_order_geq(k, n).unwrap();
                let b = string_order_pair(k, l, n).unwrap();
                let c = string_order_geq(l, n).unwrap();
                assert!(a.try_mul(&b).unwrap().try_mul(&c).unwrap().is_identity(), "N={n} k={k} l={l}");
                assert_eq!(a.try_mul(&c).unwrap(), b);
            }
        }
    }
}

#[test]
fn symmetries_commute_with_string_order() {
    for n in [5, 7, 9, 11] {
        let (g0, g1) = symmetry_generators(n).unwrap();
        for k in 1..n {
            let a = string_order_geq(k, n).unwrap();
            assert!(a.try_mul(&a).unwrap().is_identity());
            assert!(a.commutes(&g0).unwrap() && a.commutes(&g1).unwrap());
            for l in (k + 2..=n).step_by(2) {
                let b = string_order_pair(k, l, n).unwrap();
                assert!(b.try_mul(&b).unwrap().is_identity());
                assert!(b.commutes(&g0).unwrap() && b.commutes(&g1).unwrap());
            }
        }
    }
}

#[test]
fn constructed_operators_are_hermitian_matrices() {
    let n = 7;
    let mut ops = vec![symmetry_generators(n).unwrap().0, symmetry_generators(n).unwrap().1];
    for k in 1..n {
        ops.push(string_order_geq(k, n).unwrap());
        ops.push(cluster_stabilizer(k, n).unwrap());
    }
    for op in ops {
        assert!(op.is_hermitian());
        let m = pauli_matrix(&op).unwrap();
        assert_eq!(m.adjoint(), m, "{op}");
    }
    assert!(matches!(pauli_matrix(&PauliString::identity(15)), Err(Error::Capacity(_))));
}

#[test]
fn chain_spec_validation() {
    assert!(ChainSpec::new(11, 0.7).is_ok());
    assert!(matches!(ChainSpec::new(11, 0.8), Err(Error::PhaseRange(_))));
    assert!(matches!(ChainSpec::new(10, 0.1), Err(Error::Parity(_))));
    assert!(ChainSpec::new(11, -0.78).is_ok());
    assert!(ChainSpec::new(11, f64::NAN).is_err());
}

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn phase() -> impl Strategy<Value = Phase> {
    (0u8..4).prop_map(Phase::from_power)
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (phase(), proptest::collection::vec(letter(), n)).prop_map(|(p, l)| PauliString::from_letters(p, l))
}

fn kron_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    let single = |l: Pauli| match l {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    };
    // site 1 is the least significant bit, so it is the rightmost factor
    let mut m = DMatrix::from_element(1, 1, p.phase().to_complex());
    for &l in p.letters() {
        m = single(l).kronecker(&m);
    }
    m
}

proptest! {
    #[test]
    fn multiplication_is_associative(a in pauli_string(6), b in pauli_string(6), c in pauli_string(6)) {
        let left = a.try_mul(&b).unwrap().try_mul(&c).unwrap();
        let right = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn square_is_phase_squared(a in pauli_string(7)) {
        let sq = a.try_mul(&a).unwrap();
        prop_assert!(sq.letters().iter().all(|&l| l == Pauli::I));
        prop_assert_eq!(sq.phase(), a.phase() * a.phase());
    }

    #[test]
    fn text_round_trip(a in pauli_string(9)) {
        let text = a.to_string();
        prop_assert_eq!(PauliString::parse(&text, 9).unwrap(), a);
    }

    #[test]
    fn product_matches_matrix_product(a in pauli_string(4), b in pauli_string(4)) {
        let ab = kron_matrix(&a.try_mul(&b).unwrap());
        let want = kron_matrix(&a) * kron_matrix(&b);
        prop_assert!((ab - &want).norm() < 1e-12);
        prop_assert!((pauli_matrix(&a).unwrap() - kron_matrix(&a)).norm() < 1e-12);
    }

    #[test]
    fn commutation_matches_matrices(a in pauli_string(4), b in pauli_string(4)) {
        let (ma, mb) = (kron_matrix(&a), kron_matrix(&b));
        let comm = &ma * &mb - &mb * &ma;
        prop_assert_eq!(a.commutes(&b).unwrap(), comm.norm() < 1e-12);
    }
}
