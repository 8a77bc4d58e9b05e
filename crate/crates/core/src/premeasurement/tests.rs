use super::*;
use crate::hilbert::partial_trace;
use crate::linalg::c;
use crate::observables::observable_from_matrix;
use proptest::prelude::*;

fn qubit(label: &str) -> SubsystemLayout {
    SubsystemLayout::single(label, 2).unwrap()
}

fn ket(label: &str, amps: &[C64]) -> StateVector {
    let l = SubsystemLayout::single(label, amps.len()).unwrap();
    StateVector::from_amplitudes(l, amps.to_vec()).unwrap()
}

fn plus() -> StateVector {
    let s = 0.5f64.sqrt();
    ket("A", &[c(s, 0.0), c(s, 0.0)])
}

/// Measured `diag(0, 1)` on A, pointer `diag(0, 1)` on B, pointer states
/// `|0⟩, |1⟩`, ready `|0⟩`.
fn z_premeasurement() -> Premeasurement {
    let measured = SpectralObservable::diagonal(qubit("A"), &[0.0, 1.0]).unwrap();
    let pointer = SpectralObservable::diagonal(qubit("B"), &[0.0, 1.0]).unwrap();
    let basis = SubsystemBasis::canonical("B", 2);
    let ready = StateVector::basis(qubit("B"), 0).unwrap();
    Premeasurement::ideal(measured, pointer, &basis, ready).unwrap()
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Oracle for the ideal expansion: `Σ_k (E^k φ) ⊗ φ^k` by explicit index loops.
fn ideal_expansion(pm: &Premeasurement, phi: &CVector) -> CVector {
    let da = pm.object().total_dim();
    let db = pm.instrument().total_dim();
    let mut out = CVector::zeros(da * db);
    for (branch, pointer_state) in pm.measured().branches().iter().zip(pm.pointer_states()) {
        let e = branch.projector.matrix();
        for i in 0..da {
            let mut component = C64::new(0.0, 0.0);
            for j in 0..da {
                component += e[(i, j)] * phi[j];
            }
            for m in 0..db {
                out[i * db + m] += component * pointer_state[m];
            }
        }
    }
    out
}

#[test]
fn qubit_z_premeasurement_entangles_plus() {
    // Pauli-Z: branch 0 is eigenvalue −1 (|1⟩), so its pointer state is |1⟩_B
    let z = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
    let measured = observable_from_matrix(qubit("A"), &z, 1e-8).unwrap();
    let pointer = observable_from_matrix(qubit("B"), &z, 1e-8).unwrap();
    let states = vec![basis_vector(2, 1), basis_vector(2, 0)];
    let basis = SubsystemBasis::new("B", 2, states).unwrap();
    let ready = StateVector::basis(qubit("B"), 0).unwrap();
    let pm = Premeasurement::ideal(measured, pointer, &basis, ready).unwrap();
    let out = pm.evolve(&plus()).unwrap();
    let s = 0.5f64.sqrt();
    let expected = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    assert!((out.amplitudes() - expected).norm() < 1e-12);
}

#[test]
fn sharp_input_is_unchanged() {
    let mut rng = random::rng(1);
    let pm = Premeasurement::random_ideal(&mut rng, 3, 4).unwrap();
    for (k, b) in pm.measured().branches().iter().enumerate() {
        let v = b.projector.matrix() * random::gaussian_vector(&mut rng, 3);
        let phi = StateVector::new(pm.object().clone(), v.unscale(v.norm())).unwrap();
        let out = pm.evolve(&phi).unwrap();
        let expected = kron_vec(phi.amplitudes(), &pm.pointer_states()[k]);
        assert!((out.amplitudes() - expected).norm() < 1e-10);
        let rho = partial_trace(&out, &["B"]).unwrap();
        assert!((rho.matrix() - phi.outer()).norm() < 1e-10);
    }
}

#[test]
fn random_three_level_matches_term_sum() {
    let mut rng = random::rng(2);
    for _ in 0..20 {
        let pm = Premeasurement::random_ideal(&mut rng, 3, 3).unwrap();
        let phi = random::unit_vector(&mut rng, 3);
        let out = pm.evolve(&StateVector::new(pm.object().clone(), phi.clone()).unwrap()).unwrap();
        assert!((out.amplitudes() - ideal_expansion(&pm, &phi)).norm() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_dressings_reproduce_ideal() {
    let mut rng = random::rng(3);
    let pm = Premeasurement::random_ideal(&mut rng, 3, 4).unwrap();
    let dressings = vec![Dressing::identity(3, 4); pm.measured().len()];
    let exact = Premeasurement::exact(&pm, &dressings).unwrap();
    assert!((exact.unitary() - pm.unitary()).norm() < 1e-12);
}

#[test]
fn flipping_dressing_keeps_calibration() {
    let pm = z_premeasurement();
    let dressings = vec![
        Dressing {
            object: pauli_x(),
            instrument: linalg::identity(2),
        },
        Dressing::identity(2, 2),
    ];
    let exact = Premeasurement::exact(&pm, &dressings).unwrap();
    // oracle: (X ⊗ |0⟩⟨0| + I ⊗ |1⟩⟨1|) · CNOT, written out by hand
    let m = |rows: [[f64; 4]; 4]| CMatrix::from_fn(4, 4, |i, j| c(rows[i][j], 0.0));
    let cnot = m([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]]);
    let dressing = m([[0., 0., 1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., 1.]]);
    assert!((exact.unitary() - dressing * cnot).norm() < 1e-12);

    let up = StateVector::basis(qubit("A"), 0).unwrap();
    let out = exact.evolve(&up).unwrap();
    // object flipped to |1⟩, pointer still at position 0
    assert!((out.amplitudes() - basis_vector(4, 2)).norm() < 1e-12);
    assert!(exact.check_calibration(20, 1).pass);
}

#[test]
fn random_dressings_reproduce_probabilities() {
    let mut rng = random::rng(4);
    let pm = Premeasurement::random_ideal(&mut rng, 2, 3).unwrap();
    let exact = Premeasurement::exact(&pm, &pm.random_dressings(&mut rng)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let phi = random::unit_vector(&mut rng, 2);
        let out = exact.evolve(&StateVector::new(exact.object().clone(), phi.clone()).unwrap()).unwrap();
        for (k, b) in exact.measured().branches().iter().enumerate() {
            let born = phi.dotc(&(b.projector.matrix() * &phi)).re;
            let f = exact.pointer().projector(exact.index_map()[k]).embed_into(exact.layout()).unwrap();
            let pointer = out.amplitudes().dotc(&(f * out.amplitudes())).re;
            worst = worst.max((born - pointer).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn condition_checks_on_ideal_and_exact() {
    let mut rng = random::rng(5);
    let pm = Premeasurement::random_ideal(&mut rng, 4, 6).unwrap();
    for r in pm.check_all(50, 9) {
        assert!(r.pass, "{r:?}");
        assert!(r.max_residual < 1e-12);
    }
    let exact = Premeasurement::exact(&pm, &pm.random_dressings(&mut rng)).unwrap();
    for r in exact.check_all(50, 9) {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn identity_unitary_is_not_a_premeasurement() {
    let measured = SpectralObservable::diagonal(qubit("A"), &[0.0, 1.0]).unwrap();
    let pointer = SpectralObservable::diagonal(qubit("B"), &[0.0, 1.0]).unwrap();
    let s = 0.5f64.sqrt();
    let ready = ket("B", &[c(s, 0.0), c(s, 0.0)]);
    let pm = Premeasurement::ideal(measured, pointer, &SubsystemBasis::canonical("B", 2), ready).unwrap();
    let bogus = pm.with_unitary(linalg::identity(4)).unwrap();
    let r = bogus.check_calibration(10, 0);
    assert!(!r.pass);
    assert!(r.max_residual > 0.5);
}

#[test]
fn plus_state_has_equal_pointer_probabilities() {
    let pm = z_premeasurement();
    let out = pm.evolve(&plus()).unwrap();
    for j in 0..2 {
        let f = pm.pointer().projector(j).embed_into(pm.layout()).unwrap();
        let p = out.amplitudes().dotc(&(f * out.amplitudes())).re;
        assert!((p - 0.5).abs() < 1e-12);
    }
}

#[test]
fn phase_swapped_unitary_fails_checks() {
    let mut rng = random::rng(6);
    let pm = Premeasurement::random_ideal(&mut rng, 3, 3).unwrap();
    let bad = pm.phase_swapped().unwrap();
    assert!(!bad.check_probability_reproduction(50, 1).pass);
    assert!(!bad.check_dynamical(50, 1).pass);
    assert!(!z_premeasurement().phase_swapped().unwrap().check_calibration(10, 1).pass);
}

#[test]
fn random_unitaries_fail_dynamical_check() {
    let mut rng = random::rng(7);
    let pm = z_premeasurement();
    for _ in 0..100 {
        let u = random::unitary(&mut rng, 4);
        let r = pm.with_unitary(u).unwrap().check_dynamical(10, 3);
        assert!(r.max_residual > 1e-3);
        assert!(!r.pass);
    }
}

#[test]
fn luders_state_examples() {
    let pm = z_premeasurement();
    let rho = luders_state(&plus(), pm.measured()).unwrap();
    assert!((rho.matrix() - linalg::identity(2).scale(0.5)).norm() < 1e-12);

    let up = StateVector::basis(qubit("A"), 1).unwrap();
    let rho = luders_state(&up, pm.measured()).unwrap();
    assert!((rho.matrix() - up.outer()).norm() < 1e-15);

    let mut rng = random::rng(8);
    for _ in 0..10 {
        let pm = Premeasurement::random_ideal(&mut rng, 4, 4).unwrap();
        let phi = StateVector::new(pm.object().clone(), random::unit_vector(&mut rng, 4)).unwrap();
        let reduced = partial_trace(&pm.evolve(&phi).unwrap(), &["B"]).unwrap();
        let luders = luders_state(&phi, pm.measured()).unwrap();
        assert!((reduced.matrix() - luders.matrix()).norm() < 1e-10);
    }
}

#[test]
fn branch_decomposition_examples() {
    let tol = Tolerances::default();
    let pm = z_premeasurement();
    let up = StateVector::basis(qubit("A"), 0).unwrap();
    let d = branch_decomposition(&pm.evolve(&up).unwrap(), pm.pointer(), &tol).unwrap();
    assert_eq!(d.len(), 1);
    assert!((d.branches[0].weight - 1.0).abs() < 1e-12);
    assert!(d.dropped_weight < 1e-20);

    let d = branch_decomposition(&pm.evolve(&plus()).unwrap(), pm.pointer(), &tol).unwrap();
    assert_eq!(d.len(), 2);
    for (k, b) in d.branches.iter().enumerate() {
        assert!((b.weight - 0.5).abs() < 1e-12);
        let component = b.component.as_pure().unwrap();
        assert!((component.amplitudes() - basis_vector(4, 3 * k)).norm() < 1e-12);
    }

    let mut rng = random::rng(9);
    for _ in 0..10 {
        let pm = Premeasurement::random_ideal(&mut rng, 3, 4).unwrap();
        let pm = Premeasurement::exact(&pm, &pm.random_dressings(&mut rng)).unwrap();
        let phi = StateVector::new(pm.object().clone(), random::unit_vector(&mut rng, 3)).unwrap();
        let d = branch_decomposition(&pm.evolve(&phi).unwrap(), pm.pointer(), &tol).unwrap();
        assert!((d.total_weight() - 1.0).abs() < 1e-10);
        for (k, b) in pm.measured().branches().iter().enumerate() {
            let born = phi.amplitudes().dotc(&(b.projector.matrix() * phi.amplitudes())).re;
            let w = d.branch(pm.index_map()[k]).map_or(0.0, |b| b.weight);
            assert!((born - w).abs() < 1e-10);
        }
    }
}

#[test]
fn completion_choice_does_not_change_physics() {
    let mut rng = random::rng(10);
    let pm = Premeasurement::random_ideal(&mut rng, 3, 4).unwrap();
    let other = Premeasurement::ideal_with(
        pm.measured().clone(),
        pm.pointer().clone(),
        &SubsystemBasis::new("B", 4, pm.pointer_states().to_vec()).unwrap(),
        pm.ready_state().clone(),
        pm.index_map().to_vec(),
        Completion::Seeded(99),
    )
    .unwrap();
    assert!((pm.unitary() - other.unitary()).norm() > 1e-3);
    for _ in 0..10 {
        let phi = StateVector::new(pm.object().clone(), random::unit_vector(&mut rng, 3)).unwrap();
        let a = pm.evolve(&phi).unwrap();
        let b = other.evolve(&phi).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
    }
    for r in other.check_all(20, 4) {
        assert!(r.pass);
    }
}

#[test]
fn construction_errors() {
    let h = random::degenerate_hermitian(&mut random::rng(11), 3, 3);
    let measured = observable_from_matrix(SubsystemLayout::single("A", 3).unwrap(), &h, 1e-8).unwrap();
    let pointer = SpectralObservable::diagonal(qubit("B"), &[0.0, 1.0]).unwrap();
    let ready = StateVector::basis(qubit("B"), 0).unwrap();
    let err = Premeasurement::ideal(measured, pointer, &SubsystemBasis::canonical("B", 2), ready.clone());
    assert!(matches!(err, Err(Error::InstrumentTooSmall { .. })));

    let measured = SpectralObservable::diagonal(qubit("A"), &[0.0, 1.0]).unwrap();
    let pointer = SpectralObservable::diagonal(qubit("B"), &[0.0, 1.0]).unwrap();
    let swapped = SubsystemBasis::new("B", 2, vec![basis_vector(2, 1), basis_vector(2, 0)]).unwrap();
    let err = Premeasurement::ideal(measured, pointer, &swapped, ready);
    assert!(matches!(err, Err(Error::PointerStateOutsideRange { index: 0, .. })));

    let pm = z_premeasurement();
    let leaky = vec![
        Dressing {
            object: linalg::identity(2),
            instrument: pauli_x(),
        },
        Dressing::identity(2, 2),
    ];
    assert!(matches!(Premeasurement::exact(&pm, &leaky), Err(Error::DressingLeak { index: 0, .. })));

    let wrong = StateVector::basis(SubsystemLayout::single("A", 3).unwrap(), 0).unwrap();
    assert!(matches!(pm.evolve(&wrong), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn index_map_can_skip_pointer_branches() {
    // 2 measured branches registered on pointer positions 2 and 0 of a 3-outcome pointer
    let measured = SpectralObservable::diagonal(qubit("A"), &[0.0, 1.0]).unwrap();
    let b = SubsystemLayout::single("B", 3).unwrap();
    let pointer = SpectralObservable::diagonal(b.clone(), &[0.0, 1.0, 2.0]).unwrap();
    let states = SubsystemBasis::new("B", 3, vec![basis_vector(3, 2), basis_vector(3, 0)]).unwrap();
    let ready = StateVector::basis(b, 1).unwrap();
    let pm = Premeasurement::ideal_with(measured, pointer, &states, ready, vec![2, 0], Completion::Canonical).unwrap();
    for r in pm.check_all(30, 5) {
        assert!(r.pass, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equivalence_triangle_holds(
        seed in any::<u64>(),
        da in 2usize..=4,
        db in prop::sample::select(vec![2usize, 3, 4, 6]),
    ) {
        let mut rng = random::rng(seed);
        let pm = Premeasurement::random_ideal(&mut rng, da, db).unwrap();
        let exact = Premeasurement::exact(&pm, &pm.random_dressings(&mut rng)).unwrap();
        for report in pm.check_all(10, seed).into_iter().chain(exact.check_all(10, seed)) {
            prop_assert!(report.pass, "{:?}", report);
        }
    }
}
