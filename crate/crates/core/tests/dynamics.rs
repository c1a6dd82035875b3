//! Property tests of the closed-form dynamics through the public API.

use proptest::prelude::*;
use tcxy::model::DEFAULT_TAIL_TOLERANCE;
use tcxy::{
    AnalyticPropagator, C64, ModelParams, Preset, Qubit, QubitInitState, StateVector,
    coherent_weights, initial_state, inversion, qubits_rdm,
};

fn preset() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn prepared(preset: Preset, nbar: f64) -> StateVector {
    let field = coherent_weights(C64::new(nbar.sqrt(), 0.0), DEFAULT_TAIL_TOLERANCE)
        .unwrap()
        .with_revival_floor();
    initial_state(&preset.state(), &field)
}

fn symmetric_state(a: f64, bc: f64, d: f64, phase: f64) -> QubitInitState {
    let norm = (a * a + 2.0 * bc * bc + d * d).sqrt();
    let p = C64::from_polar(1.0, phase);
    QubitInitState::new(
        C64::new(a / norm, 0.0),
        p * (bc / norm),
        p * (bc / norm),
        C64::new(d / norm, 0.0),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_and_excitation_number_are_conserved(
        preset in preset(),
        lambda1 in 0.1f64..2.0,
        lambda2 in 0.0f64..2.0,
        delta in -1.0f64..1.0,
        nbar in 1.0f64..20.0,
        tau in 0.0f64..1.0e4,
    ) {
        let params = ModelParams::rotating(lambda1, lambda2, delta).unwrap();
        let s0 = prepared(preset, nbar);
        let s = AnalyticPropagator::new(&params, &s0).unwrap().evolve(tau);
        prop_assert!((s.norm_sqr() - s0.norm_sqr()).abs() < 1e-10);
        let n0 = s0.excitation_number();
        prop_assert!((s.excitation_number() - n0).abs() < 1e-9 * n0.abs());
    }

    #[test]
    fn symmetric_qubits_stay_symmetric(
        a in 0.0f64..1.0,
        bc in 0.01f64..1.0,
        d in 0.0f64..1.0,
        phase in 0.0f64..6.3,
        lambda2 in 0.0f64..2.0,
        delta in -1.0f64..1.0,
        tau in 0.0f64..50.0,
    ) {
        let params = ModelParams::rotating(1.0, lambda2, delta).unwrap();
        let field = coherent_weights(C64::new(3.0, 0.0), DEFAULT_TAIL_TOLERANCE).unwrap();
        let s0 = initial_state(&symmetric_state(a, bc, d, phase), &field);
        let s = AnalyticPropagator::new(&params, &s0).unwrap().evolve(tau);
        for block in &s.blocks {
            prop_assert!((block[1] - block[2]).norm() < 1e-12);
        }
        prop_assert!((inversion(&s, Qubit::First) - inversion(&s, Qubit::Second)).abs() < 1e-12);
    }

    #[test]
    fn reduced_state_is_physical(
        preset in preset(),
        lambda2 in 0.0f64..1.0,
        delta in 0.0f64..1.0,
        nbar in prop::sample::select(vec![10.0, 20.0]),
        tau in 0.0f64..50.0,
    ) {
        let params = ModelParams::rotating(1.0, lambda2, delta).unwrap();
        let s = AnalyticPropagator::new(&params, &prepared(preset, nbar)).unwrap().evolve(tau);
        let rho = qubits_rdm(&s).unwrap();
        prop_assert!(rho.raw_min_eigenvalue >= -1e-10);
        for q in [Qubit::First, Qubit::Second] {
            prop_assert!(inversion(&s, q).abs() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn presets_are_normalized() {
    for p in Preset::ALL {
        assert!((p.state().norm_sqr() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn inversion_saturates_only_for_pure_excitation() {
    let s = prepared(Preset::PsiE, 10.0);
    assert!((inversion(&s, Qubit::First) - 1.0).abs() < 1e-15);
    let params = ModelParams::rotating(1.0, 0.5, 0.0).unwrap();
    let later = AnalyticPropagator::new(&params, &s).unwrap().evolve(3.0);
    assert!(inversion(&later, Qubit::First) < 1.0 - 1e-3);
}
