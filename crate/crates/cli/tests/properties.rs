//! Property tests of trajectories, sweeps and the revival detector.

use proptest::prelude::*;
use tcxy::Preset;
use tcxy_cli::config::{Couplings, Observable, RunConfig, TimeGrid};
use tcxy_cli::revival::detect_revival;
use tcxy_cli::{AxisValue, RevivalConfig, SweepAxis, run_sweep, run_trajectory};

fn config(preset: Preset, lambda2: f64, delta: f64, nbar: f64) -> RunConfig {
    RunConfig {
        params: Couplings {
            lambda1: 1.0,
            lambda2,
            delta,
        },
        nbar,
        time_grid: TimeGrid {
            tau_max: 30.0,
            points: 64,
        },
        observables: Observable::ALL.to_vec(),
        ..RunConfig::default().with_preset(preset)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rows_respect_physical_bounds(
        preset in prop::sample::select(Preset::ALL.to_vec()),
        lambda2 in 0.0f64..2.0,
        delta in -1.0f64..1.0,
        nbar in 1.0f64..20.0,
    ) {
        let t = run_trajectory(&config(preset, lambda2, delta, nbar)).unwrap();
        for &v in t.column(Observable::Inversion).unwrap() {
            prop_assert!((-1.0..=1.0).contains(&v));
        }
        for o in [Observable::Concurrence, Observable::Eof] {
            for &v in t.column(o).unwrap() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        for &v in t.column(Observable::Norm).unwrap() {
            prop_assert!((v - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_value_sweep_is_the_trajectory(lambda2 in 0.0f64..2.0, nbar in 1.0f64..20.0) {
        let base = config(Preset::PsiS, 0.0, 0.0, nbar);
        let ds = run_sweep(&base, SweepAxis::Lambda2, &[AxisValue::Number(lambda2)]).unwrap();
        let direct = run_trajectory(&config(Preset::PsiS, lambda2, 0.0, nbar)).unwrap();
        let swept = ds.get(&[AxisValue::Number(lambda2)]).unwrap();
        prop_assert_eq!(&swept.tau, &direct.tau);
        prop_assert_eq!(&swept.columns, &direct.columns);
    }

    #[test]
    fn revival_onsets_ignore_offset_and_scale(
        onset in 20.0f64..60.0,
        width in 3.0f64..10.0,
        scale in 0.01f64..100.0,
        offset in -10.0f64..10.0,
    ) {
        let times: Vec<f64> = (0..1024).map(|i| i as f64 * 0.1).collect();
        let burst = |t: f64| {
            let x = (t - onset) / width;
            if (0.0..1.0).contains(&x) { (std::f64::consts::PI * x).sin().powi(2) * (3.0 * t).cos() } else { 0.0 }
        };
        let base: Vec<f64> = times.iter().map(|&t| burst(t) + (-t).exp()).collect();
        let mapped: Vec<f64> = base.iter().map(|v| scale * v + offset).collect();
        let cfg = RevivalConfig::default();
        let a = detect_revival(&times, &base, &cfg).unwrap();
        let b = detect_revival(&times, &mapped, &cfg).unwrap();
        // Thresholds scale with the series; rounding may move a crossing by one sample.
        prop_assert_eq!(a.onsets.len(), b.onsets.len());
        for (x, y) in a.onsets.iter().zip(&b.onsets) {
            prop_assert!((x - y).abs() <= 0.1 + 1e-9);
        }
        prop_assert!(a.first_onset().is_some_and(|t| (t - onset).abs() < 1.0));
    }
}
