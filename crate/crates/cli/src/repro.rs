//! Canned datasets for the reference figure set (fig2 to fig12).
//!
//! Inversion figures use τ = λ₁t with λ₁ = 1 and λ₂ in units of λ₁. The
//! entanglement figures come in two families: τ = λ₁t with λ₂ in units of λ₁,
//! and τ = λ₂t with λ₂ = 1 and λ₁ in units of λ₂ (including λ₁ = 0).
//! Time horizons are our choice; they cover the collapse and first revival of
//! every panel.

use tcxy::Preset;

use crate::config::{Couplings, Observable, RunConfig, TimeGrid, TimeScale};
use crate::error::{CliError, CliResult};
use crate::sweep::{AxisValue, Dataset, run_keyed};

pub const FIGURES: [&str; 11] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
];

/// Default points per trajectory for line plots and for surface plots.
const LINE_POINTS: usize = 4096;
const SURFACE_POINTS: usize = 1024;

#[derive(Debug, Clone)]
pub struct Figure {
    pub id: &'static str,
    pub description: &'static str,
    pub key_names: Vec<String>,
    pub jobs: Vec<(Vec<AxisValue>, RunConfig)>,
    pub notes: Vec<String>,
}

fn base(preset: Preset, nbar: f64, couplings: Couplings, tau_max: f64, points: usize) -> RunConfig {
    RunConfig {
        params: couplings,
        nbar,
        time_grid: TimeGrid { tau_max, points },
        ..RunConfig::default().with_preset(preset)
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn inversion_lines(id: &'static str, nbar: f64) -> Figure {
    let mut jobs = Vec::new();
    for delta in [0.0, 0.5, 1.0] {
        for lambda2 in [0.0, 0.1, 0.5, 1.0] {
            let mut cfg = base(
                Preset::PsiE,
                nbar,
                Couplings {
                    lambda1: 1.0,
                    lambda2,
                    delta,
                },
                50.0,
                LINE_POINTS,
            );
            cfg.observables = vec![Observable::Inversion];
            jobs.push((
                vec![AxisValue::Number(delta), AxisValue::Number(lambda2)],
                cfg,
            ));
        }
    }
    Figure {
        id,
        description: "inversion of |e1 e2>, panels by detuning, curves by lambda2",
        key_names: names(&["delta", "lambda2"]),
        jobs,
        notes: vec!["tau = lambda1 t; lambda2 in units of lambda1".into()],
    }
}

fn inversion_surface(id: &'static str, preset: Preset, nbar: f64) -> Figure {
    let mut jobs = Vec::new();
    for delta in [0.0, 1.0] {
        for step in 0..=40 {
            let lambda2 = step as f64 / 40.0;
            let mut cfg = base(
                preset,
                nbar,
                Couplings {
                    lambda1: 1.0,
                    lambda2,
                    delta,
                },
                50.0,
                SURFACE_POINTS,
            );
            cfg.observables = vec![Observable::Inversion];
            jobs.push((
                vec![AxisValue::Number(delta), AxisValue::Number(lambda2)],
                cfg,
            ));
        }
    }
    Figure {
        id,
        description: "inversion surface over (lambda2, tau), panels by detuning",
        key_names: names(&["delta", "lambda2"]),
        jobs,
        notes: vec!["tau = lambda1 t; lambda2 in units of lambda1, 41 values on [0, 1]".into()],
    }
}

fn entanglement_field_units(id: &'static str, nbar: f64, delta: f64) -> Figure {
    let mut jobs = Vec::new();
    for lambda2 in [0.0, 0.01, 0.1, 0.5] {
        for preset in Preset::ALL {
            let mut cfg = base(
                preset,
                nbar,
                Couplings {
                    lambda1: 1.0,
                    lambda2,
                    delta,
                },
                40.0,
                LINE_POINTS,
            );
            cfg.observables = vec![Observable::Concurrence, Observable::Eof];
            jobs.push((
                vec![AxisValue::Number(lambda2), AxisValue::Preset(preset)],
                cfg,
            ));
        }
    }
    Figure {
        id,
        description: "entanglement of formation per initial state, panels by lambda2",
        key_names: names(&["lambda2", "preset"]),
        jobs,
        notes: vec!["tau = lambda1 t; lambda2 in units of lambda1".into()],
    }
}

/// Horizon in τ = λ₂t long enough for the first revival at coupling ratio λ₂/λ₁.
fn exchange_horizon(lambda1: f64) -> f64 {
    if lambda1 == 0.0 {
        20.0
    } else if lambda1 >= 0.5 {
        40.0
    } else if lambda1 >= 0.1 {
        1000.0
    } else {
        10000.0
    }
}

fn entanglement_exchange_units(
    id: &'static str,
    nbar: f64,
    delta: f64,
    lambda1s: &[f64],
) -> Figure {
    let mut jobs = Vec::new();
    for &lambda1 in lambda1s {
        for preset in Preset::ALL {
            let couplings = Couplings {
                lambda1,
                lambda2: 1.0,
                delta,
            };
            let mut cfg = base(
                preset,
                nbar,
                couplings,
                exchange_horizon(lambda1),
                LINE_POINTS,
            );
            cfg.time_scale = Some(TimeScale::Lambda2);
            cfg.observables = vec![Observable::Concurrence, Observable::Eof];
            jobs.push((
                vec![AxisValue::Number(lambda1), AxisValue::Preset(preset)],
                cfg,
            ));
        }
    }
    Figure {
        id,
        description: "entanglement of formation per initial state, panels by lambda1",
        key_names: names(&["lambda1", "preset"]),
        jobs,
        notes: vec![
            "tau = lambda2 t with lambda2 = 1; lambda1 in units of lambda2".into(),
            "detuning is kept in absolute units (delta / lambda2)".into(),
        ],
    }
}

pub fn figure(id: &str) -> CliResult<Figure> {
    let key = id.trim().to_ascii_lowercase();
    let key = if key.starts_with("fig") {
        key
    } else {
        format!("fig{key}")
    };
    Ok(match key.as_str() {
        "fig2" => inversion_lines("fig2", 10.0),
        "fig3" => inversion_lines("fig3", 20.0),
        "fig4" => inversion_surface("fig4", Preset::PsiE, 10.0),
        "fig5" => inversion_surface("fig5", Preset::PsiE, 20.0),
        "fig6" => inversion_surface("fig6", Preset::PsiB, 10.0),
        "fig7" => entanglement_field_units("fig7", 20.0, 0.0),
        "fig8" => entanglement_exchange_units("fig8", 20.0, 0.0, &[1.0, 0.5, 0.01, 0.0]),
        "fig9" => entanglement_field_units("fig9", 20.0, 0.5),
        "fig10" => entanglement_exchange_units("fig10", 20.0, 0.5, &[1.0, 0.5, 0.1, 0.01]),
        "fig11" => entanglement_field_units("fig11", 10.0, 0.0),
        "fig12" => entanglement_exchange_units("fig12", 10.0, 0.0, &[1.0, 0.5, 0.01]),
        _ => {
            return Err(CliError::Config(format!(
                "unknown figure `{id}` (expected one of {})",
                FIGURES.join(", ")
            )));
        }
    })
}

/// Compute a figure's dataset, optionally overriding the points per trajectory.
pub fn run_figure(id: &str, points: Option<usize>) -> CliResult<Dataset> {
    let mut fig = figure(id)?;
    if let Some(points) = points {
        for (_, cfg) in &mut fig.jobs {
            cfg.time_grid.points = points;
        }
    }
    let mut ds = run_keyed(fig.key_names, fig.jobs)?;
    ds.notes = std::iter::once(format!("{}: {}", fig.id, fig.description))
        .chain(fig.notes)
        .collect();
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_has_valid_configs() {
        for id in FIGURES {
            let fig = figure(id).unwrap();
            assert!(!fig.jobs.is_empty());
            for (key, cfg) in &fig.jobs {
                assert_eq!(key.len(), fig.key_names.len());
                cfg.validate().unwrap_or_else(|e| panic!("{id}: {e}"));
            }
        }
    }

    #[test]
    fn ids_accept_bare_numbers() {
        assert_eq!(figure("8").unwrap().id, "fig8");
        assert!(figure("fig13").is_err());
    }

    #[test]
    fn exchange_panels_scale_by_lambda2() {
        let fig = figure("fig8").unwrap();
        assert!(
            fig.jobs
                .iter()
                .all(|(_, c)| c.time_unit() == 1.0 && c.params.lambda2 == 1.0)
        );
        assert!(fig.jobs.iter().any(|(_, c)| c.params.lambda1 == 0.0));
    }

    #[test]
    fn small_figure_runs() {
        let ds = run_figure("fig7", Some(16)).unwrap();
        assert_eq!(ds.failures().count(), 0);
        assert_eq!(ds.successes().count(), 12);
        assert!(ds.notes[0].starts_with("fig7"));
    }
}
