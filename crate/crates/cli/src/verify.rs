//! Oracle comparison, conservation and root-algebra audit over a parameter grid.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use tcxy::oracle::{ExactPropagator, compare_states};
use tcxy::{AnalyticPropagator, Preset, RootCache};

use crate::config::{Couplings, RunConfig, TimeGrid};
use crate::error::CliResult;
use crate::sweep::prepare;

/// Largest accepted analytic-vs-eigendecomposition coefficient deviation.
pub const ORACLE_TOLERANCE: f64 = 1.0e-8;
pub const NORM_TOLERANCE: f64 = 1.0e-10;
pub const EXCITATION_TOLERANCE: f64 = 1.0e-9;
/// Root residuals are already divided by the manifold scale.
pub const ROOT_TOLERANCE: f64 = 1.0e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyGrid {
    pub lambda1: f64,
    /// Exchange couplings in units of λ₁.
    pub lambda2: Vec<f64>,
    pub delta: Vec<f64>,
    pub nbar: Vec<f64>,
    pub presets: Vec<Preset>,
    pub time_grid: TimeGrid,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: vec![0.0, 0.1, 0.5, 1.0],
            delta: vec![0.0, 0.5, 1.0],
            nbar: vec![10.0, 20.0],
            presets: Preset::ALL.to_vec(),
            time_grid: TimeGrid {
                tau_max: 50.0,
                points: 512,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub lambda2: f64,
    pub delta: f64,
    pub nbar: f64,
    pub preset: Preset,
    pub nmax: usize,
    pub max_deviation: f64,
    /// max |‖ψ(t)‖² − ‖ψ(0)‖²|
    pub norm_drift: f64,
    /// max |⟨N̂⟩(t) − ⟨N̂⟩(0)| / ⟨N̂⟩(0)
    pub excitation_drift: f64,
    pub max_vieta_residual: f64,
    pub max_polynomial_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub points: Vec<GridPoint>,
    #[serde(serialize_with = "seconds")]
    pub elapsed: Duration,
}

fn seconds<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn worst(points: &[GridPoint], f: impl Fn(&GridPoint) -> f64) -> f64 {
    points.iter().map(f).fold(0.0, f64::max)
}

impl VerifyReport {
    pub fn max_deviation(&self) -> f64 {
        worst(&self.points, |p| p.max_deviation)
    }
    pub fn max_norm_drift(&self) -> f64 {
        worst(&self.points, |p| p.norm_drift)
    }
    pub fn max_excitation_drift(&self) -> f64 {
        worst(&self.points, |p| p.excitation_drift)
    }
    pub fn max_vieta_residual(&self) -> f64 {
        worst(&self.points, |p| p.max_vieta_residual)
    }
    pub fn max_polynomial_residual(&self) -> f64 {
        worst(&self.points, |p| p.max_polynomial_residual)
    }

    pub fn oracle_ok(&self) -> bool {
        self.max_deviation() < ORACLE_TOLERANCE
    }
    pub fn conservation_ok(&self) -> bool {
        self.max_norm_drift() < NORM_TOLERANCE && self.max_excitation_drift() < EXCITATION_TOLERANCE
    }
    pub fn roots_ok(&self) -> bool {
        self.max_vieta_residual() < ROOT_TOLERANCE
            && self.max_polynomial_residual() < ROOT_TOLERANCE
    }
    pub fn passed(&self) -> bool {
        self.oracle_ok() && self.conservation_ok() && self.roots_ok()
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> Vec<String> {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        vec![
            format!(
                "{} oracle equivalence: max deviation {:.3e} over {} grid points ({:.2} s)",
                verdict(self.oracle_ok()),
                self.max_deviation(),
                self.points.len(),
                self.elapsed.as_secs_f64()
            ),
            format!(
                "{} conservation: norm drift {:.3e}, excitation drift {:.3e}",
                verdict(self.conservation_ok()),
                self.max_norm_drift(),
                self.max_excitation_drift()
            ),
            format!(
                "{} root algebra: Vieta {:.3e}, polynomial {:.3e}",
                verdict(self.roots_ok()),
                self.max_vieta_residual(),
                self.max_polynomial_residual()
            ),
        ]
    }
}

fn audit(
    grid: &VerifyGrid,
    lambda2: f64,
    delta: f64,
    nbar: f64,
    preset: Preset,
) -> CliResult<GridPoint> {
    let cfg = RunConfig {
        params: Couplings {
            lambda1: grid.lambda1,
            lambda2: lambda2 * grid.lambda1,
            delta,
        },
        nbar,
        time_grid: grid.time_grid,
        ..RunConfig::default().with_preset(preset)
    };
    let (params, state0) = prepare(&cfg)?;
    let cache = RootCache::new();
    let mut max_vieta = 0.0_f64;
    let mut max_poly = 0.0_f64;
    for n in 0..state0.blocks.len() {
        let roots = cache.roots(&params, n)?;
        max_vieta = roots
            .vieta_residuals()
            .into_iter()
            .fold(max_vieta, f64::max);
        max_poly = max_poly.max(roots.polynomial_residual());
    }
    let analytic = AnalyticPropagator::with_cache(&params, &state0, &cache)?;
    let exact = ExactPropagator::new(&params, &state0);
    let norm0 = state0.norm_sqr();
    let exc0 = state0.excitation_number();
    let unit = cfg.time_unit();
    let (mut dev, mut norm_drift, mut exc_drift) = (0.0_f64, 0.0_f64, 0.0_f64);
    for tau in cfg.time_grid.taus() {
        let t = tau / unit;
        let s = analytic.evolve(t);
        dev = dev.max(compare_states(&s, &exact.evolve(t))?.max_abs);
        norm_drift = norm_drift.max((s.norm_sqr() - norm0).abs());
        exc_drift = exc_drift.max((s.excitation_number() - exc0).abs() / exc0.abs());
    }
    Ok(GridPoint {
        lambda2,
        delta,
        nbar,
        preset,
        nmax: state0.nmax(),
        max_deviation: dev,
        norm_drift,
        excitation_drift: exc_drift,
        max_vieta_residual: max_vieta,
        max_polynomial_residual: max_poly,
    })
}

pub fn run_verify(grid: &VerifyGrid) -> CliResult<VerifyReport> {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for &l2 in &grid.lambda2 {
        for &d in &grid.delta {
            for &n in &grid.nbar {
                for &p in &grid.presets {
                    jobs.push((l2, d, n, p));
                }
            }
        }
    }
    let points = jobs
        .into_par_iter()
        .map(|(l2, d, n, p)| audit(grid, l2, d, n, p))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(VerifyReport {
        points,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_grid_passes() {
        let grid = VerifyGrid {
            lambda2: vec![0.5],
            delta: vec![0.5],
            nbar: vec![5.0],
            presets: vec![Preset::PsiS],
            time_grid: TimeGrid {
                tau_max: 10.0,
                points: 32,
            },
            ..VerifyGrid::default()
        };
        let report = run_verify(&grid).unwrap();
        assert_eq!(report.points.len(), 1);
        assert!(report.passed(), "{:?}", report.summary());
        assert!(report.summary().iter().all(|l| l.starts_with("PASS")));
    }
}
