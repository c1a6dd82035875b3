//! Trajectories over a τ grid and parameter sweeps built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tcxy::model::DEFAULT_TAIL_TOLERANCE;
use tcxy::observables::entanglement;
use tcxy::oracle::{ExactPropagator, compare_states};
use tcxy::{
    AnalyticPropagator, C64, Error, ModelParams, Preset, Qubit, RootCache, StateVector,
    coherent_weights, initial_state, inversion,
};

use crate::config::{Observable, RunConfig};
use crate::error::{CliError, CliResult};

/// Slack allowed on the physical range of each observable.
const BOUND_SLACK: f64 = 1.0e-12;
/// Allowed departure of the norm from one.
const NORM_SLACK: f64 = 1.0e-9;

/// Columns of one trajectory, aligned with `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub observables: Vec<Observable>,
    /// One column per entry of `observables`.
    pub columns: Vec<Vec<f64>>,
    /// Largest coefficient deviation from the eigendecomposition propagator.
    pub oracle_deviation: Option<Vec<f64>>,
    /// Fock cutoff used.
    pub nmax: usize,
}

impl Trajectory {
    pub fn column(&self, which: Observable) -> Option<&[f64]> {
        self.observables
            .iter()
            .position(|&o| o == which)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// Model constants and the initial composite state for `cfg`.
pub fn prepare(cfg: &RunConfig) -> CliResult<(ModelParams, StateVector)> {
    cfg.validate()?;
    let params = cfg.model_params()?;
    let field = coherent_weights(C64::new(cfg.nbar.sqrt(), 0.0), DEFAULT_TAIL_TOLERANCE)?
        .with_revival_floor();
    let state = initial_state(&cfg.initial_qubits()?, &field);
    let state = if cfg.frozen_sector {
        state
    } else {
        state.without_frozen_sector()
    };
    Ok((params, state))
}

fn check_bounds(which: Observable, value: f64, frozen_sector: bool) -> tcxy::Result<()> {
    let ok = match which {
        Observable::Inversion => value.abs() <= 1.0 + BOUND_SLACK,
        Observable::Concurrence | Observable::Eof => {
            (-BOUND_SLACK..=1.0 + BOUND_SLACK).contains(&value)
        }
        Observable::Norm => !frozen_sector || (value - 1.0).abs() <= NORM_SLACK,
        Observable::Nexp => value.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NumericalDegradation(format!(
            "{} = {value:e} is outside its physical range",
            which.name()
        )))
    }
}

fn evaluate(
    state: &StateVector,
    observables: &[Observable],
    frozen_sector: bool,
) -> tcxy::Result<Vec<f64>> {
    let needs_entanglement = observables
        .iter()
        .any(|o| matches!(o, Observable::Concurrence | Observable::Eof));
    let ent = if needs_entanglement {
        Some(entanglement(state)?)
    } else {
        None
    };
    observables
        .iter()
        .map(|&o| {
            let v = match o {
                Observable::Inversion => inversion(state, Qubit::First),
                Observable::Concurrence => ent.map_or(0.0, |e| e.concurrence),
                Observable::Eof => ent.map_or(0.0, |e| e.eof),
                Observable::Norm => state.norm_sqr().sqrt(),
                Observable::Nexp => state.excitation_number(),
            };
            check_bounds(o, v, frozen_sector)?;
            Ok(v)
        })
        .collect()
}

pub fn run_trajectory(cfg: &RunConfig) -> CliResult<Trajectory> {
    run_trajectory_cached(cfg, &RootCache::new())
}

/// Same as [`run_trajectory`] with manifold roots drawn from `cache`.
pub fn run_trajectory_cached(cfg: &RunConfig, cache: &RootCache) -> CliResult<Trajectory> {
    let (params, state0) = prepare(cfg)?;
    let propagator = AnalyticPropagator::with_cache(&params, &state0, cache)?;
    let oracle = cfg
        .oracle_check
        .then(|| ExactPropagator::new(&params, &state0));
    let unit = cfg.time_unit();
    let tau = cfg.time_grid.taus();
    let rows: Vec<(Vec<f64>, Option<f64>)> = tau
        .par_iter()
        .enumerate()
        .map(|(row, &tau)| {
            let wrap = |source: Error| CliError::Row { row, tau, source };
            let t = tau / unit;
            let state = propagator.evolve(t);
            let values = evaluate(&state, &cfg.observables, cfg.frozen_sector).map_err(wrap)?;
            let deviation = match &oracle {
                Some(exact) => Some(
                    compare_states(&state, &exact.evolve(t))
                        .map_err(wrap)?
                        .max_abs,
                ),
                None => None,
            };
            Ok((values, deviation))
        })
        .collect::<CliResult<_>>()?;

    let mut columns = vec![Vec::with_capacity(tau.len()); cfg.observables.len()];
    let mut deviation = cfg.oracle_check.then(|| Vec::with_capacity(tau.len()));
    for (values, dev) in rows {
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
        if let (Some(d), Some(v)) = (deviation.as_mut(), dev) {
            d.push(v);
        }
    }
    Ok(Trajectory {
        tau,
        observables: cfg.observables.clone(),
        columns,
        oracle_deviation: deviation,
        nmax: state0.nmax(),
    })
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Lambda1,
    Lambda2,
    Delta,
    Nbar,
    Preset,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda1 => "lambda1",
            SweepAxis::Lambda2 => "lambda2",
            SweepAxis::Delta => "delta",
            SweepAxis::Nbar => "nbar",
            SweepAxis::Preset => "preset",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        [
            SweepAxis::Lambda1,
            SweepAxis::Lambda2,
            SweepAxis::Delta,
            SweepAxis::Nbar,
            SweepAxis::Preset,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| CliError::Config(format!("unknown sweep axis `{s}`")))
    }

    /// Parse a comma-separated value list for this axis.
    pub fn parse_values(self, list: &str) -> CliResult<Vec<AxisValue>> {
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match self {
                SweepAxis::Preset => Ok(AxisValue::Preset(s.parse()?)),
                _ => s
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(AxisValue::Number)
                    .ok_or_else(|| CliError::Config(format!("`{s}` is not a finite number"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if values.is_empty() {
            return Err(CliError::Config("sweep needs at least one value".into()));
        }
        Ok(values)
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &RunConfig, value: &AxisValue) -> CliResult<RunConfig> {
        let mut cfg = base.clone();
        match (self, value) {
            (SweepAxis::Lambda1, AxisValue::Number(v)) => cfg.params.lambda1 = *v,
            (SweepAxis::Lambda2, AxisValue::Number(v)) => cfg.params.lambda2 = *v,
            (SweepAxis::Delta, AxisValue::Number(v)) => cfg.params.delta = *v,
            (SweepAxis::Nbar, AxisValue::Number(v)) => cfg.nbar = *v,
            (SweepAxis::Preset, AxisValue::Preset(p)) => cfg = cfg.with_preset(*p),
            _ => {
                return Err(CliError::Config(format!(
                    "value {value} does not fit axis {}",
                    self.name()
                )));
            }
        }
        Ok(cfg)
    }
}

/// One coordinate of a dataset key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Number(f64),
    Preset(Preset),
}

impl std::fmt::Display for AxisValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisValue::Number(v) => write!(f, "{v:.16e}"),
            AxisValue::Preset(p) => f.write_str(p.name()),
        }
    }
}

/// Outcome of one keyed trajectory.
#[derive(Debug)]
pub struct KeyedRun {
    pub key: Vec<AxisValue>,
    pub config: RunConfig,
    pub outcome: CliResult<Trajectory>,
}

/// A collection of trajectories sharing observables, keyed by named axes.
#[derive(Debug)]
pub struct Dataset {
    pub key_names: Vec<String>,
    pub observables: Vec<Observable>,
    pub oracle_check: bool,
    pub runs: Vec<KeyedRun>,
    /// Free-form annotations carried into JSON output.
    pub notes: Vec<String>,
}

impl Dataset {
    pub fn failures(&self) -> impl Iterator<Item = (&[AxisValue], &CliError)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.key.as_slice(), e)))
    }

    pub fn successes(&self) -> impl Iterator<Item = (&[AxisValue], &Trajectory)> {
        self.runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|t| (r.key.as_slice(), t)))
    }

    /// Trajectory stored under `key`, if it succeeded.
    pub fn get(&self, key: &[AxisValue]) -> Option<&Trajectory> {
        self.runs
            .iter()
            .find(|r| r.key == key)
            .and_then(|r| r.outcome.as_ref().ok())
    }
}

/// Run keyed configurations in parallel. Failures stay attached to their key
/// and do not stop the others. All configurations must tabulate the same
/// observables.
pub fn run_keyed(
    key_names: Vec<String>,
    jobs: Vec<(Vec<AxisValue>, RunConfig)>,
) -> CliResult<Dataset> {
    let Some((_, first)) = jobs.first() else {
        return Err(CliError::Config("nothing to run".into()));
    };
    let observables = first.observables.clone();
    let oracle_check = first.oracle_check;
    if jobs.iter().any(|(k, c)| {
        c.observables != observables || c.oracle_check != oracle_check || k.len() != key_names.len()
    }) {
        return Err(CliError::Config(
            "keyed runs must share observables and key shape".into(),
        ));
    }
    let cache = RootCache::new();
    let runs = jobs
        .into_par_iter()
        .map(|(key, config)| {
            let outcome = run_trajectory_cached(&config, &cache);
            KeyedRun {
                key,
                config,
                outcome,
            }
        })
        .collect();
    Ok(Dataset {
        key_names,
        observables,
        oracle_check,
        runs,
        notes: Vec::new(),
    })
}

/// One trajectory per value of `axis`, all other settings from `base`.
pub fn run_sweep(base: &RunConfig, axis: SweepAxis, values: &[AxisValue]) -> CliResult<Dataset> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let jobs = values
        .iter()
        .map(|v| Ok((vec![*v], axis.apply(base, v)?)))
        .collect::<CliResult<Vec<_>>>()?;
    run_keyed(vec![axis.name().to_string()], jobs)
}

/// A single trajectory wrapped as an unkeyed dataset.
pub fn single(cfg: &RunConfig) -> CliResult<Dataset> {
    let outcome = Ok(run_trajectory(cfg)?);
    Ok(Dataset {
        key_names: Vec::new(),
        observables: cfg.observables.clone(),
        oracle_check: cfg.oracle_check,
        runs: vec![KeyedRun {
            key: Vec::new(),
            config: cfg.clone(),
            outcome,
        }],
        notes: Vec::new(),
    })
}
