//! Run configuration: one trajectory of one initial state on a uniform τ grid.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tcxy::{C64, ModelParams, Preset, QubitInitState};

use crate::error::{CliError, CliResult};

/// Quantities that can be tabulated along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    /// ⟨σz⟩ of the first qubit.
    Inversion,
    Concurrence,
    /// Entanglement of formation.
    Eof,
    /// State norm ‖ψ‖.
    Norm,
    /// Expected excitation number ⟨N̂⟩.
    Nexp,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::Inversion,
        Observable::Concurrence,
        Observable::Eof,
        Observable::Norm,
        Observable::Nexp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Inversion => "inversion",
            Observable::Concurrence => "concurrence",
            Observable::Eof => "eof",
            Observable::Norm => "norm",
            Observable::Nexp => "nexp",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown observable `{s}`")))
    }
}

/// Coupling whose product with t defines the scaled time τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScale {
    Lambda1,
    Lambda2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Interaction constants in the field's rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Couplings {
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 0.0,
            delta: 0.0,
        }
    }
}

/// Complex amplitude written as `[re, im]`.
pub type Amplitude = [f64; 2];

/// Custom qubit state a|ee⟩ + b|eg⟩ + c|ge⟩ + d|gg⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomState {
    pub a: Amplitude,
    pub b: Amplitude,
    pub c: Amplitude,
    pub d: Amplitude,
}

impl CustomState {
    pub fn to_state(self) -> CliResult<QubitInitState> {
        let z = |v: Amplitude| C64::new(v[0], v[1]);
        Ok(QubitInitState::new(
            z(self.a),
            z(self.b),
            z(self.c),
            z(self.d),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub tau_max: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            tau_max: 50.0,
            points: 4096,
        }
    }
}

impl TimeGrid {
    pub fn taus(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.tau_max * i as f64 / last)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Destination file; standard output when absent.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Everything needed to compute one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: Couplings,
    /// Named initial state; exclusive with `state`.
    pub preset: Option<Preset>,
    pub state: Option<CustomState>,
    pub nbar: f64,
    pub time_grid: TimeGrid,
    /// Defaults to λ₁, or λ₂ when λ₁ = 0.
    pub time_scale: Option<TimeScale>,
    pub observables: Vec<Observable>,
    /// Add a column with the largest coefficient deviation from the
    /// eigendecomposition propagator.
    pub oracle_check: bool,
    /// Keep the low-photon amplitudes outside the four-level manifolds.
    pub frozen_sector: bool,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Couplings::default(),
            preset: None,
            state: None,
            nbar: 20.0,
            time_grid: TimeGrid::default(),
            time_scale: None,
            observables: vec![
                Observable::Inversion,
                Observable::Concurrence,
                Observable::Eof,
            ],
            oracle_check: false,
            frozen_sector: true,
            output: OutputSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config always serialises")
    }

    pub fn model_params(&self) -> CliResult<ModelParams> {
        let p = &self.params;
        Ok(ModelParams::rotating(p.lambda1, p.lambda2, p.delta)?)
    }

    pub fn initial_qubits(&self) -> CliResult<QubitInitState> {
        match (self.state, self.preset) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either a preset or a custom state, not both".into(),
            )),
            (Some(custom), None) => custom.to_state(),
            (None, Some(p)) => Ok(p.state()),
            (None, None) => Err(CliError::Config(
                "no initial state: set a preset or a custom state".into(),
            )),
        }
    }

    pub fn effective_time_scale(&self) -> TimeScale {
        self.time_scale.unwrap_or(if self.params.lambda1 == 0.0 {
            TimeScale::Lambda2
        } else {
            TimeScale::Lambda1
        })
    }

    /// The coupling that converts τ to t = τ / coupling.
    pub fn time_unit(&self) -> f64 {
        match self.effective_time_scale() {
            TimeScale::Lambda1 => self.params.lambda1,
            TimeScale::Lambda2 => self.params.lambda2,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.model_params()?;
        self.initial_qubits()?;
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(CliError::Config(format!(
                "nbar must be a finite non-negative number, got {}",
                self.nbar
            )));
        }
        if self.time_grid.points < 2 {
            return Err(CliError::Config(format!(
                "need at least 2 time points, got {}",
                self.time_grid.points
            )));
        }
        if !(self.time_grid.tau_max.is_finite() && self.time_grid.tau_max > 0.0) {
            return Err(CliError::Config(format!(
                "tau_max must be positive, got {}",
                self.time_grid.tau_max
            )));
        }
        if self.time_unit() == 0.0 {
            return Err(CliError::Config(format!(
                "time scale {:?} uses a coupling that is zero",
                self.effective_time_scale()
            )));
        }
        if self.observables.is_empty() && !self.oracle_check {
            return Err(CliError::Config("no observables requested".into()));
        }
        Ok(())
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = Some(preset);
        self.state = None;
        self
    }
}
