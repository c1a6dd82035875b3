//! Physical model: Hamiltonian constants, coherent field preparation and the
//! composite initial state expanded over excitation manifolds.
//!
//! Units: ħ = 1, every frequency and coupling is an inverse time.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest mean photon number accepted by [`coherent_weights`].
pub const MAX_MEAN_PHOTONS: f64 = 1.0e4;

/// Default tail tolerance for the Fock truncation.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1.0e-12;

const NORM_TOLERANCE: f64 = 1.0e-12;

/// Constants of the two-qubit Tavis–Cummings Hamiltonian with XY exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Field angular frequency ω.
    pub omega: f64,
    /// Qubit transition frequency ω₀.
    pub omega0: f64,
    /// Qubit–field coupling λ₁.
    pub lambda1: f64,
    /// Qubit–qubit exchange coupling λ₂.
    pub lambda2: f64,
    /// Detuning Δ = ω₀ − ω.
    pub delta: f64,
}

impl ModelParams {
    /// Builds the parameter set, rejecting negative or non-finite constants and
    /// the fully uncoupled case.
    pub fn new(omega: f64, omega0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        let p = Self::new_unchecked(omega, omega0, lambda1, lambda2);
        p.validate(false)?;
        Ok(p)
    }

    /// Same as [`ModelParams::new`] but accepts λ₁ = λ₂ = 0 (free evolution).
    pub fn new_free_allowed(omega: f64, omega0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        let p = Self::new_unchecked(omega, omega0, lambda1, lambda2);
        p.validate(true)?;
        Ok(p)
    }

    /// Parameters in the frame rotating with the field (ω = 0, ω₀ = Δ).
    /// Only Δ enters the dynamics, so this loses nothing.
    pub fn rotating(lambda1: f64, lambda2: f64, delta: f64) -> Result<Self> {
        Self::new(0.0, delta, lambda1, lambda2)
    }

    fn new_unchecked(omega: f64, omega0: f64, lambda1: f64, lambda2: f64) -> Self {
        Self {
            omega,
            omega0,
            lambda1,
            lambda2,
            delta: omega0 - omega,
        }
    }

    fn validate(&self, allow_free: bool) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "couplings must be non-negative (lambda1 = {}, lambda2 = {})",
                self.lambda1, self.lambda2
            )));
        }
        if !allow_free && self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            return Err(Error::InvalidParameter(
                "lambda1 and lambda2 are both zero (free evolution not allowed here)".into(),
            ));
        }
        Ok(())
    }

    /// Relative coupling λ_r = λ₂/λ₁ (infinite when λ₁ = 0).
    pub fn coupling_ratio(&self) -> f64 {
        self.lambda2 / self.lambda1
    }

    /// Largest frequency seen by manifolds up to `nmax`; all numerical
    /// thresholds are expressed relative to it.
    pub fn scale(&self, nmax: usize) -> f64 {
        1.0_f64
            .max(self.lambda1 * ((nmax + 2) as f64).sqrt())
            .max(self.lambda2)
            .max(self.delta.abs())
    }
}

/// Two-qubit pure state a|e₁e₂⟩ + b|e₁g₂⟩ + c|g₁e₂⟩ + d|g₁g₂⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitInitState {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl QubitInitState {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let s = Self { a, b, c, d };
        let norm = s.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Amplitudes in the order (ee, eg, ge, gg).
    pub fn amplitudes(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Concurrence of the bare two-qubit pure state, 2|ad − bc|.
    pub fn concurrence(&self) -> f64 {
        (2.0 * (self.a * self.d - self.b * self.c).norm()).min(1.0)
    }
}

/// The three initial qubit states used throughout the figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    /// |e₁e₂⟩
    #[serde(rename = "psi_e")]
    PsiE,
    /// (|e₁e₂⟩ + |g₁g₂⟩)/√2
    #[serde(rename = "psi_b")]
    PsiB,
    /// (|e₁⟩ + |g₁⟩)(|e₂⟩ + |g₂⟩)/2
    #[serde(rename = "psi_s")]
    PsiS,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::PsiE, Preset::PsiB, Preset::PsiS];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PsiE => "psi_e",
            Preset::PsiB => "psi_b",
            Preset::PsiS => "psi_s",
        }
    }

    pub fn state(&self) -> QubitInitState {
        let zero = C64::new(0.0, 0.0);
        let (a, b, c, d) = match self {
            Preset::PsiE => (C64::new(1.0, 0.0), zero, zero, zero),
            Preset::PsiB => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                (h, zero, zero, h)
            }
            Preset::PsiS => {
                let h = C64::new(0.5, 0.0);
                (h, h, h, h)
            }
        };
        QubitInitState { a, b, c, d }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi_e" => Ok(Preset::PsiE),
            "psi_b" => Ok(Preset::PsiB),
            "psi_s" => Ok(Preset::PsiS),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Look up a preset initial state by name.
pub fn preset(name: &str) -> Result<QubitInitState> {
    name.parse::<Preset>().map(|p| p.state())
}

/// Truncated coherent state |α⟩ = Σₙ Qₙ|n⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentField {
    pub alpha: C64,
    pub nbar: f64,
    /// Index of the last retained Fock state.
    pub nmax: usize,
    /// Q₀..Q_nmax.
    pub weights: Vec<C64>,
}

impl CoherentField {
    /// Amplitude Qₖ for any k, continuing the recursion Qₖ = Qₖ₋₁ α/√k past
    /// the retained range.
    pub fn amplitude(&self, k: usize) -> C64 {
        if k <= self.nmax {
            return self.weights[k];
        }
        let mut q = self.weights[self.nmax];
        for j in self.nmax + 1..=k {
            q *= self.alpha / (j as f64).sqrt();
        }
        q
    }

    /// Probability mass beyond `nmax`.
    pub fn tail_weight(&self) -> f64 {
        poisson_tail_bound(self.nbar, self.nmax, self.weights[self.nmax].norm_sqr())
    }

    /// Σₙ |Qₙ|² over the retained range.
    pub fn retained_weight(&self) -> f64 {
        self.weights.iter().map(|q| q.norm_sqr()).sum()
    }

    /// Σₙ n|Qₙ|² over the retained range.
    pub fn mean_photons(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, q)| n as f64 * q.norm_sqr())
            .sum()
    }

    /// Extend the cutoff to at least `n̄ + 10√n̄ + 10` photons (vacuum is left
    /// alone). Long revival horizons depend on the far Poisson tail.
    pub fn with_revival_floor(self) -> Self {
        if self.nbar == 0.0 {
            return self;
        }
        let floor = (self.nbar + 10.0 * self.nbar.sqrt() + 10.0).ceil() as usize;
        self.extended_to(floor)
    }

    /// Extend the retained range to `nmax` (no-op if already larger).
    pub fn extended_to(mut self, nmax: usize) -> Self {
        if nmax > self.nmax {
            let extra: Vec<C64> = (self.nmax + 1..=nmax).map(|k| self.amplitude(k)).collect();
            self.weights.extend(extra);
            self.nmax = nmax;
        }
        self
    }
}

/// Upper bound on Σ_{k>n} pₖ for a Poisson distribution of mean `nbar`, given
/// pₙ. Valid once the ratio pₖ₊₁/pₖ = n̄/(k+1) has dropped below one.
fn poisson_tail_bound(nbar: f64, n: usize, p_n: f64) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    let r_first = nbar / (n as f64 + 1.0);
    let r = nbar / (n as f64 + 2.0);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    p_n * r_first / (1.0 - r)
}

/// Coherent-state weights with the smallest cutoff whose discarded Poisson
/// tail is below `tail_tolerance`.
///
/// Weights are evaluated in the log domain (n ln|α| − ½ ln n! − |α|²/2) so
/// large n̄ does not overflow.
pub fn coherent_weights(alpha: C64, tail_tolerance: f64) -> Result<CoherentField> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "coherent amplitude must be finite, got {alpha}"
        )));
    }
    if !(tail_tolerance > 0.0 && tail_tolerance <= 1.0e-3) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance must lie in (0, 1e-3], got {tail_tolerance}"
        )));
    }
    let nbar = alpha.norm_sqr();
    if nbar > MAX_MEAN_PHOTONS {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {nbar} exceeds the supported maximum {MAX_MEAN_PHOTONS}"
        )));
    }
    if nbar == 0.0 {
        return Ok(CoherentField {
            alpha,
            nbar,
            nmax: 0,
            weights: vec![C64::new(1.0, 0.0)],
        });
    }

    let ln_abs = alpha.norm().ln();
    let phase = alpha.arg();
    let mut weights = Vec::with_capacity((nbar + 10.0 * nbar.sqrt() + 16.0) as usize);
    let mut ln_fact = 0.0_f64;
    let mut n = 0usize;
    loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_mag = n as f64 * ln_abs - 0.5 * ln_fact - 0.5 * nbar;
        weights.push(C64::from_polar(ln_mag.exp(), n as f64 * phase));
        let p_n = (2.0 * ln_mag).exp();
        if n as f64 >= nbar && poisson_tail_bound(nbar, n, p_n) < tail_tolerance {
            break;
        }
        n += 1;
    }
    Ok(CoherentField {
        alpha,
        nbar,
        nmax: n,
        weights,
    })
}

/// Coefficients of one excitation manifold, ordered
/// (Aₙ, Bₙ₊₁, Cₙ₊₁, Dₙ₊₂) for |e₁e₂,n⟩, |e₁g₂,n+1⟩, |g₁e₂,n+1⟩, |g₁g₂,n+2⟩.
pub type BlockCoefficients = [C64; 4];

/// Amplitudes outside the four-dimensional manifolds: the N̂ = 0 triple
/// (B₀, C₀, D₁) and the N̂ = −1 singlet D₀.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrozenSector {
    /// (B₀, C₀, D₁) for |e₁g₂,0⟩, |g₁e₂,0⟩, |g₁g₂,1⟩.
    pub boundary: [C64; 3],
    /// D₀ for |g₁g₂,0⟩.
    pub ground: C64,
}

impl FrozenSector {
    pub fn norm_sqr(&self) -> f64 {
        self.boundary.iter().map(|z| z.norm_sqr()).sum::<f64>() + self.ground.norm_sqr()
    }
}

/// Interaction-picture state at `time`, truncated at manifold `nmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub blocks: Vec<BlockCoefficients>,
    pub frozen: FrozenSector,
    pub time: f64,
}

impl StateVector {
    pub fn nmax(&self) -> usize {
        self.blocks.len().saturating_sub(1)
    }

    /// Aₖ (qubits |e₁e₂⟩, k photons).
    #[inline]
    pub fn a(&self, k: usize) -> C64 {
        self.blocks.get(k).map_or(C64::default(), |b| b[0])
    }

    /// Bₖ (qubits |e₁g₂⟩, k photons).
    #[inline]
    pub fn b(&self, k: usize) -> C64 {
        match k {
            0 => self.frozen.boundary[0],
            _ => self.blocks.get(k - 1).map_or(C64::default(), |b| b[1]),
        }
    }

    /// Cₖ (qubits |g₁e₂⟩, k photons).
    #[inline]
    pub fn c(&self, k: usize) -> C64 {
        match k {
            0 => self.frozen.boundary[1],
            _ => self.blocks.get(k - 1).map_or(C64::default(), |b| b[2]),
        }
    }

    /// Dₖ (qubits |g₁g₂⟩, k photons).
    #[inline]
    pub fn d(&self, k: usize) -> C64 {
        match k {
            0 => self.frozen.ground,
            1 => self.frozen.boundary[2],
            _ => self.blocks.get(k - 2).map_or(C64::default(), |b| b[3]),
        }
    }

    /// Largest photon number carrying an amplitude.
    pub fn max_photons(&self) -> usize {
        self.blocks.len() + 1
    }

    pub fn manifold_norm_sqr(&self) -> f64 {
        self.blocks.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.manifold_norm_sqr() + self.frozen.norm_sqr()
    }

    /// ⟨N̂⟩ with N̂ = a†a + (σz⁽¹⁾ + σz⁽²⁾)/2; manifold n has N̂ = n + 1, the
    /// boundary triple 0 and the ground singlet −1.
    pub fn excitation_number(&self) -> f64 {
        let manifolds: f64 = self
            .blocks
            .iter()
            .enumerate()
            .map(|(n, b)| (n + 1) as f64 * b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        manifolds - self.frozen.ground.norm_sqr()
    }

    /// Copy with the frozen sector zeroed: the bare manifold ansatz without
    /// the low-photon boundary amplitudes.
    pub fn without_frozen_sector(&self) -> Self {
        Self {
            frozen: FrozenSector::default(),
            ..self.clone()
        }
    }
}

/// Composite state at t = 0: Aₙ = Qₙa, Bₙ₊₁ = Qₙ₊₁b, Cₙ₊₁ = Qₙ₊₁c,
/// Dₙ₊₂ = Qₙ₊₂d for n ≤ nmax, plus the boundary amplitudes at photon numbers
/// 0 and 1.
pub fn initial_state(qubits: &QubitInitState, field: &CoherentField) -> StateVector {
    let blocks = (0..=field.nmax)
        .map(|n| {
            let q1 = field.amplitude(n + 1);
            [
                field.amplitude(n) * qubits.a,
                q1 * qubits.b,
                q1 * qubits.c,
                field.amplitude(n + 2) * qubits.d,
            ]
        })
        .collect();
    let q0 = field.amplitude(0);
    let frozen = FrozenSector {
        boundary: [q0 * qubits.b, q0 * qubits.c, field.amplitude(1) * qubits.d],
        ground: q0 * qubits.d,
    };
    StateVector {
        blocks,
        frozen,
        time: 0.0,
    }
}
