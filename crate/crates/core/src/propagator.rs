//! Closed-form time evolution of each excitation manifold.
//!
//! With K(t) = Bₙ₊₁ + Cₙ₊₁ = Σⱼ δⱼ e^{mⱼt}, the coefficients follow as
//!
//! ```text
//! Aₙ(t)   = Aₙ(0)   − iαₙ Σⱼ δⱼ (e^{(mⱼ+iΔ)t} − 1)/(mⱼ + iΔ)
//! Dₙ₊₂(t) = Dₙ₊₂(0) − iβₙ Σⱼ δⱼ (e^{(mⱼ−iΔ)t} − 1)/(mⱼ − iΔ)
//! Bₙ₊₁(t) = ½[(B − C)(0) e^{iλ₂t} + K(t)]
//! Cₙ₊₁(t) = ½[(C − B)(0) e^{iλ₂t} + K(t)]
//! ```
//!
//! δⱼ come from the Vandermonde system fixed by K(0), K̇(0), K̈(0).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::cubic::{CubicRoots, block_roots};
use crate::error::{Error, Result};
use crate::model::{BlockCoefficients, FrozenSector, ModelParams, StateVector};
use crate::oracle::BlockPropagator;

/// Roots closer than this (relative to the manifold scale) are treated as
/// degenerate and the block goes through exact diagonalisation instead.
pub const DEGENERACY_THRESHOLD: f64 = 1.0e-6;
/// Below this |x|/scale the factor (e^{xt} − 1)/x is replaced by its series.
pub const SERIES_THRESHOLD: f64 = 1.0e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Couplings of manifold n: αₙ = λ₁√(n+1), βₙ = λ₁√(n+2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCouplings {
    pub n: usize,
    pub alpha_n: f64,
    pub beta_n: f64,
}

impl BlockCouplings {
    pub fn new(params: &ModelParams, n: usize) -> Self {
        Self {
            n,
            alpha_n: params.lambda1 * ((n + 1) as f64).sqrt(),
            beta_n: params.lambda1 * ((n + 2) as f64).sqrt(),
        }
    }
}

/// K and its first two derivatives at t = 0, from the coupled equations.
pub fn k_derivatives(initial: &BlockCoefficients, params: &ModelParams, n: usize) -> [C64; 3] {
    let BlockCouplings {
        alpha_n: a,
        beta_n: b,
        ..
    } = BlockCouplings::new(params, n);
    let (l2, d) = (params.lambda2, params.delta);
    let [a0, b0, c0, d0] = *initial;
    let k = b0 + c0;
    let drive = 2.0 * a * a0 + 2.0 * b * d0;
    let k1 = -I * (drive + l2 * k);
    let k2 = -2.0 * a * d * a0 + 2.0 * b * d * d0 - 2.0 * (a * a + b * b) * k - I * l2 * k1;
    [k, k1, k2]
}

/// δⱼ solving Σⱼ δⱼ mⱼᵏ = K⁽ᵏ⁾(0) for k = 0, 1, 2 (explicit Vandermonde inverse).
pub fn block_deltas(
    roots: &CubicRoots,
    initial: &BlockCoefficients,
    params: &ModelParams,
    n: usize,
) -> Result<[C64; 3]> {
    let separation = roots.min_separation();
    if separation <= DEGENERACY_THRESHOLD * roots.scale {
        return Err(Error::DegenerateRoots { n, separation });
    }
    let [k0, k1, k2] = k_derivatives(initial, params, n);
    let m = roots.roots;
    Ok(std::array::from_fn(|j| {
        let (p, q) = (m[(j + 1) % 3], m[(j + 2) % 3]);
        (k2 - (p + q) * k1 + p * q * k0) / ((m[j] - p) * (m[j] - q))
    }))
}

/// δⱼ from the printed closed form: δ₂ and δ₃ explicitly, δ₁ from K(0).
/// Kept as a cross-check of [`block_deltas`].
pub fn deltas_closed_form(
    roots: &CubicRoots,
    initial: &BlockCoefficients,
    params: &ModelParams,
    n: usize,
) -> [C64; 3] {
    let BlockCouplings {
        alpha_n: a,
        beta_n: b,
        ..
    } = BlockCouplings::new(params, n);
    let (l2, d) = (params.lambda2, params.delta);
    let [m1, m2, m3] = roots.roots;
    let [a0, b0, c0, d0] = *initial;
    let k0 = b0 + c0;
    let term = |s: C64| {
        2.0 * a * a0 * (I * s - l2 - d)
            + 2.0 * b * d0 * (I * s - l2 + d)
            + (I * s * (l2 - I * m1) - 2.0 * (a * a + b * b) - l2 * l2 - m1 * m1) * k0
    };
    let delta2 = term(m1 + m3) / ((m1 - m2) * (m3 - m2));
    let delta3 = term(m1 + m2) / ((m1 - m3) * (m2 - m3));
    [k0 - delta2 - delta3, delta2, delta3]
}

/// e^z − 1 without cancellation for small |z|.
#[inline]
fn expm1(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = z.re.exp_m1();
    C64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// (e^{xt} − 1)/x, switching to t + xt²/2 + x²t³/6 when |x| < threshold.
#[inline]
fn phi(x: C64, t: f64, threshold: f64) -> C64 {
    if x.norm() < threshold {
        t + x * (t * t / 2.0) + x * x * (t * t * t / 6.0)
    } else {
        expm1(x * t) / x
    }
}

/// Per-manifold closed-form kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSolution {
    pub couplings: BlockCouplings,
    pub roots: CubicRoots,
    pub deltas: [C64; 3],
    pub initial: BlockCoefficients,
    pub lambda2: f64,
    pub detuning: f64,
}

impl ManifoldSolution {
    pub fn new(
        params: &ModelParams,
        roots: CubicRoots,
        initial: BlockCoefficients,
    ) -> Result<Self> {
        let n = roots.n;
        let deltas = block_deltas(&roots, &initial, params, n)?;
        Ok(Self {
            couplings: BlockCouplings::new(params, n),
            roots,
            deltas,
            initial,
            lambda2: params.lambda2,
            detuning: params.delta,
        })
    }

    /// K(t) = Σ δⱼ e^{mⱼt}.
    pub fn k(&self, t: f64) -> C64 {
        self.deltas
            .iter()
            .zip(&self.roots.roots)
            .map(|(d, m)| d * (m * t).exp())
            .sum()
    }
}

/// Interaction-picture coefficients of one manifold at time t.
pub fn evolve_block(sol: &ManifoldSolution, t: f64) -> BlockCoefficients {
    if t == 0.0 {
        return sol.initial;
    }
    let threshold = SERIES_THRESHOLD * sol.roots.scale;
    let id = C64::new(0.0, sol.detuning);
    let [a0, b0, c0, d0] = sol.initial;
    let mut k = C64::default();
    let mut sum_a = C64::default();
    let mut sum_d = C64::default();
    for (&delta, &m) in sol.deltas.iter().zip(&sol.roots.roots) {
        // roots are purely imaginary after polishing
        k += delta * C64::from_polar(1.0, m.im * t);
        sum_a += delta * phi(m + id, t, threshold);
        sum_d += delta * phi(m - id, t, threshold);
    }
    let anti = (b0 - c0) * C64::from_polar(1.0, sol.lambda2 * t);
    [
        a0 - I * sol.couplings.alpha_n * sum_a,
        0.5 * (anti + k),
        0.5 * (k - anti),
        d0 - I * sol.couplings.beta_n * sum_d,
    ]
}

/// Evolution kernel of one manifold.
#[derive(Debug, Clone)]
pub enum BlockKernel {
    Analytic(ManifoldSolution),
    /// Degenerate roots: exact diagonalisation.
    Exact(BlockPropagator),
}

impl BlockKernel {
    pub fn evolve(&self, t: f64) -> BlockCoefficients {
        match self {
            BlockKernel::Analytic(sol) => evolve_block(sol, t),
            BlockKernel::Exact(p) => {
                let mut out = [C64::default(); 4];
                p.evolve_into(t, &mut out);
                out
            }
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, BlockKernel::Analytic(_))
    }
}

type RootSlot = Arc<OnceLock<Result<CubicRoots>>>;

/// Bit patterns of (λ₁, λ₂, Δ) and the manifold index.
type RootKey = (u64, u64, u64, usize);

/// Memo table of characteristic roots keyed by (λ₁, λ₂, Δ, n). Each key is
/// computed once; readers of a key in flight wait for it.
#[derive(Debug, Default)]
pub struct RootCache {
    slots: Mutex<HashMap<RootKey, RootSlot>>,
}

impl RootCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn roots(&self, params: &ModelParams, n: usize) -> Result<CubicRoots> {
        let key = (
            params.lambda1.to_bits(),
            params.lambda2.to_bits(),
            params.delta.to_bits(),
            n,
        );
        let slot = {
            let mut map = self.slots.lock().unwrap_or_else(|e| e.into_inner());
            Arc::clone(map.entry(key).or_default())
        };
        slot.get_or_init(|| block_roots(params, n)).clone()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Closed-form propagator for a whole state; kernels are computed once and
/// reused for every time query.
#[derive(Debug, Clone)]
pub struct AnalyticPropagator {
    params: ModelParams,
    kernels: Vec<BlockKernel>,
    boundary: BlockPropagator,
    ground: C64,
}

impl AnalyticPropagator {
    pub fn new(params: &ModelParams, state0: &StateVector) -> Result<Self> {
        Self::with_cache(params, state0, &RootCache::new())
    }

    pub fn with_cache(
        params: &ModelParams,
        state0: &StateVector,
        cache: &RootCache,
    ) -> Result<Self> {
        if state0.time != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "propagation must start from t = 0, got time {}",
                state0.time
            )));
        }
        let kernels = state0
            .blocks
            .par_iter()
            .enumerate()
            .map(|(n, initial)| {
                let wrap = |e: Error| Error::Block {
                    n,
                    source: Box::new(e),
                };
                let roots = cache.roots(params, n).map_err(wrap)?;
                if roots.min_separation() <= DEGENERACY_THRESHOLD * roots.scale {
                    return Ok(BlockKernel::Exact(BlockPropagator::manifold(
                        params, n, initial,
                    )));
                }
                ManifoldSolution::new(params, roots, *initial)
                    .map(BlockKernel::Analytic)
                    .map_err(wrap)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            kernels,
            boundary: BlockPropagator::boundary(params, &state0.frozen.boundary),
            ground: state0.frozen.ground,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kernels(&self) -> &[BlockKernel] {
        &self.kernels
    }

    pub fn evolve(&self, t: f64) -> StateVector {
        let blocks = self.kernels.iter().map(|k| k.evolve(t)).collect();
        let mut boundary = [C64::default(); 3];
        self.boundary.evolve_into(t, &mut boundary);
        StateVector {
            blocks,
            frozen: FrozenSector {
                boundary,
                ground: self.ground,
            },
            time: t,
        }
    }
}

/// One-shot evolution of `state0` (at t = 0) to time `t`.
pub fn evolve_state(state0: &StateVector, params: &ModelParams, t: f64) -> Result<StateVector> {
    Ok(AnalyticPropagator::new(params, state0)?.evolve(t))
}
