//! Brute-force propagators used to validate the closed-form solution.
//!
//! Two independent routes are provided:
//!
//! * exact diagonalisation of each Hermitian block in the Schrödinger picture,
//!   followed by the transform back to the interaction picture;
//! * adaptive Dormand–Prince 8(5,3) integration of the interaction-picture
//!   coupled equations, phases e^{±iΔt} and all.
//!
//! Energy convention: block n has N̂ = n + 1 and H₀ = ω N̂ + (Δ/2)Σσz, so its
//! diagonal is ω(n+1) + (Δ, 0, 0, −Δ). The common ω(n+1) is carried in
//! `shift` and never exponentiated: it cancels exactly against the same term
//! of the interaction-picture transform.

use nalgebra::{DMatrix, DVector, Matrix4, SVector};
use num_complex::Complex64 as C64;
use ode_solvers::{Dop853, OutputType, System};

use crate::error::{Error, Result};
use crate::model::{BlockCoefficients, ModelParams, StateVector};

/// Default local error tolerance for [`integrate_block`].
pub const DEFAULT_ORACLE_TOLERANCE: f64 = 1.0e-12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Hamiltonian of manifold n in the basis
/// (|e₁e₂,n⟩, |e₁g₂,n+1⟩, |g₁e₂,n+1⟩, |g₁g₂,n+2⟩), minus the common shift.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    pub n: usize,
    /// ω(n+1), removed from the diagonal of `h`.
    pub shift: f64,
    pub h: Matrix4<C64>,
}

impl BlockHamiltonian {
    pub fn new(params: &ModelParams, n: usize) -> Self {
        let alpha = params.lambda1 * ((n + 1) as f64).sqrt();
        let beta = params.lambda1 * ((n + 2) as f64).sqrt();
        let (d, l2) = (params.delta, params.lambda2);
        let r = |x: f64| C64::new(x, 0.0);
        #[rustfmt::skip]
        let h = Matrix4::new(
            r(d),     r(alpha), r(alpha), r(0.0),
            r(alpha), r(0.0),   r(l2),    r(beta),
            r(alpha), r(l2),    r(0.0),   r(beta),
            r(0.0),   r(beta),  r(beta),  r(-d),
        );
        Self {
            n,
            shift: params.omega * (n + 1) as f64,
            h,
        }
    }

    /// The unshifted Hamiltonian, diagonal (ωn + ω₀, ω(n+1), ω(n+1), ω(n+2) − ω₀).
    pub fn full(&self) -> Matrix4<C64> {
        self.h + Matrix4::from_diagonal_element(C64::new(self.shift, 0.0))
    }

    /// Diagonal of the shifted free Hamiltonian H₀ (the interaction-frame phases).
    pub fn frame(params: &ModelParams) -> [f64; 4] {
        [params.delta, 0.0, 0.0, -params.delta]
    }
}

/// Hamiltonian of the N̂ = 0 boundary triple (|e₁g₂,0⟩, |g₁e₂,0⟩, |g₁g₂,1⟩).
pub fn boundary_hamiltonian(params: &ModelParams) -> DMatrix<C64> {
    let r = |x: f64| C64::new(x, 0.0);
    let (l1, l2) = (params.lambda1, params.lambda2);
    DMatrix::from_row_slice(
        3,
        3,
        &[
            r(0.0),
            r(l2),
            r(l1),
            r(l2),
            r(0.0),
            r(l1),
            r(l1),
            r(l1),
            r(-params.delta),
        ],
    )
}

fn boundary_frame(params: &ModelParams) -> [f64; 3] {
    [0.0, 0.0, -params.delta]
}

/// Eigendecomposition H = U Λ U† of a small Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues of the shifted matrix, ascending.
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub vectors: DMatrix<C64>,
    /// Constant added back by [`HermitianEigen::energies`].
    pub shift: f64,
}

impl HermitianEigen {
    pub fn new(h: DMatrix<C64>, shift: f64) -> Self {
        let dim = h.nrows();
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        Self {
            values,
            vectors,
            shift,
        }
    }

    /// Eigenvalues of the full (unshifted) matrix.
    pub fn energies(&self) -> Vec<f64> {
        self.values.iter().map(|v| v + self.shift).collect()
    }

    /// ‖UΛU† − H‖_F for the shifted matrix `h`.
    pub fn reconstruction_residual(&self, h: &DMatrix<C64>) -> f64 {
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| C64::new(v, 0.0)),
        ));
        (&self.vectors * lambda * self.vectors.adjoint() - h).norm()
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.vectors.ncols();
        (self.vectors.adjoint() * &self.vectors - DMatrix::<C64>::identity(dim, dim)).norm()
    }
}

/// Eigendecomposition of block `n`.
pub fn eig_block(params: &ModelParams, n: usize) -> HermitianEigen {
    let bh = BlockHamiltonian::new(params, n);
    HermitianEigen::new(DMatrix::from_iterator(4, 4, bh.h.iter().copied()), bh.shift)
}

/// Apply the interaction-picture transform c_I = e^{+iE₀t} c_S.
pub fn to_interaction(frame: &[f64], coeffs: &mut [C64], t: f64) {
    for (c, &e) in coeffs.iter_mut().zip(frame) {
        *c *= C64::from_polar(1.0, e * t);
    }
}

/// Inverse of [`to_interaction`].
pub fn to_schrodinger(frame: &[f64], coeffs: &mut [C64], t: f64) {
    for (c, &e) in coeffs.iter_mut().zip(frame) {
        *c *= C64::from_polar(1.0, -e * t);
    }
}

/// Exact propagator of one block for a fixed initial vector.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    eig: HermitianEigen,
    frame: Vec<f64>,
    /// U† c(0)
    projections: Vec<C64>,
}

impl BlockPropagator {
    pub fn new(eig: HermitianEigen, frame: Vec<f64>, initial: &[C64]) -> Self {
        let c0 = DVector::from_column_slice(initial);
        let projections = (eig.vectors.adjoint() * c0).iter().copied().collect();
        Self {
            eig,
            frame,
            projections,
        }
    }

    pub fn manifold(params: &ModelParams, n: usize, initial: &BlockCoefficients) -> Self {
        Self::new(
            eig_block(params, n),
            BlockHamiltonian::frame(params).to_vec(),
            initial,
        )
    }

    pub fn boundary(params: &ModelParams, initial: &[C64; 3]) -> Self {
        let eig = HermitianEigen::new(boundary_hamiltonian(params), 0.0);
        Self::new(eig, boundary_frame(params).to_vec(), initial)
    }

    /// Interaction-picture coefficients at time t.
    pub fn evolve_into(&self, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|c| *c = C64::default());
        for (k, (&p, &e)) in self.projections.iter().zip(&self.eig.values).enumerate() {
            let w = p * C64::from_polar(1.0, -e * t);
            for (row, c) in out.iter_mut().enumerate() {
                *c += self.eig.vectors[(row, k)] * w;
            }
        }
        to_interaction(&self.frame, out, t);
    }
}

/// exp(−iHt) on block `n`, returned in the interaction picture so it can be
/// compared directly with the closed-form coefficients.
pub fn evolve_block_exact(
    params: &ModelParams,
    n: usize,
    initial: &BlockCoefficients,
    t: f64,
) -> BlockCoefficients {
    let mut out = [C64::default(); 4];
    BlockPropagator::manifold(params, n, initial).evolve_into(t, &mut out);
    out
}

/// Whole-state exact propagator (every manifold plus the frozen sector).
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    blocks: Vec<BlockPropagator>,
    boundary: BlockPropagator,
    ground: C64,
}

impl ExactPropagator {
    pub fn new(params: &ModelParams, state0: &StateVector) -> Self {
        let blocks = state0
            .blocks
            .iter()
            .enumerate()
            .map(|(n, c)| BlockPropagator::manifold(params, n, c))
            .collect();
        Self {
            blocks,
            boundary: BlockPropagator::boundary(params, &state0.frozen.boundary),
            ground: state0.frozen.ground,
        }
    }

    pub fn evolve(&self, t: f64) -> StateVector {
        let blocks = self
            .blocks
            .iter()
            .map(|p| {
                let mut c = [C64::default(); 4];
                p.evolve_into(t, &mut c);
                c
            })
            .collect();
        let mut boundary = [C64::default(); 3];
        self.boundary.evolve_into(t, &mut boundary);
        StateVector {
            blocks,
            frozen: crate::model::FrozenSector {
                boundary,
                ground: self.ground,
            },
            time: t,
        }
    }
}

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationReport {
    pub coefficients: BlockCoefficients,
    /// |‖c(t)‖² − ‖c(0)‖²|
    pub norm_drift: f64,
    pub steps: u32,
}

/// Coupled equations written for Ã = A e^{−iΔt}, D̃ = D e^{iΔt}, which makes
/// them autonomous:
///
/// ```text
/// iÃ' = ΔÃ + αK,   iB' = αÃ + βD̃ + λ₂C,   iC' = αÃ + βD̃ + λ₂B,   iD̃' = −ΔD̃ + βK
/// ```
struct CoupledEquations {
    alpha: f64,
    beta: f64,
    lambda2: f64,
    delta: f64,
}

type Real8 = SVector<f64, 8>;

fn pack(c: &BlockCoefficients) -> Real8 {
    Real8::from_fn(|i, _| if i % 2 == 0 { c[i / 2].re } else { c[i / 2].im })
}

fn unpack(y: &Real8) -> BlockCoefficients {
    std::array::from_fn(|k| C64::new(y[2 * k], y[2 * k + 1]))
}

impl System<f64, Real8> for CoupledEquations {
    fn system(&self, _t: f64, y: &Real8, dy: &mut Real8) {
        let [a, b, c, d] = unpack(y);
        let k = b + c;
        let drive = self.alpha * a + self.beta * d;
        let rates = [
            -I * (self.delta * a + self.alpha * k),
            -I * (drive + self.lambda2 * c),
            -I * (drive + self.lambda2 * b),
            -I * (self.beta * k - self.delta * d),
        ];
        for (i, r) in rates.iter().enumerate() {
            dy[2 * i] = r.re;
            dy[2 * i + 1] = r.im;
        }
    }
}

/// Integrate the interaction-picture equations of block `n` from 0 to `t`.
pub fn integrate_block(
    params: &ModelParams,
    n: usize,
    initial: &BlockCoefficients,
    t: f64,
    tol: f64,
) -> Result<IntegrationReport> {
    if !(1.0e-14..=1.0e-6).contains(&tol) {
        return Err(Error::InvalidParameter(format!(
            "oracle tolerance {tol} outside [1e-14, 1e-6]"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    let norm0: f64 = initial.iter().map(|z| z.norm_sqr()).sum();
    if t == 0.0 || norm0 == 0.0 {
        return Ok(IntegrationReport {
            coefficients: *initial,
            norm_drift: 0.0,
            steps: 0,
        });
    }
    let eqs = CoupledEquations {
        alpha: params.lambda1 * ((n + 1) as f64).sqrt(),
        beta: params.lambda1 * ((n + 2) as f64).sqrt(),
        lambda2: params.lambda2,
        delta: params.delta,
    };
    let mut solver = Dop853::from_param(
        eqs,
        0.0,
        t,
        t,
        pack(initial),
        tol,
        tol,
        0.9,
        0.0,
        0.333,
        6.0,
        t,
        0.0,
        10_000_000,
        1000,
        OutputType::Sparse,
    );
    let stats = solver.integrate().map_err(|e| Error::Integration {
        n,
        message: e.to_string(),
    })?;
    let last = solver.y_out().last().ok_or_else(|| Error::Integration {
        n,
        message: "solver produced no output".into(),
    })?;
    let mut coefficients = unpack(last);
    let turn = C64::from_polar(1.0, params.delta * t);
    coefficients[0] *= turn;
    coefficients[3] *= turn.conj();
    let norm1: f64 = coefficients.iter().map(|z| z.norm_sqr()).sum();
    Ok(IntegrationReport {
        coefficients,
        norm_drift: (norm1 - norm0).abs(),
        steps: stats.accepted_steps,
    })
}

/// Coefficient-level discrepancy between two states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub max_abs: f64,
    pub rms_abs: f64,
    /// Manifold holding the largest deviation; `None` when it sits in the
    /// frozen sector (or everything agrees exactly).
    pub worst_manifold: Option<usize>,
    /// ‖a‖² − ‖b‖²
    pub norm_diff: f64,
}

pub fn compare_states(a: &StateVector, b: &StateVector) -> Result<Discrepancy> {
    if a.blocks.len() != b.blocks.len() {
        return Err(Error::ShapeMismatch(format!(
            "nmax {} vs {}",
            a.nmax(),
            b.nmax()
        )));
    }
    if a.time != b.time {
        return Err(Error::ShapeMismatch(format!(
            "time {} vs {}",
            a.time, b.time
        )));
    }
    let mut max_abs = 0.0_f64;
    let mut worst = None;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for (n, (x, y)) in a.blocks.iter().zip(&b.blocks).enumerate() {
        for (p, q) in x.iter().zip(y) {
            let dev = (p - q).norm();
            sum_sq += dev * dev;
            count += 1;
            if dev > max_abs {
                max_abs = dev;
                worst = Some(n);
            }
        }
    }
    let frozen_a = a
        .frozen
        .boundary
        .iter()
        .chain(std::iter::once(&a.frozen.ground));
    let frozen_b = b
        .frozen
        .boundary
        .iter()
        .chain(std::iter::once(&b.frozen.ground));
    for (p, q) in frozen_a.zip(frozen_b) {
        let dev = (p - q).norm();
        sum_sq += dev * dev;
        count += 1;
        if dev > max_abs {
            max_abs = dev;
            worst = None;
        }
    }
    Ok(Discrepancy {
        max_abs,
        rms_abs: (sum_sq / count as f64).sqrt(),
        worst_manifold: worst,
        norm_diff: a.norm_sqr() - b.norm_sqr(),
    })
}

/// Two-qubit reduced density matrix by brute force: lay the state out as a
/// dense (photon number × qubit basis) array and trace the field out
/// column by column. Independent of the indexed sums in `observables`.
pub fn dense_qubit_density(state: &StateVector) -> Matrix4<C64> {
    let kmax = state.blocks.len() + 2;
    let mut dense = vec![[C64::default(); 4]; kmax];
    for (n, block) in state.blocks.iter().enumerate() {
        dense[n][0] += block[0];
        dense[n + 1][1] += block[1];
        dense[n + 1][2] += block[2];
        dense[n + 2][3] += block[3];
    }
    dense[0][1] += state.frozen.boundary[0];
    dense[0][2] += state.frozen.boundary[1];
    dense[1][3] += state.frozen.boundary[2];
    dense[0][3] += state.frozen.ground;

    let mut rho = Matrix4::<C64>::zeros();
    for column in &dense {
        let v = nalgebra::Vector4::from_column_slice(column);
        rho += v * v.adjoint();
    }
    rho
}
