//! Reduced density matrices, inversion and entanglement of the qubit pair.
//!
//! Qubit basis order throughout: |e₁e₂⟩, |e₁g₂⟩, |g₁e₂⟩, |g₁g₂⟩.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StateVector;

/// Eigenvalues above −this are rounding dust and are clamped to zero.
pub const PSD_TOLERANCE: f64 = 1.0e-10;
/// Imaginary residue of the spin-flip product eigenvalues treated as breakdown.
pub const DEGRADATION_TOLERANCE: f64 = 1.0e-8;

/// Which qubit of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    First,
    Second,
}

/// Qubit amplitudes (A, B, C, D) for every photon number k.
fn photon_columns(state: &StateVector) -> impl Iterator<Item = [C64; 4]> + '_ {
    (0..=state.max_photons()).map(|k| [state.a(k), state.b(k), state.c(k), state.d(k)])
}

/// Two-qubit reduced state with eigenvalue dust removed.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    pub rho: Matrix4<C64>,
    /// Smallest eigenvalue before clamping.
    pub raw_min_eigenvalue: f64,
}

impl TwoQubitDensity {
    /// Hermitian-symmetrise, clamp negative eigenvalues down to −[`PSD_TOLERANCE`]
    /// and renormalise to unit trace.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let raw_min_eigenvalue = eig.eigenvalues.min();
        if raw_min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NumericalDegradation(format!(
                "reduced density matrix has eigenvalue {raw_min_eigenvalue:e}"
            )));
        }
        let trace: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        if trace.is_nan() || trace <= 0.0 {
            return Err(Error::NumericalDegradation(
                "reduced density matrix has zero trace".into(),
            ));
        }
        let rho = if raw_min_eigenvalue < 0.0 {
            let mut out = Matrix4::<C64>::zeros();
            for (k, &v) in eig.eigenvalues.iter().enumerate() {
                if v > 0.0 {
                    let col = eig.eigenvectors.column(k);
                    out += col * col.adjoint() * C64::new(v, 0.0);
                }
            }
            out
        } else {
            herm
        };
        Ok(Self {
            rho: rho.unscale(trace),
            raw_min_eigenvalue,
        })
    }

    /// Pure product or entangled state |v⟩⟨v| (v is normalised here).
    pub fn pure(v: [C64; 4]) -> Self {
        let v = nalgebra::Vector4::from_column_slice(&v).normalize();
        Self {
            rho: v * v.adjoint(),
            raw_min_eigenvalue: 0.0,
        }
    }

    /// Check Hermiticity (1e−12), trace (1e−10) and positivity (−1e−10).
    pub fn validate(&self) -> Result<()> {
        let herm = (self.rho - self.rho.adjoint()).camax();
        if herm > 1.0e-12 {
            return Err(Error::NumericalDegradation(format!(
                "density not Hermitian ({herm:e})"
            )));
        }
        let trace = self.rho.trace();
        if (trace.re - 1.0).abs() > 1.0e-10 || trace.im.abs() > 1.0e-10 {
            return Err(Error::NumericalDegradation(format!(
                "density trace {trace}"
            )));
        }
        let min = self.rho.symmetric_eigen().eigenvalues.min();
        if min < -PSD_TOLERANCE {
            return Err(Error::NumericalDegradation(format!(
                "density eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Partial trace over the other qubit.
    pub fn reduce(&self, keep: Qubit) -> Matrix2<C64> {
        let r = &self.rho;
        match keep {
            Qubit::First => Matrix2::new(
                r[(0, 0)] + r[(1, 1)],
                r[(0, 2)] + r[(1, 3)],
                r[(2, 0)] + r[(3, 1)],
                r[(2, 2)] + r[(3, 3)],
            ),
            Qubit::Second => Matrix2::new(
                r[(0, 0)] + r[(2, 2)],
                r[(0, 1)] + r[(2, 3)],
                r[(1, 0)] + r[(3, 2)],
                r[(1, 1)] + r[(3, 3)],
            ),
        }
    }
}

/// Two-qubit state after tracing out the field: ρᵢⱼ = Σₖ Xᵢ(k)Xⱼ(k)*, where
/// X(k) are the qubit amplitudes at photon number k. Normalised to unit trace
/// so a truncated or sector-stripped state still yields a density matrix.
pub fn qubits_rdm(state: &StateVector) -> Result<TwoQubitDensity> {
    let mut rho = Matrix4::<C64>::zeros();
    for x in photon_columns(state) {
        for i in 0..4 {
            for j in i..4 {
                rho[(i, j)] += x[i] * x[j].conj();
            }
        }
    }
    for i in 0..4 {
        for j in 0..i {
            rho[(i, j)] = rho[(j, i)].conj();
        }
    }
    TwoQubitDensity::new(rho)
}

/// Single-qubit state, summed directly from the amplitudes.
pub fn single_rdm(state: &StateVector, qubit: Qubit) -> Matrix2<C64> {
    // (excited pair, ground pair) index into (A, B, C, D)
    let ((e1, e2), (g1, g2)) = match qubit {
        Qubit::First => ((0, 1), (2, 3)),
        Qubit::Second => ((0, 2), (1, 3)),
    };
    let (mut p_e, mut p_g, mut coh) = (0.0, 0.0, C64::default());
    for x in photon_columns(state) {
        p_e += x[e1].norm_sqr() + x[e2].norm_sqr();
        p_g += x[g1].norm_sqr() + x[g2].norm_sqr();
        coh += x[e1] * x[g1].conj() + x[e2] * x[g2].conj();
    }
    let norm = p_e + p_g;
    Matrix2::new(C64::new(p_e, 0.0), coh, coh.conj(), C64::new(p_g, 0.0)).unscale(norm)
}

/// ⟨σz⟩ of one qubit: P(excited) − P(ground).
pub fn inversion(state: &StateVector, qubit: Qubit) -> f64 {
    let excited = match qubit {
        Qubit::First => [0, 1],
        Qubit::Second => [0, 2],
    };
    let (mut up, mut total) = (0.0, 0.0);
    for x in photon_columns(state) {
        up += x[excited[0]].norm_sqr() + x[excited[1]].norm_sqr();
        total += x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    (2.0 * up - total) / total
}

/// Concurrence, entanglement of formation and the spin-flip spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementResult {
    pub concurrence: f64,
    pub eof: f64,
    /// Square roots of the eigenvalues of ρρ̃, descending.
    pub eps: [f64; 4],
}

/// σy⊗σy, real in this basis.
fn spin_flip() -> Matrix4<C64> {
    let one = C64::new(1.0, 0.0);
    let z = C64::default();
    Matrix4::new(
        z, z, z, -one, //
        z, z, one, z, //
        z, one, z, z, //
        -one, z, z, z,
    )
}

/// ρ̃ = (σy⊗σy) ρ* (σy⊗σy).
pub fn spin_flipped(rho: &Matrix4<C64>) -> Matrix4<C64> {
    let s = spin_flip();
    s * rho.conjugate() * s
}

/// Eigenvalues of R = ρρ̃ from a general complex Schur decomposition.
pub fn spin_flip_spectrum(rho: &Matrix4<C64>) -> Result<[C64; 4]> {
    let r = rho * spin_flipped(rho);
    let ev = r
        .try_schur(f64::EPSILON, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::NumericalDegradation("Schur form of ρρ̃ did not converge".into()))?;
    Ok([ev[0], ev[1], ev[2], ev[3]])
}

/// Wootters concurrence.
///
/// The εᵢ are computed as singular values of τ = Wᵀ(σy⊗σy)W with ρ = WW†:
/// these equal √eig(ρρ̃) but avoid taking square roots of eigenvalue dust
/// near zero. The eigenvalues of ρρ̃ are still formed as a consistency check
/// and a large imaginary residue is reported as breakdown.
pub fn concurrence(rho: &TwoQubitDensity) -> Result<EntanglementResult> {
    let spectrum = spin_flip_spectrum(&rho.rho)?;
    let residue = spectrum.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > DEGRADATION_TOLERANCE {
        return Err(Error::NumericalDegradation(format!(
            "eigenvalues of ρρ̃ have imaginary residue {residue:e}"
        )));
    }

    let eig = rho.rho.symmetric_eigen();
    let mut w = Matrix4::<C64>::zeros();
    for k in 0..4 {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        w.set_column(k, &(eig.eigenvectors.column(k) * C64::new(s, 0.0)));
    }
    let tau = w.transpose() * spin_flip() * w;
    let sv = tau.singular_values();
    let mut eps = [sv[0], sv[1], sv[2], sv[3]];
    eps.sort_by(|a, b| b.total_cmp(a));
    let c = (eps[0] - eps[1] - eps[2] - eps[3]).clamp(0.0, 1.0);
    Ok(EntanglementResult {
        concurrence: c,
        eof: eof(c),
        eps,
    })
}

/// Concurrence straight from √eig(ρρ̃), clamping residues below 1e−10.
/// Loses precision near C = 0 and C = 1; kept for cross-checks.
pub fn concurrence_from_spectrum(rho: &Matrix4<C64>) -> Result<f64> {
    let mut eps = spin_flip_spectrum(rho)?.map(|z| {
        let re = if z.re.abs() < PSD_TOLERANCE {
            0.0
        } else {
            z.re
        };
        re.max(0.0).sqrt()
    });
    eps.sort_by(|a, b| b.total_cmp(a));
    Ok((eps[0] - eps[1] - eps[2] - eps[3]).max(0.0))
}

/// Binary entropy in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation for concurrence `c` ∈ [0, 1].
pub fn eof(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    let root = (1.0 - c * c).sqrt();
    // small branch written without the 1 − x cancellation
    let small = c * c / (2.0 * (1.0 + root));
    let large = 1.0 - small;
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(small) + term(large)
}

/// Entanglement of a whole state.
pub fn entanglement(state: &StateVector) -> Result<EntanglementResult> {
    concurrence(&qubits_rdm(state)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Preset, QubitInitState, coherent_weights, initial_state};
    use crate::oracle::dense_qubit_density;
    use crate::propagator::evolve_state;
    use proptest::prelude::*;

    const Z: C64 = C64 { re: 0.0, im: 0.0 };
    const ONE: C64 = C64 { re: 1.0, im: 0.0 };

    fn field_state(p: Preset, nbar: f64) -> StateVector {
        let f = coherent_weights(C64::new(nbar.sqrt(), 0.0), 1e-12).unwrap();
        initial_state(&p.state(), &f)
    }

    fn bell_projector(v: [C64; 4]) -> Matrix4<C64> {
        TwoQubitDensity::pure(v).rho
    }

    #[test]
    fn bell_and_product_fixed_points() {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = concurrence(&TwoQubitDensity::pure([h, Z, Z, h])).unwrap();
        assert!((bell.concurrence - 1.0).abs() < 1e-14);
        assert!((bell.eof - 1.0).abs() < 1e-14);
        let singlet = concurrence(&TwoQubitDensity::pure([Z, h, -h, Z])).unwrap();
        assert!((singlet.concurrence - 1.0).abs() < 1e-14);
        // (|e⟩ + i|g⟩)⊗(|e⟩ − 2|g⟩)
        let (u, v) = ([ONE, C64::new(0.0, 1.0)], [ONE, C64::new(-2.0, 0.0)]);
        let product = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]];
        let r = concurrence(&TwoQubitDensity::pure(product)).unwrap();
        assert!(r.concurrence.abs() < 1e-14);
        assert!(r.eof < 1e-20);
    }

    #[test]
    fn bell_diagonal_mixture() {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let phi_plus = bell_projector([h, Z, Z, h]);
        let psi_plus = bell_projector([Z, h, h, Z]);
        let rho = phi_plus * C64::new(0.75, 0.0) + psi_plus * C64::new(0.25, 0.0);
        let r = concurrence(&TwoQubitDensity::new(rho).unwrap()).unwrap();
        assert!((r.concurrence - 0.5).abs() < 1e-14);
        assert!((concurrence_from_spectrum(&rho).unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn eof_values() {
        assert_eq!(eof(0.0), 0.0);
        assert!((eof(1.0) - 1.0).abs() < 1e-15);
        // h(x) at x = (1 + √0.75)/2, evaluated independently
        let x = (1.0 + 0.75f64.sqrt()) / 2.0;
        let h = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert!((eof(0.5) - h).abs() < 1e-15);
        assert!((eof(0.5) - 0.35458).abs() < 5e-6);
        assert!(eof(1e-9) > 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn t_zero_reduced_states() {
        let e = qubits_rdm(&field_state(Preset::PsiE, 10.0)).unwrap();
        assert!((e.rho - bell_projector([ONE, Z, Z, Z])).camax() < 1e-15);
        assert!(
            (single_rdm(&field_state(Preset::PsiE, 10.0), Qubit::First)
                - Matrix2::new(ONE, Z, Z, Z))
            .camax()
                < 1e-15
        );

        // photon-number matching keeps the full coherence: ρ₁₄ = ½Σ|Qₖ|²
        let b = qubits_rdm(&field_state(Preset::PsiB, 20.0)).unwrap();
        assert!((b.rho[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((b.rho[(3, 3)].re - 0.5).abs() < 1e-12);
        assert!((b.rho[(0, 3)] - 0.5).norm() < 1e-12);
        assert!((concurrence(&b).unwrap().concurrence - 1.0).abs() < 1e-12);
        // D carries two more Poisson terms than A at the cutoff
        assert!(inversion(&field_state(Preset::PsiB, 20.0), Qubit::First).abs() < 1e-12);
        assert!((inversion(&field_state(Preset::PsiE, 20.0), Qubit::Second) - 1.0).abs() < 1e-15);

        let s = single_rdm(&field_state(Preset::PsiS, 10.0), Qubit::First);
        assert!((s[(0, 1)] - 0.5).norm() < 1e-12);
        assert!(s[(0, 1)].im.abs() < 1e-15);
    }

    #[test]
    fn trace_and_validate() {
        let p = ModelParams::rotating(1.0, 0.5, 0.5).unwrap();
        for preset in Preset::ALL {
            let s = evolve_state(&field_state(preset, 10.0), &p, 13.7).unwrap();
            let rho = qubits_rdm(&s).unwrap();
            rho.validate().unwrap();
            assert!(rho.raw_min_eigenvalue > -PSD_TOLERANCE);
        }
    }

    #[test]
    fn dropping_the_frozen_sector_renormalises() {
        let s = field_state(Preset::PsiS, 1.0);
        assert!(s.frozen.norm_sqr() > 0.1);
        let rho = qubits_rdm(&s.without_frozen_sector()).unwrap();
        rho.validate().unwrap();
    }

    #[test]
    fn symmetric_states_have_equal_inversions() {
        let p = ModelParams::rotating(1.0, 0.7, 0.3).unwrap();
        for preset in Preset::ALL {
            let s0 = field_state(preset, 10.0);
            for t in [2.0, 11.0, 29.0] {
                let s = evolve_state(&s0, &p, t).unwrap();
                let (i1, i2) = (inversion(&s, Qubit::First), inversion(&s, Qubit::Second));
                assert!((i1 - i2).abs() < 1e-13);
                assert!(i1.abs() <= 1.0);
            }
        }
    }

    fn random_state(amps: &[f64], nbar: f64, t: f64) -> StateVector {
        let raw: [C64; 4] = std::array::from_fn(|k| C64::new(amps[2 * k], amps[2 * k + 1]));
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let q = QubitInitState::new(raw[0] / norm, raw[1] / norm, raw[2] / norm, raw[3] / norm)
            .unwrap();
        let f = coherent_weights(C64::new(nbar.sqrt(), 0.0), 1e-12).unwrap();
        let p = ModelParams::rotating(1.0, amps[8].abs(), amps[9]).unwrap();
        evolve_state(&initial_state(&q, &f), &p, t).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn local_phases_leave_concurrence_invariant(
            amps in proptest::array::uniform10(-1.0f64..1.0),
            t in 0.0f64..30.0,
            th1 in -3.0f64..3.0,
            th2 in -3.0f64..3.0,
        ) {
            prop_assume!(amps[..8].iter().map(|x| x * x).sum::<f64>() > 1e-2);
            let rho = qubits_rdm(&random_state(&amps, 5.0, t)).unwrap();
            // e^{iθσz} on each qubit: diagonal phases in the product basis
            let z1 = [1.0, 1.0, -1.0, -1.0];
            let z2 = [1.0, -1.0, 1.0, -1.0];
            let u = Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| {
                C64::from_polar(1.0, th1 * z1[i] + th2 * z2[i])
            }));
            let rotated = TwoQubitDensity { rho: u * rho.rho * u.adjoint(), ..rho.clone() };
            let c0 = concurrence(&rho).unwrap().concurrence;
            let c1 = concurrence(&rotated).unwrap().concurrence;
            prop_assert!((c0 - c1).abs() < 1e-12);
        }

        #[test]
        fn partial_traces_agree(amps in proptest::array::uniform10(-1.0f64..1.0), t in 0.0f64..30.0) {
            prop_assume!(amps[..8].iter().map(|x| x * x).sum::<f64>() > 1e-2);
            let s = random_state(&amps, 4.0, t);
            let rho = qubits_rdm(&s).unwrap();
            for q in [Qubit::First, Qubit::Second] {
                prop_assert!((rho.reduce(q) - single_rdm(&s, q)).camax() < 1e-12);
                let r = single_rdm(&s, q);
                prop_assert!((r[(0, 0)].re - r[(1, 1)].re - inversion(&s, q)).abs() < 1e-13);
            }
        }

        #[test]
        fn indexed_sums_match_dense_trace(amps in proptest::array::uniform10(-1.0f64..1.0), t in 0.0f64..30.0) {
            prop_assume!(amps[..8].iter().map(|x| x * x).sum::<f64>() > 1e-2);
            let s = random_state(&amps, 6.0, t);
            let dense = dense_qubit_density(&s);
            let dense = dense.unscale(dense.trace().re);
            prop_assert!((qubits_rdm(&s).unwrap().rho - dense).camax() < 1e-12);
        }

        #[test]
        fn eof_is_monotone(c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
            let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
            prop_assert!(eof(lo) <= eof(hi));
            prop_assert!((0.0..=1.0).contains(&eof(hi)));
        }
    }
}
