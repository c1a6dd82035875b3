//! Characteristic roots of a single excitation manifold.
//!
//! The symmetric amplitude K = Bₙ₊₁ + Cₙ₊₁ obeys a third-order linear ODE whose
//! characteristic polynomial is
//!
//! ```text
//! m³ + iλ₂m² + [2(αₙ² + βₙ²) + Δ²] m − i[2Δ(αₙ² − βₙ²) − λ₂Δ²] = 0
//! ```
//!
//! It is solved in closed form by Cardano's method. Each of the two radicals
//! v₁, v₂ has three complex cube roots; every one of the nine pairings is
//! tried and the pairings whose roots actually satisfy the polynomial (and
//! stay on the imaginary axis) are kept.

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Acceptance bound on the scaled polynomial residual and Vieta sums.
pub const ROOT_RESIDUAL_TOLERANCE: f64 = 1.0e-10;
/// Bound on |Re mⱼ| / scale.
pub const PHYSICALITY_TOLERANCE: f64 = 1.0e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Monic cubic m³ + c2·m² + c1·m + c0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicCubic {
    pub c2: C64,
    pub c1: C64,
    pub c0: C64,
}

impl CharacteristicCubic {
    pub fn for_block(lambda2: f64, detuning: f64, alpha_n: f64, beta_n: f64) -> Self {
        let (a2, b2, d) = (alpha_n * alpha_n, beta_n * beta_n, detuning);
        Self {
            c2: C64::new(0.0, lambda2),
            c1: C64::new(2.0 * (a2 + b2) + d * d, 0.0),
            c0: C64::new(0.0, -(2.0 * d * (a2 - b2) - lambda2 * d * d)),
        }
    }

    #[inline]
    pub fn eval(&self, m: C64) -> C64 {
        ((m + self.c2) * m + self.c1) * m + self.c0
    }

    /// Roots from the eigenvalues of the companion matrix (independent of
    /// Cardano), sorted the same way as [`CubicRoots::roots`].
    pub fn companion_roots(&self) -> Result<[C64; 3]> {
        let z = C64::default();
        let one = C64::new(1.0, 0.0);
        let companion = Matrix3::new(
            -self.c2, -self.c1, -self.c0, //
            one, z, z, //
            z, one, z,
        );
        let schur = companion.try_schur(f64::EPSILON, 10_000).ok_or_else(|| {
            Error::NumericalDegradation("companion matrix Schur form did not converge".into())
        })?;
        let ev = schur.eigenvalues().ok_or_else(|| {
            Error::NumericalDegradation("companion eigenvalues unavailable".into())
        })?;
        let mut roots = [ev[0], ev[1], ev[2]];
        sort_roots(&mut roots);
        Ok(roots)
    }
}

/// The three characteristic roots of manifold `n`, with the Cardano
/// intermediates that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub n: usize,
    /// Sorted by imaginary part, descending (ties: real part descending).
    pub roots: [C64; 3],
    /// μ: constant term of the depressed cubic y³ + ηy + μ.
    pub mu: C64,
    /// η: linear coefficient of the depressed cubic.
    pub eta: f64,
    /// Accepted pairing, 3·k₁ + k₂ where vᵢ = ∛uᵢ · e^{2πikᵢ/3}.
    pub branch_id: u8,
    /// Number of the nine pairings that passed the filters.
    pub accepted_pairings: u8,
    /// Scaled residual of the raw Cardano roots for the accepted pairing.
    pub cardano_residual: f64,
    /// Frequency scale of this manifold.
    pub scale: f64,
    pub cubic: CharacteristicCubic,
}

impl CubicRoots {
    /// Smallest pairwise distance between roots.
    pub fn min_separation(&self) -> f64 {
        let [a, b, c] = self.roots;
        (a - b).norm().min((a - c).norm()).min((b - c).norm())
    }

    /// Scaled Vieta residuals (sum, pair sum, product), each divided by
    /// scale^k for the degree-k symmetric function.
    pub fn vieta_residuals(&self) -> [f64; 3] {
        let [m1, m2, m3] = self.roots;
        let s = self.scale;
        [
            (m1 + m2 + m3 + self.cubic.c2).norm() / s,
            (m1 * m2 + m1 * m3 + m2 * m3 - self.cubic.c1).norm() / (s * s),
            (m1 * m2 * m3 + self.cubic.c0).norm() / (s * s * s),
        ]
    }

    /// Largest |p(mⱼ)| / scale³.
    pub fn polynomial_residual(&self) -> f64 {
        let s3 = self.scale.powi(3);
        self.roots
            .iter()
            .map(|&m| self.cubic.eval(m).norm() / s3)
            .fold(0.0, f64::max)
    }
}

/// Manifold-local frequency scale max(1, βₙ, λ₂, |Δ|).
pub fn block_scale(params: &ModelParams, n: usize) -> f64 {
    1.0_f64
        .max(params.lambda1 * ((n + 2) as f64).sqrt())
        .max(params.lambda2)
        .max(params.delta.abs())
}

fn sort_roots(roots: &mut [C64; 3]) {
    roots.sort_by(|a, b| b.im.total_cmp(&a.im).then(b.re.total_cmp(&a.re)));
}

/// Principal cube root.
fn cbrt(z: C64) -> C64 {
    if z == C64::default() {
        return z;
    }
    C64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

/// Closed-form roots for manifold `n`.
pub fn block_roots(params: &ModelParams, n: usize) -> Result<CubicRoots> {
    let alpha_n = params.lambda1 * ((n + 1) as f64).sqrt();
    let beta_n = params.lambda1 * ((n + 2) as f64).sqrt();
    let (l2, d) = (params.lambda2, params.delta);
    let (a2, b2) = (alpha_n * alpha_n, beta_n * beta_n);
    let scale = block_scale(params, n);
    let cubic = CharacteristicCubic::for_block(l2, d, alpha_n, beta_n);

    let mu = -I / 27.0 * (2.0 * l2.powi(3) + 18.0 * l2 * (a2 + b2 - d * d) + 54.0 * d * (a2 - b2));
    let eta = (6.0 * (a2 + b2) + 3.0 * d * d + l2 * l2) / 3.0;
    let disc = (mu * mu / 4.0 + eta.powi(3) / 27.0).sqrt();
    let (u1, u2) = (-mu / 2.0 + disc, -mu / 2.0 - disc);
    let (r1, r2) = (cbrt(u1), cbrt(u2));
    let unity = [
        C64::new(1.0, 0.0),
        C64::from_polar(1.0, 2.0 * std::f64::consts::FRAC_PI_3),
        C64::from_polar(1.0, -2.0 * std::f64::consts::FRAC_PI_3),
    ];
    let shift = I * l2 / 3.0;
    let half_sqrt3 = 0.5 * 3f64.sqrt();

    let s3 = scale.powi(3);
    let mut best: Option<(f64, u8, [C64; 3])> = None;
    let mut best_any = f64::INFINITY;
    let mut accepted = 0u8;
    for (k1, w1) in unity.iter().enumerate() {
        for (k2, w2) in unity.iter().enumerate() {
            let (v1, v2) = (r1 * w1, r2 * w2);
            let sum = v1 + v2;
            let diff = v1 - v2;
            let m = [
                sum - shift,
                -sum / 2.0 + I * half_sqrt3 * diff - shift,
                -sum / 2.0 - I * half_sqrt3 * diff - shift,
            ];
            let residual = m
                .iter()
                .map(|&x| cubic.eval(x).norm() / s3)
                .fold(0.0, f64::max);
            let pair_sum =
                (m[0] * m[1] + m[0] * m[2] + m[1] * m[2] - cubic.c1).norm() / (scale * scale);
            let product = (m[0] * m[1] * m[2] + cubic.c0).norm() / s3;
            let worst = residual.max(pair_sum).max(product);
            best_any = best_any.min(worst);
            let physical = m
                .iter()
                .all(|x| x.re.abs() <= PHYSICALITY_TOLERANCE * scale);
            if worst <= ROOT_RESIDUAL_TOLERANCE && physical {
                accepted += 1;
                if best.is_none_or(|(r, _, _)| worst < r) {
                    best = Some((worst, (3 * k1 + k2) as u8, m));
                }
            }
        }
    }
    let (cardano_residual, branch_id, raw) = best.ok_or(Error::BranchSelection {
        n,
        best_residual: best_any,
    })?;

    // The generator is Hermitian up to a similarity, so mⱼ = −iεⱼ with real εⱼ.
    // Project onto the imaginary axis and polish εⱼ with Newton steps on the
    // real cubic ε³ − λ₂ε² − c1·ε − c0' = 0.
    let c1 = cubic.c1.re;
    let c0 = 2.0 * d * (a2 - b2) - l2 * d * d;
    let real_cubic = |e: f64| ((e - l2) * e - c1) * e - c0;
    let real_slope = |e: f64| (3.0 * e - 2.0 * l2) * e - c1;
    let mut roots = raw.map(|m| {
        let mut e = -m.im;
        let mut f = real_cubic(e);
        for _ in 0..4 {
            let slope = real_slope(e);
            if slope == 0.0 || f == 0.0 {
                break;
            }
            let next = e - f / slope;
            let f_next = real_cubic(next);
            if f_next.abs() >= f.abs() {
                break;
            }
            e = next;
            f = f_next;
        }
        C64::new(0.0, -e)
    });
    sort_roots(&mut roots);

    Ok(CubicRoots {
        n,
        roots,
        mu,
        eta,
        branch_id,
        accepted_pairings: accepted,
        cardano_residual,
        scale,
        cubic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(l1: f64, l2: f64, d: f64) -> ModelParams {
        ModelParams::rotating(l1, l2, d).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn resonant_no_exchange_ground_manifold() {
        // m³ + 6m = 0 → {i√6, 0, −i√6}
        let r = block_roots(&params(1.0, 0.0, 0.0), 0).unwrap();
        let s6 = 6f64.sqrt();
        assert!(close(r.roots[0], C64::new(0.0, s6), 1e-12), "{:?}", r.roots);
        assert!(close(r.roots[1], C64::default(), 1e-12));
        assert!(close(r.roots[2], C64::new(0.0, -s6), 1e-12));
        assert!(r.polynomial_residual() < 1e-14);
    }

    #[test]
    fn pure_exchange_has_double_root() {
        // m³ + im² = 0 → {0, 0, −i}
        for n in [0, 3, 17] {
            let r = block_roots(&params(0.0, 1.0, 0.0), n).unwrap();
            assert!(close(r.roots[0], C64::default(), 1e-7), "{:?}", r.roots);
            assert!(close(r.roots[1], C64::default(), 1e-7));
            assert!(close(r.roots[2], C64::new(0.0, -1.0), 1e-12));
            assert!(r.min_separation() < 1e-6);
        }
    }

    #[test]
    fn companion_matrix_agrees() {
        let p = params(1.0, 0.7, -0.4);
        for n in 0..30 {
            let r = block_roots(&p, n).unwrap();
            let c = r.cubic.companion_roots().unwrap();
            for j in 0..3 {
                assert!(
                    close(r.roots[j], c[j], 1e-10 * r.scale),
                    "n={n}: {:?} vs {:?}",
                    r.roots,
                    c
                );
            }
        }
    }

    #[test]
    fn three_pairings_survive() {
        let r = block_roots(&params(1.0, 0.5, 0.5), 4).unwrap();
        assert_eq!(r.accepted_pairings, 3);
    }

    proptest! {
        #[test]
        fn vieta_and_residual_hold(
            l1 in 0.0f64..2.0,
            l2 in 0.0f64..2.0,
            d in -1.0f64..1.0,
            n in 0usize..200,
        ) {
            prop_assume!(l1 > 0.0 || l2 > 0.0);
            let r = block_roots(&params(l1, l2, d), n).unwrap();
            for v in r.vieta_residuals() {
                prop_assert!(v < ROOT_RESIDUAL_TOLERANCE, "{:?}", r.vieta_residuals());
            }
            prop_assert!(r.polynomial_residual() < ROOT_RESIDUAL_TOLERANCE);
            for m in r.roots {
                prop_assert!(m.re.abs() <= PHYSICALITY_TOLERANCE * r.scale);
            }
            prop_assert!(r.roots[0].im >= r.roots[1].im && r.roots[1].im >= r.roots[2].im);
        }
    }
}
