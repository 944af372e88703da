//! Drift fields, the drift Jacobian, s-ordered diffusion matrices,
//! positive-semidefiniteness analysis and noise-matrix factorization.
//!
//! The phase-space coordinates are `(alpha, alpha*)` for the s-ordered
//! distributions and an independent pair `(alpha, beta)` in the doubled
//! (generalized-P) representation, where `beta` equals `alpha*` only in the
//! mean. All drift/diffusion pieces below are evaluated after truncation to
//! drift-plus-diffusion form; the exact s-dependent drift is kept only to
//! quantify the detuning shift it would introduce.

use crate::error::{Error, Result};
use crate::mat2::{ComplexMat2, RealMat2};
use crate::model::SystemParams;
use num_complex::Complex64;

/// Phase-space representation choice: an s-ordered distribution with
/// `s` in [-1, 1] (s = 1 Glauber-Sudarshan P, s = 0 Wigner, s = -1 Husimi Q)
/// or the doubled-phase-space generalized P.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrderingSelector {
    SOrder(f64),
    GeneralizedP,
}

impl OrderingSelector {
    /// Validated s-ordering.
    pub fn s_order(s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::InvalidConfig(format!(
                "ordering parameter must lie in [-1, 1], got {s}"
            )));
        }
        Ok(Self::SOrder(s))
    }

    /// The value of s entering the diffusion matrix; the generalized P shares
    /// the s = +1 matrix (with the second coordinate read as beta).
    pub fn effective_s(&self) -> f64 {
        match self {
            Self::SOrder(s) => *s,
            Self::GeneralizedP => 1.0,
        }
    }

    pub fn is_doubled(&self) -> bool {
        matches!(self, Self::GeneralizedP)
    }

    pub fn label(&self) -> String {
        match self {
            Self::SOrder(s) => format!("s={s}"),
            Self::GeneralizedP => "P".to_string(),
        }
    }
}

/// Truncated drift `(A1, A2)` at `(alpha, alpha*)`:
/// `A1 = E0 - (gamma/2 + i theta) alpha + i g alpha^2 alpha*`, `A2 = A1*`.
pub fn drift(alpha: Complex64, p: &SystemParams) -> (Complex64, Complex64) {
    let a1 = drift_first(alpha, alpha.conj(), p);
    (a1, a1.conj())
}

/// Truncated drift on the doubled phase space, with the second coordinate
/// `beta` replacing `alpha*` everywhere.
pub fn drift_doubled(
    alpha: Complex64,
    beta: Complex64,
    p: &SystemParams,
) -> (Complex64, Complex64) {
    let a1 = drift_first(alpha, beta, p);
    let a2 = Complex64::new(p.pump, 0.0)
        - Complex64::new(0.5 * p.gamma, -p.detuning) * beta
        - Complex64::I * p.coupling * alpha * beta * beta;
    (a1, a2)
}

fn drift_first(alpha: Complex64, second: Complex64, p: &SystemParams) -> Complex64 {
    Complex64::new(p.pump, 0.0) - Complex64::new(0.5 * p.gamma, p.detuning) * alpha
        + Complex64::I * p.coupling * alpha * alpha * second
}

/// Untruncated s-dependent drift; differs from [`drift`] only by the
/// detuning shift `s g`, which the truncation drops.
pub fn drift_s_exact(alpha: Complex64, p: &SystemParams, s: f64) -> (Complex64, Complex64) {
    let shifted = SystemParams {
        detuning: p.detuning - s * p.coupling,
        ..*p
    };
    drift(alpha, &shifted)
}

/// Jacobian of the truncated drift at an amplitude, in `(alpha, alpha*)`
/// coordinates. At a stable fixed point all eigenvalues have negative real
/// part and the trace is exactly `-gamma`.
pub fn drift_jacobian(alpha_bar: Complex64, p: &SystemParams) -> ComplexMat2 {
    let a11 = -Complex64::new(0.5 * p.gamma, p.detuning)
        + Complex64::new(0.0, 2.0 * p.coupling) * alpha_bar.norm_sqr();
    let a12 = Complex64::I * p.coupling * alpha_bar * alpha_bar;
    ComplexMat2::new(a11, a12, a12.conj(), a11.conj())
}

/// s-ordered diffusion matrix
/// `D = [[i s g alpha^2, (1-s) gamma/2], [(1-s) gamma/2, -i s g alpha*^2]]`.
///
/// For the generalized P the same matrix applies with s = 1 and the second
/// coordinate read as `beta = alpha*` (the steady-state identification).
pub fn diffusion(ord: OrderingSelector, alpha: Complex64, p: &SystemParams) -> ComplexMat2 {
    diffusion_doubled(ord.effective_s(), alpha, alpha.conj(), p)
}

/// Diffusion matrix with independent coordinates; off-diagonals vanish for
/// s = 1, which is the generalized-P case used along doubled trajectories.
pub fn diffusion_doubled(
    s: f64,
    alpha: Complex64,
    beta: Complex64,
    p: &SystemParams,
) -> ComplexMat2 {
    let off = Complex64::new(0.5 * (1.0 - s) * p.gamma, 0.0);
    let d11 = Complex64::new(0.0, s * p.coupling) * alpha * alpha;
    let d22 = -Complex64::new(0.0, s * p.coupling) * beta * beta;
    ComplexMat2::new(d11, off, off, d22)
}

/// Two-ordering combination
/// `(1-s')/(s-s') D_s + (1-s)/(s'-s) D_s'`, which reproduces the s = 1
/// diffusion matrix identically (the entries are affine in s).
pub fn combine_diffusion(
    s: f64,
    s_prime: f64,
    d_s: &ComplexMat2,
    d_s_prime: &ComplexMat2,
) -> Result<ComplexMat2> {
    let (w, w_prime) = combination_weights(s, s_prime)?;
    Ok(*d_s * w + *d_s_prime * w_prime)
}

/// Weights `(1-s')/(s-s')` and `(1-s)/(s'-s)` of the two-ordering
/// combination.
pub fn combination_weights(s: f64, s_prime: f64) -> Result<(f64, f64)> {
    if s == s_prime {
        return Err(Error::EqualOrderings(s));
    }
    Ok(((1.0 - s_prime) / (s - s_prime), (1.0 - s) / (s_prime - s)))
}

/// Diffusion matrix in the real coordinates `x = Re alpha`, `y = Im alpha`.
pub fn diffusion_real(s: f64, x: f64, y: f64, p: &SystemParams) -> RealMat2 {
    let iso = 0.25 * (1.0 - s) * p.gamma;
    let g = p.coupling;
    let off = 0.5 * s * g * (x * x - y * y);
    RealMat2::new(iso - s * g * x * y, off, off, iso + s * g * x * y)
}

/// Eigenvalues `d_pm = (1-s) gamma/4 ± |s g| |alpha|^2 / 2` of the real
/// diffusion matrix, returned as `(d_plus, d_minus)`.
pub fn diffusion_eigenvalues(s: f64, alpha: Complex64, p: &SystemParams) -> (f64, f64) {
    let iso = 0.25 * (1.0 - s) * p.gamma;
    let shift = 0.5 * (s * p.coupling).abs() * alpha.norm_sqr();
    (iso + shift, iso - shift)
}

/// Tolerance slack used by the positive-semidefiniteness test, relative to
/// the loss rate.
pub const PSD_REL_TOL: f64 = 1e-12;

/// Whether the s-ordered diffusion matrix is positive semidefinite at this
/// amplitude, i.e. `|alpha|^2 <= (gamma/|g|) (1-s) / (2|s|)`.
///
/// Always true for s = 0, true only at the origin for s = 1 with nonzero
/// coupling. The generalized P needs no PSD condition (its coordinates are
/// not complex conjugates), so it reports true.
pub fn is_psd(ord: OrderingSelector, alpha: Complex64, p: &SystemParams) -> bool {
    match ord {
        OrderingSelector::GeneralizedP => true,
        OrderingSelector::SOrder(s) => {
            let (_, d_minus) = diffusion_eigenvalues(s, alpha, p);
            d_minus >= -PSD_REL_TOL * p.gamma
        }
    }
}

/// How to factor the diffusion matrix for Langevin simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    /// Real noise that keeps the second coordinate the complex conjugate of
    /// the first; requires a PSD diffusion matrix.
    RealConjugate,
    /// Complex noise on independent coordinates; factors the symmetric
    /// matrix without conjugation and needs no PSD condition.
    ComplexDoubled,
}

const PIVOT_REL_TOL: f64 = 1e-14;

/// Noise factor `B` with `B B^T = D` (plain transpose).
///
/// `RealConjugate` returns the real Cholesky factor of the `(x, y)` diffusion
/// matrix mapped back to the complex pair; `ComplexDoubled` performs a
/// complex Cholesky-without-conjugation with principal-branch square roots,
/// falling back to the permuted pivot when the leading entry vanishes.
pub fn noise_factor(
    ord: OrderingSelector,
    alpha: Complex64,
    p: &SystemParams,
    mode: NoiseMode,
) -> Result<ComplexMat2> {
    match mode {
        NoiseMode::RealConjugate => {
            let s = ord.effective_s();
            let l = real_noise_factor(s, alpha.re, alpha.im, p)?;
            // (x, y) noise rows mapped to (alpha, alpha*) through
            // alpha = x + i y
            Ok(ComplexMat2::new(
                Complex64::new(l.m11, l.m21),
                Complex64::new(l.m12, l.m22),
                Complex64::new(l.m11, -l.m21),
                Complex64::new(l.m12, -l.m22),
            ))
        }
        NoiseMode::ComplexDoubled => {
            symmetric_factor(&diffusion(ord, alpha, p), p.gamma)
        }
    }
}

/// Real lower-triangular Cholesky factor of the `(x, y)` diffusion matrix.
pub fn real_noise_factor(s: f64, x: f64, y: f64, p: &SystemParams) -> Result<RealMat2> {
    let d = diffusion_real(s, x, y, p);
    let (_, d_minus) = d.sym_eigenvalues();
    if d_minus < -PSD_REL_TOL * p.gamma {
        return Err(Error::NonPositiveDiffusion { d_minus });
    }
    d.cholesky(PSD_REL_TOL * p.gamma.max(d.max_abs()))
        .ok_or(Error::NonPositiveDiffusion { d_minus })
}

/// Factor for the doubled-trajectory diffusion `diag(i g alpha^2, -i g beta^2)`.
pub fn noise_factor_doubled(alpha: Complex64, beta: Complex64, p: &SystemParams) -> ComplexMat2 {
    let d11 = Complex64::new(0.0, p.coupling) * alpha * alpha;
    let d22 = -Complex64::new(0.0, p.coupling) * beta * beta;
    ComplexMat2::diag(d11.sqrt(), d22.sqrt())
}

/// Complex Cholesky-without-conjugation of a symmetric 2x2 matrix:
/// lower-triangular `B` with `B11 = sqrt(D11)` on the principal branch,
/// `B21 = D21 / B11`, `B22 = sqrt(D22 - B21^2)`.
fn symmetric_factor(d: &ComplexMat2, gamma: f64) -> Result<ComplexMat2> {
    let thresh = PIVOT_REL_TOL * gamma;
    let z = Complex64::ZERO;
    if d.m11.norm() >= thresh {
        let b11 = d.m11.sqrt();
        let b21 = d.m21 / b11;
        let b22 = (d.m22 - b21 * b21).sqrt();
        return Ok(ComplexMat2::new(b11, z, b21, b22));
    }
    if d.m12.norm() < thresh {
        // effectively diagonal
        return Ok(ComplexMat2::diag(d.m11.sqrt(), d.m22.sqrt()));
    }
    if d.m22.norm() >= thresh {
        // permuted pivot: factor the swapped matrix, swap rows back
        let b22 = d.m22.sqrt();
        let b12 = d.m12 / b22;
        let b11 = (d.m11 - b12 * b12).sqrt();
        return Ok(ComplexMat2::new(b11, b12, z, b22));
    }
    Err(Error::SingularPivot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScaledParams, SystemParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(gamma: f64, detuning: f64, coupling: f64, pump: f64) -> SystemParams {
        SystemParams::new(gamma, detuning, coupling, pump).unwrap()
    }

    #[test]
    fn drift_at_origin_is_pump() {
        let p = params(2.0, 0.7, 1.0, 3.0);
        let (a1, a2) = drift(Complex64::ZERO, &p);
        assert_eq!(a1, c(3.0, 0.0));
        assert_eq!(a2, c(3.0, 0.0));
    }

    #[test]
    fn drift_hand_value() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let (a1, _) = drift(Complex64::ONE, &p);
        assert!((a1 - c(-1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn drift_vanishes_at_steady_states() {
        for (delta, mu, eta) in [(0.0, 2.0, 1.0), (2.0, 3.0, 1.0), (-1.0, 0.7, -1.0)] {
            let gamma: f64 = 2.0;
            let g = eta * 0.8;
            let theta = delta * gamma / (2.0 * eta);
            let pump = (mu / ((2.0 / gamma).powi(3) * g.abs())).sqrt();
            let p = params(gamma, theta, g, pump);
            for st in p.steady_states().unwrap() {
                let alpha = st.alpha.unwrap();
                let (a1, a2) = drift(alpha, &p);
                let tol = 1e-9 * gamma.max(pump);
                assert!(a1.norm() <= tol, "residual {:.2e}", a1.norm());
                assert!(a2.norm() <= tol);
            }
        }
    }

    #[test]
    fn exact_drift_differs_by_detuning_shift() {
        // |A^(s) - A| = |s g alpha| for any alpha
        let p = params(2.0, 1.0, 0.3, 0.0);
        let alpha = c(0.3, -0.8);
        let (a1, _) = drift(alpha, &p);
        for s in [-1.0, 0.4, 1.0] {
            let (a1s, _) = drift_s_exact(alpha, &p, s);
            let diff = (a1s - a1).norm();
            assert!((diff - (s * p.coupling * alpha).norm()).abs() < 1e-15);
        }
        let (a10, _) = drift_s_exact(alpha, &p, 0.0);
        assert_eq!(a10, a1);

        // the shift is negligible at physical coupling strengths
        let p = params(2.0, 1.0, 1e-9, 0.0);
        let (a1, _) = drift(alpha, &p);
        let (a1s, _) = drift_s_exact(alpha, &p, 1.0);
        assert!((a1s - a1).norm() < 1e-8);
    }

    #[test]
    fn jacobian_of_empty_cavity_is_diagonal() {
        let p = params(2.0, 0.5, 1.0, 0.0);
        let j = drift_jacobian(Complex64::ZERO, &p);
        assert_eq!(j.m11, c(-1.0, -0.5));
        assert_eq!(j.m22, c(-1.0, 0.5));
        assert_eq!(j.m12, Complex64::ZERO);
        assert_eq!(j.m21, Complex64::ZERO);
    }

    #[test]
    fn jacobian_trace_is_minus_gamma() {
        let p = params(3.0, -0.4, 0.6, 1.0);
        let j = drift_jacobian(c(1.3, -0.2), &p);
        assert!((j.trace() - c(-3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params(2.0, 0.8, 0.9, 1.5);
        let alpha = c(0.7, -1.1);
        let j = drift_jacobian(alpha, &p);
        let h = 1e-6 * alpha.norm().max(1.0);
        let beta = alpha.conj();
        let fd = |da: Complex64, db: Complex64| {
            let (p1, _) = drift_doubled(alpha + da, beta + db, &p);
            let (m1, _) = drift_doubled(alpha - da, beta - db, &p);
            (p1 - m1) / (2.0 * h)
        };
        // derivative with respect to alpha: average of real and imaginary probes
        let d_alpha = 0.5 * (fd(c(h, 0.0), Complex64::ZERO)
            + fd(c(0.0, h), Complex64::ZERO) * c(0.0, -1.0));
        let d_beta = 0.5 * (fd(Complex64::ZERO, c(h, 0.0))
            + fd(Complex64::ZERO, c(0.0, h)) * c(0.0, -1.0));
        assert!((d_alpha - j.m11).norm() <= 1e-6 * j.m11.norm());
        assert!((d_beta - j.m12).norm() <= 1e-6 * j.m12.norm());
    }

    #[test]
    fn wigner_diffusion_is_off_diagonal() {
        let p = params(2.0, 0.3, 1.0, 0.5);
        let d = diffusion(OrderingSelector::SOrder(0.0), c(1.7, -0.4), &p);
        assert_eq!(d.m11, Complex64::ZERO);
        assert_eq!(d.m22, Complex64::ZERO);
        assert_eq!(d.m12, c(1.0, 0.0));
        assert_eq!(d.m21, c(1.0, 0.0));
    }

    #[test]
    fn p_diffusion_is_diagonal() {
        let p = params(2.0, 0.3, 1.0, 0.5);
        let alpha = c(0.6, 0.9);
        let d = diffusion(OrderingSelector::SOrder(1.0), alpha, &p);
        assert_eq!(d.m12, Complex64::ZERO);
        assert_eq!(d.m21, Complex64::ZERO);
        assert!((d.m11 - Complex64::I * alpha * alpha).norm() < 1e-15);
        assert!((d.m22 - d.m11.conj()).norm() < 1e-15);
    }

    #[test]
    fn husimi_diffusion_hand_value() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let d = diffusion(OrderingSelector::SOrder(-1.0), Complex64::ONE, &p);
        assert_eq!(d.m11, c(0.0, -1.0));
        assert_eq!(d.m12, c(2.0, 0.0));
        assert_eq!(d.m21, c(2.0, 0.0));
        assert_eq!(d.m22, c(0.0, 1.0));
    }

    #[test]
    fn combination_reproduces_p_diffusion() {
        let p = params(2.0, 0.1, 1.0, 0.5);
        let alpha = c(1.0, 1.0);
        let d1 = diffusion(OrderingSelector::SOrder(1.0), alpha, &p);

        let d0 = diffusion(OrderingSelector::SOrder(0.0), alpha, &p);
        let dq = diffusion(OrderingSelector::SOrder(-1.0), alpha, &p);
        let comb = combine_diffusion(0.0, -1.0, &d0, &dq).unwrap();
        assert!((comb - d1).max_abs() < 1e-14 * d1.max_abs());

        let ds = diffusion(OrderingSelector::SOrder(0.5), alpha, &p);
        let dsp = diffusion(OrderingSelector::SOrder(-0.3), alpha, &p);
        let comb = combine_diffusion(0.5, -0.3, &ds, &dsp).unwrap();
        assert!((comb - d1).max_abs() < 1e-14 * d1.max_abs());

        // degenerate weights: s' = 1 returns D^(1)
        let comb = combine_diffusion(0.2, 1.0, &ds, &d1).unwrap();
        assert!((comb - d1).max_abs() < 1e-14 * d1.max_abs());

        assert!(matches!(
            combine_diffusion(0.5, 0.5, &ds, &ds),
            Err(Error::EqualOrderings(_))
        ));
    }

    #[test]
    fn real_diffusion_cases() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let d = diffusion_real(0.0, 1.3, -0.7, &p);
        assert_eq!(d.m11, 0.5);
        assert_eq!(d.m22, 0.5);
        assert_eq!(d.m12, 0.0);

        let d = diffusion_real(1.0, 1.0, 0.0, &p);
        assert_eq!(d.m11, 0.0);
        assert_eq!(d.m12, 0.5);
        assert_eq!(d.m22, 0.0);
        let (dp, dm) = d.sym_eigenvalues();
        assert!((dp - 0.5).abs() < 1e-15 && (dm + 0.5).abs() < 1e-15);

        // trace is (1-s) gamma / 2 independent of (x, y)
        let d = diffusion_real(0.7, 2.0, -3.0, &p);
        assert!((d.trace() - 0.5 * (1.0 - 0.7) * p.gamma).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_formula_matches_direct_solve() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let alpha = Complex64::ONE;
        let (dp, dm) = diffusion_eigenvalues(1.0, alpha, &p);
        assert!((dp - 0.5).abs() < 1e-15 && (dm + 0.5).abs() < 1e-15);
        let (dp, dm) = diffusion_eigenvalues(-1.0, alpha, &p);
        assert!((dp - 1.5).abs() < 1e-15 && (dm - 0.5).abs() < 1e-15);
        let (dp, dm) = diffusion_eigenvalues(0.0, c(4.0, -2.0), &p);
        assert_eq!(dp, 0.5);
        assert_eq!(dm, 0.5);
    }

    #[test]
    fn psd_truth_table() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let w = OrderingSelector::SOrder(0.0);
        for &r in &[0.0, 0.5, 10.0, 1e3] {
            assert!(is_psd(w, c(r, 0.0), &p));
        }
        assert!(is_psd(OrderingSelector::SOrder(1.0), Complex64::ZERO, &p));
        assert!(!is_psd(OrderingSelector::SOrder(1.0), Complex64::ONE, &p));
        // s = -1 bound at |alpha|^2 = gamma/|g|
        let bound = (p.gamma / p.coupling.abs()).sqrt();
        assert!(is_psd(OrderingSelector::SOrder(-1.0), c(bound * 0.7, 0.0), &p));
        assert!(!is_psd(
            OrderingSelector::SOrder(-1.0),
            c(bound * (1.0 + 1e-6), 0.0),
            &p
        ));
        assert!(is_psd(OrderingSelector::GeneralizedP, c(100.0, 0.0), &p));
    }

    #[test]
    fn real_conjugate_factor_wigner() {
        let p = params(2.0, 0.4, 1.0, 0.2);
        // the (x, y) factor is isotropic for s = 0: sqrt(gamma/4) * identity
        let l = real_noise_factor(0.0, 0.8, -0.3, &p).unwrap();
        let root = (p.gamma / 4.0).sqrt();
        assert!((l.m11 - root).abs() < 1e-15 && (l.m22 - root).abs() < 1e-15);
        assert_eq!(l.m12, 0.0);
        assert_eq!(l.m21, 0.0);

        let b = noise_factor(OrderingSelector::SOrder(0.0), c(0.8, -0.3), &p, NoiseMode::RealConjugate)
            .unwrap();
        let d = diffusion(OrderingSelector::SOrder(0.0), c(0.8, -0.3), &p);
        let res = (b * b.transpose() - d).max_abs();
        assert!(res <= 1e-12 * (d.max_abs() + p.gamma));
        // rows are conjugate pairs
        assert!((b.m21 - b.m11.conj()).norm() < 1e-15);
        assert!((b.m22 - b.m12.conj()).norm() < 1e-15);
    }

    #[test]
    fn real_conjugate_rejects_p_ordering() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let err = noise_factor(
            OrderingSelector::SOrder(1.0),
            Complex64::ONE,
            &p,
            NoiseMode::RealConjugate,
        );
        assert!(matches!(err, Err(Error::NonPositiveDiffusion { .. })));
    }

    #[test]
    fn complex_doubled_principal_roots() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let b = noise_factor(
            OrderingSelector::SOrder(1.0),
            Complex64::ONE,
            &p,
            NoiseMode::ComplexDoubled,
        )
        .unwrap();
        let quarter = std::f64::consts::FRAC_PI_4;
        assert!((b.m11 - Complex64::from_polar(1.0, quarter)).norm() < 1e-15);
        assert!((b.m22 - Complex64::from_polar(1.0, -quarter)).norm() < 1e-15);
        assert_eq!(b.m12, Complex64::ZERO);
        assert_eq!(b.m21, Complex64::ZERO);
    }

    #[test]
    fn complex_doubled_factors_random_orderings() {
        let p = params(2.0, 0.3, -0.7, 0.4);
        for &(s, re, im) in &[
            (0.5, 1.2, -0.4),
            (-0.9, 0.1, 2.0),
            (1.0, -1.0, 1.0),
            (-1.0, 3.0, 0.1),
            (0.04, 0.7, 0.7),
        ] {
            let alpha = c(re, im);
            let ord = OrderingSelector::SOrder(s);
            let d = diffusion(ord, alpha, &p);
            let b = noise_factor(ord, alpha, &p, NoiseMode::ComplexDoubled).unwrap();
            let res = (b * b.transpose() - d).max_abs();
            assert!(
                res <= 1e-12 * (d.max_abs() + p.gamma),
                "s={s} alpha={alpha}: residual {res:.2e}"
            );
        }
    }

    #[test]
    fn complex_doubled_singular_pivots() {
        let p = params(2.0, 0.3, -0.7, 0.4);
        // both pivots vanish at the origin for s < 1 while the off-diagonal
        // survives: no triangular factor exists
        assert!(matches!(
            noise_factor(
                OrderingSelector::SOrder(-1.0),
                Complex64::ZERO,
                &p,
                NoiseMode::ComplexDoubled
            ),
            Err(Error::SingularPivot)
        ));
        // s = 0 is antidiagonal at every amplitude; RealConjugate is the
        // mode of choice there (its diffusion matrix is PSD everywhere)
        assert!(matches!(
            noise_factor(
                OrderingSelector::SOrder(0.0),
                c(1.0, -0.5),
                &p,
                NoiseMode::ComplexDoubled
            ),
            Err(Error::SingularPivot)
        ));
        // s = 1 at the origin: the whole matrix vanishes
        let b = noise_factor(
            OrderingSelector::SOrder(1.0),
            Complex64::ZERO,
            &p,
            NoiseMode::ComplexDoubled,
        )
        .unwrap();
        assert_eq!(b.max_abs(), 0.0);
    }

    #[test]
    fn doubled_trajectory_factor() {
        let p = params(2.0, 0.0, 1.0, 0.0);
        let (alpha, beta) = (c(0.9, 0.1), c(0.8, -0.2));
        let b = noise_factor_doubled(alpha, beta, &p);
        let d = diffusion_doubled(1.0, alpha, beta, &p);
        assert!((b * b.transpose() - d).max_abs() < 1e-14);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            /// PSD at an amplitude implies PSD everywhere closer to the
            /// origin (the bound depends only on |alpha|).
            #[test]
            fn psd_region_is_monotone_in_amplitude(
                s in -1.0..1.0f64,
                r in 0.0..4.0f64,
                angle in 0.0..6.3f64,
                shrink in 0.0..1.0f64,
                angle2 in 0.0..6.3f64,
            ) {
                let p = params(2.0, 0.1, 0.8, 0.0);
                let outer = Complex64::from_polar(r, angle);
                let inner = Complex64::from_polar(r * shrink, angle2);
                let ord = OrderingSelector::SOrder(s);
                if is_psd(ord, outer, &p) {
                    prop_assert!(is_psd(ord, inner, &p));
                }
            }

            /// Both noise factorizations reproduce the diffusion matrix.
            #[test]
            fn noise_factor_residuals(
                s in -1.0..1.0f64,
                re in -2.0..2.0f64,
                im in -2.0..2.0f64,
            ) {
                let p = params(2.0, -0.3, 0.6, 0.0);
                let alpha = c(re, im);
                let ord = OrderingSelector::SOrder(s);
                let d = diffusion(ord, alpha, &p);
                let tol = 1e-12 * (d.max_abs() + p.gamma);
                if is_psd(ord, alpha, &p) {
                    let b = noise_factor(ord, alpha, &p, NoiseMode::RealConjugate).unwrap();
                    prop_assert!((b * b.transpose() - d).max_abs() <= tol);
                }
                if let Ok(b) = noise_factor(ord, alpha, &p, NoiseMode::ComplexDoubled) {
                    prop_assert!((b * b.transpose() - d).max_abs() <= tol);
                }
            }

            /// The complex diffusion matrix keeps its conjugation structure.
            #[test]
            fn diffusion_conjugation_structure(
                s in -1.0..1.0f64,
                re in -3.0..3.0f64,
                im in -3.0..3.0f64,
            ) {
                let p = params(1.7, 0.4, -1.1, 0.0);
                let d = diffusion(OrderingSelector::SOrder(s), c(re, im), &p);
                prop_assert_eq!(d.m12, d.m21);
                prop_assert!(d.m12.im == 0.0);
                prop_assert!((d.m22 - d.m11.conj()).norm() < 1e-15 * d.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn stability_agrees_with_jacobian_eigenvalues() {
        use crate::model::{classify_stability, Stability};
        let gamma = 2.0;
        for (delta, i) in [(2.0, 0.5), (2.0, 1.2), (2.0, 2.5), (0.0, 1.0), (3.0, 1.5)] {
            let sp = ScaledParams::new(delta, 1.0, 1.0).unwrap();
            let theta = delta * gamma / 2.0;
            let g = 1.0;
            let p = params(gamma, theta, g, 0.0);
            let alpha = Complex64::from_polar(
                (i * gamma / (2.0 * g)).sqrt(),
                crate::model::steady_state_phase(i, delta, sp.eta),
            );
            let j = drift_jacobian(alpha, &p);
            let (e1, e2) = j.eigenvalues();
            let max_re = e1.re.max(e2.re);
            match classify_stability(i, delta) {
                Stability::Stable => assert!(max_re < 0.0, "delta={delta} i={i}"),
                Stability::Unstable => assert!(max_re > 0.0, "delta={delta} i={i}"),
                Stability::Marginal => assert!(max_re.abs() < 1e-6),
            }
        }
    }
}
