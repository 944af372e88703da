//! Linearized spectral matrices of phase-space fluctuations, the
//! cross-ordering combination, output-field squeezing spectra and
//! intracavity quadrature variances.
//!
//! Two independent routes are provided for the spectral matrix: the
//! resolvent product `(A + i w)^-1 D (A^T - i w)^-1` in unscaled parameters,
//! and the closed forms in the scaled coordinates `(Delta, I, eta)` with
//! `Omega = 2 w / gamma`. The closed-form path works in units where
//! `2/gamma = 1`; a conversion layer (multiply by `2/gamma`, evaluate at
//! `w = gamma Omega / 2`) reconciles the two, and the tests assert their
//! agreement.

use crate::error::{Error, Result};
use crate::mat2::ComplexMat2;
use crate::model::{
    stability_discriminant, steady_state_phase, ScaledParams, Stability, SteadyState, SystemParams,
};
use crate::phase_space::{combination_weights, diffusion, drift_jacobian, OrderingSelector};
use crate::quad;
use num_complex::Complex64;

/// Shot-noise level of the output quadrature spectrum.
pub const SHOT_NOISE: f64 = 0.25;

/// Spectral matrix sampled at one frequency.
#[derive(Clone, Copy, Debug)]
pub struct SpectralMatrix {
    pub omega: f64,
    pub entries: ComplexMat2,
    pub ordering: OrderingSelector,
}

/// Quadrature-fluctuation spectrum on a frequency grid at a fixed
/// local-oscillator phase.
#[derive(Clone, Debug)]
pub struct QuadratureSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub ordering: OrderingSelector,
    /// Local-oscillator phase.
    pub phi: f64,
    /// `psi = 2 (phi_ss - phi)`, the phase entering the closed forms.
    pub psi: f64,
}

impl QuadratureSpectrum {
    pub fn compute(
        ord: OrderingSelector,
        ss: &SteadyState,
        p: &SystemParams,
        phi: f64,
        omega: &[f64],
    ) -> Result<Self> {
        let values = omega
            .iter()
            .map(|&w| quadrature_spectrum(ord, ss, p, phi, w))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            omega: omega.to_vec(),
            values,
            ordering: ord,
            phi,
            psi: 2.0 * (ss.phase - phi),
        })
    }
}

/// Output-field squeezing spectrum on a frequency grid; values at or above
/// zero, with shot noise at [`SHOT_NOISE`].
#[derive(Clone, Debug)]
pub struct SqueezingSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub phi: f64,
}

impl SqueezingSpectrum {
    pub fn compute(
        route: SqueezeRoute,
        ss: &SteadyState,
        p: &SystemParams,
        phi: f64,
        omega: &[f64],
    ) -> Result<Self> {
        let values = omega
            .iter()
            .map(|&w| squeezing_spectrum_out(route, ss, p, phi, w))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            omega: omega.to_vec(),
            values,
            phi,
        })
    }
}

/// Spectral matrix from the resolvent product at a stable steady state,
/// in unscaled parameters. Works for a linear cavity (`coupling == 0`).
pub fn spectral_matrix_numeric(
    ord: OrderingSelector,
    ss: &SteadyState,
    p: &SystemParams,
    omega: f64,
) -> Result<ComplexMat2> {
    if ss.stability == Stability::Unstable {
        return Err(Error::UnstableState);
    }
    let alpha = ss.amplitude(p);
    let jac = drift_jacobian(alpha, p);
    let d = diffusion(ord, alpha, p);
    let iw = Complex64::new(0.0, omega);
    let left = (jac + ComplexMat2::diag(iw, iw))
        .inverse()
        .ok_or(Error::SingularResolvent { omega })?;
    let right = (jac.transpose() - ComplexMat2::diag(iw, iw))
        .inverse()
        .ok_or(Error::SingularResolvent { omega })?;
    Ok(left * d * right)
}

/// Closed-form spectral matrix in scaled units (`2/gamma = 1`), evaluated at
/// the scaled frequency `Omega = 2 w / gamma`.
///
/// At a turning point the discriminant vanishes and every entry diverges at
/// `Omega = 0`; infinities are returned rather than an error.
pub fn spectral_matrix_closed(
    ord: OrderingSelector,
    sp: &ScaledParams,
    intensity: f64,
    omega_scaled: f64,
) -> ComplexMat2 {
    let s = ord.effective_s();
    let disc = stability_discriminant(intensity, sp.delta);
    let phase = steady_state_phase(intensity, sp.delta, sp.eta);
    let om2 = omega_scaled * omega_scaled;
    let den = (om2 - disc) * (om2 - disc) + 4.0 * om2;
    let s11 = Complex64::from_polar(intensity / den, 2.0 * phase)
        * Complex64::new(2.0 * (sp.delta - 2.0 * intensity), sp.eta * (2.0 + s * (om2 - disc)));
    let s12_at = |om: f64| {
        let o2 = om * om;
        let d = (o2 - disc) * (o2 - disc) + 4.0 * o2;
        Complex64::new(
            (2.0 * intensity * intensity
                + (1.0 - s) * (o2 + disc - 2.0 * sp.eta * om * (2.0 * intensity - sp.delta)))
                / d,
            0.0,
        )
    };
    ComplexMat2::new(s11, s12_at(omega_scaled), s12_at(-omega_scaled), s11.conj())
}

/// Two-ordering combination of spectral matrices with weights
/// `(1-s')/(s-s')` and `(1-s)/(s'-s)`; reproduces the generalized-P matrix.
pub fn combine_spectra(
    s: f64,
    s_prime: f64,
    m_s: &ComplexMat2,
    m_s_prime: &ComplexMat2,
) -> Result<ComplexMat2> {
    let (w, w_prime) = combination_weights(s, s_prime)?;
    Ok(*m_s * w + *m_s_prime * w_prime)
}

/// Quadrature projection of a spectral matrix:
/// `[S11 e^{-2 i phi} + S22 e^{+2 i phi} + S12 + S21] / 4`.
pub fn quadrature_value(m: &ComplexMat2, phi: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -2.0 * phi);
    0.25 * (m.m11 * rot + m.m22 * rot.conj() + m.m12 + m.m21)
}

/// Quadrature-fluctuation spectrum value at one frequency, from the numeric
/// spectral matrix. The result is real up to rounding; the imaginary part is
/// checked and discarded.
pub fn quadrature_spectrum(
    ord: OrderingSelector,
    ss: &SteadyState,
    p: &SystemParams,
    phi: f64,
    omega: f64,
) -> Result<f64> {
    let m = spectral_matrix_numeric(ord, ss, p, omega)?;
    let v = quadrature_value(&m, phi);
    debug_assert!(
        v.im.abs() <= 1e-10 * v.norm().max(1e-300),
        "quadrature spectrum has a nonnegligible imaginary part: {v}"
    );
    Ok(v.re)
}

/// Closed-form quadrature spectrum, returned as the dimensionless product
/// `gamma * V_s(Omega, psi)` with `psi = 2 (phi_ss - phi)`.
pub fn quadrature_spectrum_closed(
    ord: OrderingSelector,
    sp: &ScaledParams,
    intensity: f64,
    psi: f64,
    omega_scaled: f64,
) -> f64 {
    let s = ord.effective_s();
    let disc = stability_discriminant(intensity, sp.delta);
    let om2 = omega_scaled * omega_scaled;
    let den = (om2 - disc) * (om2 - disc) + 4.0 * om2;
    (2.0 * intensity * (sp.delta - 2.0 * intensity) * psi.cos()
        - sp.eta * intensity * (2.0 + s * (om2 - disc)) * psi.sin()
        + 2.0 * intensity * intensity
        + (1.0 - s) * (om2 + disc))
        / den
}

/// How to assemble the output squeezing spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SqueezeRoute {
    /// Directly from the generalized-P spectral matrix.
    DirectP,
    /// From the weighted pair of s-ordered quadrature spectra.
    Pair(f64, f64),
}

/// Output-field squeezing spectrum `S_out = 1/4 + gamma_out * V(omega, phi)`
/// with `gamma_out = gamma` (single-ended cavity). Both routes agree to
/// rounding.
pub fn squeezing_spectrum_out(
    route: SqueezeRoute,
    ss: &SteadyState,
    p: &SystemParams,
    phi: f64,
    omega: f64,
) -> Result<f64> {
    let v = match route {
        SqueezeRoute::DirectP => {
            quadrature_spectrum(OrderingSelector::GeneralizedP, ss, p, phi, omega)?
        }
        SqueezeRoute::Pair(s, s_prime) => {
            let (w, w_prime) = combination_weights(s, s_prime)?;
            let vs = quadrature_spectrum(OrderingSelector::SOrder(s), ss, p, phi, omega)?;
            let vsp = quadrature_spectrum(OrderingSelector::SOrder(s_prime), ss, p, phi, omega)?;
            w * vs + w_prime * vsp
        }
    };
    Ok(SHOT_NOISE + p.gamma * v)
}

/// Phase decomposition of the squeezing spectrum at one frequency:
/// `S_out(psi) = 1/4 + a cos(psi) + b sin(psi) + c` in the dimensionless
/// `gamma * V` units, with `psi = 2 (phi_ss - phi)`.
pub fn squeezing_components(
    ss: &SteadyState,
    p: &SystemParams,
    omega: f64,
) -> Result<(f64, f64, f64)> {
    let m = spectral_matrix_numeric(OrderingSelector::GeneralizedP, ss, p, omega)?;
    let rotated = m.m11 * Complex64::from_polar(1.0, -2.0 * ss.phase);
    let a = 0.5 * p.gamma * rotated.re;
    let b = -0.5 * p.gamma * rotated.im;
    let c = 0.25 * p.gamma * (m.m12 + m.m21).re;
    Ok((a, b, c))
}

/// Minimum of `a cos(psi) + b sin(psi) + c` over the phase, returned as
/// `(psi_opt, min_value)`; `psi_opt = 0` by convention when there is no
/// phase dependence.
pub fn min_over_phase(a: f64, b: f64, c: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        return (0.0, c);
    }
    // adding 0.0 normalizes signed zeros so the branch cut is deterministic
    ((-b + 0.0).atan2(-a + 0.0), c - r)
}

/// Guard below which the quadrature-variance integral is treated as
/// divergent (turning-point vicinity).
pub const DISCRIMINANT_GUARD: f64 = 1e-6;
const INTEGRAND_CAP: f64 = 1e9;
const OMEGA_MAX: f64 = 1e3;
const QUAD_ABS_TOL: f64 = 1e-8;

/// Phase decomposition of the intracavity variance,
/// `V_s(psi) = a cos(psi) + b sin(psi) + c` (dimensionless).
#[derive(Clone, Copy, Debug)]
pub struct VarianceComponents {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl VarianceComponents {
    pub fn value(&self, psi: f64) -> f64 {
        self.a * psi.cos() + self.b * psi.sin() + self.c
    }
}

/// Frequency-integrated quadrature-variance components for one ordering,
/// by adaptive quadrature of the closed-form integrand over both half-lines
/// plus the analytic `1/Omega^2` and `1/Omega^4` tails beyond `OMEGA_MAX`.
pub fn variance_components(
    ord: OrderingSelector,
    ss: &SteadyState,
    p: &SystemParams,
) -> Result<VarianceComponents> {
    if ss.stability == Stability::Unstable {
        return Err(Error::UnstableState);
    }
    let s = ord.effective_s();
    // A linear cavity maps onto the same integrand with zero intensity and
    // an effective detuning (the closed forms hold in that limit).
    let (delta, eta, intensity) = if p.coupling == 0.0 {
        (2.0 * p.detuning / p.gamma, 1.0, 0.0)
    } else {
        let sp = p.scaled()?;
        (sp.delta, sp.eta, ss.intensity)
    };
    let disc = stability_discriminant(intensity, delta);

    let integrand = move |om: f64| -> [f64; 3] {
        let om2 = om * om;
        let den = (om2 - disc) * (om2 - disc) + 4.0 * om2;
        [
            2.0 * intensity * (delta - 2.0 * intensity) / den,
            -eta * intensity * (2.0 + s * (om2 - disc)) / den,
            (2.0 * intensity * intensity + (1.0 - s) * (om2 + disc)) / den,
        ]
    };

    if disc.abs() < DISCRIMINANT_GUARD {
        let at_zero = integrand(0.0);
        if at_zero.iter().map(|v| v.abs()).sum::<f64>() > INTEGRAND_CAP {
            return Err(Error::DivergentIntegral { discriminant: disc });
        }
    }

    let halves = [
        quad::integrate(integrand, -OMEGA_MAX, 0.0, 0.5 * QUAD_ABS_TOL, 20_000),
        quad::integrate(integrand, 0.0, OMEGA_MAX, 0.5 * QUAD_ABS_TOL, 20_000),
    ];
    let mut total = [0.0f64; 3];
    for h in halves {
        let (v, _) = h.ok_or(Error::DivergentIntegral { discriminant: disc })?;
        for k in 0..3 {
            total[k] += v[k];
        }
    }
    // tails: c2/Omega^2 + c4/Omega^4 leading behaviour on both sides
    let tails2 = [0.0, -eta * intensity * s, 1.0 - s];
    let tails4 = [
        2.0 * intensity * (delta - 2.0 * intensity),
        -eta * intensity * (2.0 - 4.0 * s + s * disc),
        2.0 * intensity * intensity + (1.0 - s) * (3.0 * disc - 4.0),
    ];
    for k in 0..3 {
        total[k] += 2.0 * tails2[k] / OMEGA_MAX + 2.0 * tails4[k] / (3.0 * OMEGA_MAX.powi(3));
    }
    let norm = 1.0 / (4.0 * std::f64::consts::PI);
    Ok(VarianceComponents {
        a: total[0] * norm,
        b: total[1] * norm,
        c: total[2] * norm,
    })
}

/// Intracavity quadrature variance `(V_s, V)` at a local-oscillator phase.
///
/// `V_s` integrates the quadrature spectrum over frequency; the physical
/// variance `V = V_s + s/4` is ordering independent.
pub fn intracavity_variance(
    ord: OrderingSelector,
    ss: &SteadyState,
    p: &SystemParams,
    phi: f64,
) -> Result<(f64, f64)> {
    let comps = variance_components(ord, ss, p)?;
    let psi = 2.0 * (ss.phase - phi);
    let v_s = comps.value(psi);
    Ok((v_s, v_s + ord.effective_s() / 4.0))
}

/// Minimum of the physical variance `V` over the local-oscillator phase,
/// returned as `(psi_opt, v_min)`.
pub fn min_variance_over_phase(
    ord: OrderingSelector,
    ss: &SteadyState,
    p: &SystemParams,
) -> Result<(f64, f64)> {
    let comps = variance_components(ord, ss, p)?;
    let (psi_opt, vs_min) = min_over_phase(comps.a, comps.b, comps.c);
    Ok((psi_opt, vs_min + ord.effective_s() / 4.0))
}
