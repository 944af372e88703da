//! Physical parameters, dimensionless scaling, classical steady states,
//! turning points and linear stability for the dispersive-bistability model.
//!
//! The driven Kerr cavity has one classical amplitude `alpha`. Scaling the
//! loss rate out of the equations leaves three dimensionless numbers: the
//! detuning `Delta`, the pump `mu` and the sign `eta` of the nonlinear
//! coupling, and the steady intensities solve the cubic characteristic
//! `mu = I [1 + (I - Delta)^2]`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Merge tolerance for nearly coincident cubic roots (tangency of the
/// characteristic).
pub const ROOT_MERGE_TOL: f64 = 1e-8;

/// Unscaled cavity parameters. The cavity is single-ended, so the output
/// coupling rate equals `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    /// Cavity intensity loss rate (1/time, > 0).
    pub gamma: f64,
    /// Cavity-pump detuning omega_c - omega (1/time).
    pub detuning: f64,
    /// Nonlinear coupling (1/time, signed; 0 means a linear cavity).
    pub coupling: f64,
    /// Pump amplitude (1/time, >= 0).
    pub pump: f64,
}

impl SystemParams {
    pub fn new(gamma: f64, detuning: f64, coupling: f64, pump: f64) -> Result<Self> {
        if gamma <= 0.0 || gamma.is_nan() {
            return Err(Error::NonPositiveInput("gamma"));
        }
        if pump < 0.0 || pump.is_nan() {
            return Err(Error::NonPositiveInput("pump"));
        }
        Ok(Self {
            gamma,
            detuning,
            coupling,
            pump,
        })
    }

    /// Dimensionless parameters `Delta = 2 eta theta / gamma`,
    /// `mu = (2/gamma)^3 |g| E0^2`, `eta = sign(g)`.
    pub fn scaled(&self) -> Result<ScaledParams> {
        if self.coupling == 0.0 {
            return Err(Error::ZeroCoupling);
        }
        let eta = self.coupling.signum();
        let delta = 2.0 * eta * self.detuning / self.gamma;
        let mu = (2.0 / self.gamma).powi(3) * self.coupling.abs() * self.pump * self.pump;
        Ok(ScaledParams { delta, mu, eta })
    }

    /// All classical steady states with the amplitude reconstructed in
    /// unscaled coordinates. Handles the linear cavity (`coupling == 0`),
    /// where there is a single state `alpha = E0 / (gamma/2 + i theta)`.
    pub fn steady_states(&self) -> Result<Vec<SteadyState>> {
        if self.coupling == 0.0 {
            let alpha = Complex64::new(self.pump, 0.0)
                / Complex64::new(0.5 * self.gamma, self.detuning);
            return Ok(vec![SteadyState {
                intensity: 0.0,
                phase: alpha.arg(),
                alpha: Some(alpha),
                stability: Stability::Stable,
            }]);
        }
        let sp = self.scaled()?;
        let mut states = sp.steady_states();
        for st in &mut states {
            let r = (st.intensity * self.gamma / (2.0 * self.coupling.abs())).sqrt();
            st.alpha = Some(Complex64::from_polar(r, st.phase));
        }
        Ok(states)
    }
}

/// Physical constants entering the coupling estimate.
#[derive(Clone, Copy, Debug)]
pub struct PhysicalConstants {
    /// Third-order susceptibility chi (m^2/V^2, signed).
    pub susceptibility: f64,
    /// Medium dielectric constant epsilon (F/m).
    pub dielectric: f64,
    /// Vacuum permittivity epsilon_0 (F/m).
    pub vacuum_permittivity: f64,
    /// Cavity frequency omega_c (rad/s).
    pub cavity_frequency: f64,
    /// Quantization volume (m^3).
    pub volume: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
}

/// Coupling constant `g = 3 eps0 hbar omega_c^2 chi / (eps^2 V)` in 1/s.
pub fn estimate_coupling(c: &PhysicalConstants) -> Result<f64> {
    if c.volume <= 0.0 || c.volume.is_nan() {
        return Err(Error::NonPositiveInput("volume"));
    }
    if c.dielectric <= 0.0 || c.dielectric.is_nan() {
        return Err(Error::NonPositiveInput("dielectric"));
    }
    if c.cavity_frequency <= 0.0 || c.cavity_frequency.is_nan() {
        return Err(Error::NonPositiveInput("cavity_frequency"));
    }
    Ok(3.0 * c.vacuum_permittivity * c.hbar * c.cavity_frequency * c.cavity_frequency
        * c.susceptibility
        / (c.dielectric * c.dielectric * c.volume))
}

/// Dimensionless parameter set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledParams {
    /// Scaled detuning.
    pub delta: f64,
    /// Scaled pump (>= 0).
    pub mu: f64,
    /// Sign of the nonlinear coupling, +1 or -1.
    pub eta: f64,
}

impl ScaledParams {
    pub fn new(delta: f64, mu: f64, eta: f64) -> Result<Self> {
        if mu < 0.0 || mu.is_nan() {
            return Err(Error::NonPositiveInput("mu"));
        }
        if eta != 1.0 && eta != -1.0 {
            return Err(Error::InvalidConfig(format!("eta must be +1 or -1, got {eta}")));
        }
        Ok(Self { delta, mu, eta })
    }

    /// All real nonnegative roots of the characteristic, sorted ascending.
    ///
    /// Roots closer than [`ROOT_MERGE_TOL`] are merged and reported once with
    /// `Marginal` stability. The amplitude field is left empty; it needs the
    /// unscaled parameters (see [`SystemParams::steady_states`]).
    pub fn steady_states(&self) -> Vec<SteadyState> {
        let roots = characteristic_roots(self.delta, self.mu);
        let mut out: Vec<SteadyState> = Vec::with_capacity(roots.len());
        let mut i = 0;
        while i < roots.len() {
            let mut intensity = roots[i];
            let mut merged = false;
            while i + 1 < roots.len() && (roots[i + 1] - intensity).abs() < ROOT_MERGE_TOL {
                intensity = 0.5 * (intensity + roots[i + 1]);
                merged = true;
                i += 1;
            }
            let stability = if merged {
                Stability::Marginal
            } else {
                classify_stability(intensity, self.delta)
            };
            out.push(SteadyState {
                intensity,
                phase: steady_state_phase(intensity, self.delta, self.eta),
                alpha: None,
                stability,
            });
            i += 1;
        }
        out
    }
}

/// Linear-stability tag of a classical fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

/// A classical fixed point.
#[derive(Clone, Copy, Debug)]
pub struct SteadyState {
    /// Scaled intensity I >= 0.
    pub intensity: f64,
    /// Steady-state phase in (-pi, pi].
    pub phase: f64,
    /// Unscaled amplitude, available when physical parameters were supplied.
    pub alpha: Option<Complex64>,
    pub stability: Stability,
}

impl SteadyState {
    /// Unscaled amplitude; reconstructed from the scaled coordinates when it
    /// was not stored at construction.
    pub fn amplitude(&self, p: &SystemParams) -> Complex64 {
        match self.alpha {
            Some(a) => a,
            None => {
                let r = if p.coupling == 0.0 {
                    0.0
                } else {
                    (self.intensity * p.gamma / (2.0 * p.coupling.abs())).sqrt()
                };
                Complex64::from_polar(r, self.phase)
            }
        }
    }
}

/// Pump value on the characteristic at a given intensity:
/// `mu = I [1 + (I - Delta)^2]`.
pub fn characteristic_pump(intensity: f64, delta: f64) -> Result<f64> {
    if intensity < 0.0 {
        return Err(Error::NegativeIntensity(intensity));
    }
    let d = intensity - delta;
    Ok(intensity * (1.0 + d * d))
}

/// Steady-state phase, `exp(i phi) = [1 + i eta (I - Delta)] / sqrt(1 + (I - Delta)^2)`.
pub fn steady_state_phase(intensity: f64, delta: f64, eta: f64) -> f64 {
    (eta * (intensity - delta)).atan2(1.0)
}

/// Turning points `I_pm = (2 Delta ± sqrt(Delta^2 - 3)) / 3` of the
/// characteristic, returned as `(I_minus, I_plus)`.
///
/// Present only for `Delta >= sqrt(3)`; below that the characteristic is
/// monotone and there is no bistability.
pub fn turning_points(delta: f64) -> Option<(f64, f64)> {
    if delta < 3f64.sqrt() {
        return None;
    }
    // the clamp absorbs rounding right at delta = sqrt(3)
    let root = (delta * delta - 3.0).max(0.0).sqrt();
    Some(((2.0 * delta - root) / 3.0, (2.0 * delta + root) / 3.0))
}

/// Stability discriminant `3 I^2 - 4 Delta I + Delta^2 + 1`.
///
/// Equals `(2/gamma)^2 det(A_bar)` for the drift Jacobian and factors as
/// `3 (I - I_plus)(I - I_minus)` when the turning points exist; it is always
/// computed from the polynomial so it stays real for `Delta^2 < 3`.
pub fn stability_discriminant(intensity: f64, delta: f64) -> f64 {
    3.0 * intensity * intensity - 4.0 * delta * intensity + delta * delta + 1.0
}

/// `Unstable` strictly between the turning points, `Marginal` within
/// tolerance of either, `Stable` otherwise (and always when no turning
/// points exist).
pub fn classify_stability(intensity: f64, delta: f64) -> Stability {
    match turning_points(delta) {
        None => Stability::Stable,
        Some((lo, hi)) => {
            let tol_lo = ROOT_MERGE_TOL * lo.abs().max(1.0);
            let tol_hi = ROOT_MERGE_TOL * hi.abs().max(1.0);
            if (intensity - lo).abs() <= tol_lo || (intensity - hi).abs() <= tol_hi {
                Stability::Marginal
            } else if intensity > lo && intensity < hi {
                Stability::Unstable
            } else {
                Stability::Stable
            }
        }
    }
}

/// Real roots of `I^3 - 2 Delta I^2 + (Delta^2 + 1) I - mu = 0` with
/// `I >= 0`, unsorted.
///
/// Closed form (trigonometric for three real roots, Cardano otherwise)
/// followed by two Newton polish steps; tiny negative roots are clamped to
/// zero and anything below `-1e-12` is discarded.
fn characteristic_roots(delta: f64, mu: f64) -> Vec<f64> {
    let b = -2.0 * delta;
    let c = delta * delta + 1.0;
    let d = -mu;

    // depressed cubic t^3 + p t + q with I = t - b/3
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let f = |x: f64| ((x + b) * x + c) * x + d;
    let fp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let fscale = |x: f64| {
        let ax = x.abs();
        ax * ax * ax + b.abs() * ax * ax + c.abs() * ax + d.abs() + 1e-30
    };

    let mut roots: Vec<f64> = Vec::with_capacity(3);
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    if disc > 0.0 {
        // three distinct real roots
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift);
        }
    } else if p == 0.0 && q == 0.0 {
        roots.push(-shift);
    } else {
        let half_q = q / 2.0;
        let inner = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-half_q + inner).cbrt();
        let v = (-half_q - inner).cbrt();
        roots.push(u + v - shift);
        if p != 0.0 {
            // Tangency candidate: the double root of the depressed cubic. The
            // discriminant may round to either side of zero there, so accept
            // it by residual rather than by the sign of `disc`. A genuine
            // double root is also a stationary point, which rules out the
            // degenerate q = 0 case where the formula lands on a simple root.
            let r_d = -1.5 * q / p - shift;
            let slope_scale = 3.0 * r_d * r_d + 2.0 * b.abs() * r_d.abs() + c.abs() + 1e-30;
            if f(r_d).abs() <= 2e-14 * fscale(r_d) && fp(r_d).abs() <= 1e-7 * slope_scale {
                roots.push(r_d);
                roots.push(r_d);
            }
        }
    }

    let mut roots: Vec<f64> = roots
        .into_iter()
        .map(|mut r| {
            for _ in 0..2 {
                let slope = fp(r);
                if slope.abs() > 1e-12 {
                    r -= f(r) / slope;
                }
            }
            r
        })
        .filter(|&r| r >= -1e-12)
        .map(|r| r.max(0.0))
        .collect();

    // A double root is only determined to O(sqrt(eps)) by the coefficients,
    // so a pair that rounds to either side of a tangency can come back up to
    // ~5e-8 apart. Collapse such a pair onto its midpoint when the cubic
    // residual there is at rounding level (a genuine extremum touching zero).
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..roots.len() {
        let gap = roots[i] - roots[i - 1];
        if gap > 0.0 && gap < 1e-6 {
            let mid = 0.5 * (roots[i] + roots[i - 1]);
            if f(mid).abs() <= 2e-14 * fscale(mid) {
                roots[i] = mid;
                roots[i - 1] = mid;
            }
        }
    }
    roots
}
