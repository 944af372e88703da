//! Euler-Maruyama integration of the linearized and nonlinear Langevin
//! equations, in Ito form, with deterministic per-trajectory noise streams.
//!
//! Two state layouts are supported. `RealConjugate` propagates the real and
//! imaginary parts of one amplitude with real noise, so the second
//! phase-space coordinate is the complex conjugate of the first by
//! construction; it requires a positive-semidefinite diffusion matrix.
//! `ComplexDoubled` propagates two independent complex coordinates driven by
//! a complex factor of the symmetric diffusion matrix and carries no PSD
//! requirement.

use crate::error::{Error, Result};
use crate::mat2::RealMat2;
use crate::model::{SteadyState, SystemParams};
use crate::phase_space::{
    diffusion, drift, drift_doubled, drift_jacobian, noise_factor, noise_factor_doubled,
    real_noise_factor, NoiseMode, OrderingSelector,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Whether to integrate fluctuations around the fixed point or the full
/// nonlinear amplitude equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Linearized,
    Nonlinear,
}

/// Simulation configuration. `n_steps` samples are recorded per trajectory
/// after `n_burnin` discarded steps.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_burnin: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub mode: NoiseMode,
    pub regime: Regime,
    pub ordering: OrderingSelector,
}

impl SimConfig {
    /// Defaults resolving the cavity linewidth comfortably:
    /// `dt = 0.01 (2/gamma)`, one 64-segment trajectory of 4096-step
    /// segments, burn-in of ten segments.
    pub fn defaults(gamma: f64) -> Self {
        Self {
            dt: 0.01 * 2.0 / gamma,
            n_steps: 64 * 4096,
            n_burnin: 10 * 4096,
            n_trajectories: 1,
            seed: 0,
            mode: NoiseMode::RealConjugate,
            regime: Regime::Linearized,
            ordering: OrderingSelector::SOrder(0.0),
        }
    }
}

/// One recorded trajectory of phase-space coordinate pairs at uniform `dt`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `(alpha, second coordinate)` per step. Linearized runs record the
    /// fluctuation around the fixed point, nonlinear runs the full amplitude.
    pub samples: Vec<(Complex64, Complex64)>,
    pub config: SimConfig,
    /// Noise substream identifier.
    pub trajectory_index: usize,
    /// Fixed point the run was anchored to.
    pub alpha_bar: Complex64,
}

/// Integrate trajectory 0 of the configured ensemble.
pub fn simulate(cfg: &SimConfig, ss: &SteadyState, p: &SystemParams) -> Result<Trajectory> {
    simulate_indexed(cfg, ss, p, 0)
}

/// Integrate every trajectory of the ensemble in parallel. Each trajectory
/// owns noise substream `(seed, index)`, so the result is independent of the
/// thread count.
pub fn simulate_ensemble(
    cfg: &SimConfig,
    ss: &SteadyState,
    p: &SystemParams,
) -> Result<Vec<Trajectory>> {
    validate(cfg, ss, p)?;
    (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|k| simulate_indexed(cfg, ss, p, k))
        .collect()
}

fn validate(cfg: &SimConfig, ss: &SteadyState, p: &SystemParams) -> Result<()> {
    if cfg.dt <= 0.0 || cfg.dt.is_nan() {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    if cfg.n_steps == 0 || cfg.n_trajectories == 0 {
        return Err(Error::InvalidConfig(
            "n_steps and n_trajectories must be positive".into(),
        ));
    }
    let jac = drift_jacobian(ss.amplitude(p), p);
    let (e1, e2) = jac.eigenvalues();
    let speed = e1.norm().max(e2.norm());
    if cfg.dt * speed >= 0.1 {
        return Err(Error::InvalidConfig(format!(
            "dt {} too large for drift eigenvalue magnitude {speed:.3e} (need dt*|eig| < 0.1)",
            cfg.dt
        )));
    }
    if cfg.ordering.is_doubled() && cfg.mode != NoiseMode::ComplexDoubled {
        return Err(Error::InvalidConfig(
            "the generalized-P ordering requires the ComplexDoubled mode".into(),
        ));
    }
    if cfg.regime == Regime::Nonlinear {
        let ok = matches!(
            (cfg.ordering, cfg.mode),
            (OrderingSelector::SOrder(s), NoiseMode::RealConjugate) if s == 0.0
        ) || matches!(
            (cfg.ordering, cfg.mode),
            (OrderingSelector::GeneralizedP, NoiseMode::ComplexDoubled)
        );
        if !ok {
            return Err(Error::InvalidConfig(
                "nonlinear runs support only s = 0 with RealConjugate noise or the \
                 generalized P with ComplexDoubled noise (conjugate noise needs a PSD \
                 diffusion matrix along the whole trajectory)"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Integrate one trajectory of the ensemble.
pub fn simulate_indexed(
    cfg: &SimConfig,
    ss: &SteadyState,
    p: &SystemParams,
    index: usize,
) -> Result<Trajectory> {
    validate(cfg, ss, p)?;
    let alpha_bar = ss.amplitude(p);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);

    // escape threshold: well outside both the mean amplitude and the
    // stationary fluctuation scale
    let d_scale = diffusion(cfg.ordering, alpha_bar, p).max_abs();
    let escape = 1e3 * (alpha_bar.norm() + (d_scale / p.gamma).sqrt() + 1e-9);

    let mut samples = Vec::with_capacity(cfg.n_steps);
    let total = cfg.n_burnin + cfg.n_steps;
    let sqrt_dt = cfg.dt.sqrt();
    let draw = |rng: &mut ChaCha12Rng| -> (f64, f64) {
        (
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        )
    };

    match (cfg.regime, cfg.mode) {
        (Regime::Linearized, NoiseMode::RealConjugate) => {
            let m = real_drift_matrix(ss, p);
            let l = real_noise_factor(cfg.ordering.effective_s(), alpha_bar.re, alpha_bar.im, p)?;
            let (mut x, mut y) = (0.0f64, 0.0f64);
            for step in 0..total {
                let (xi1, xi2) = draw(&mut rng);
                let (dx, dy) = m.mul_vec((x, y));
                let (nx, ny) = l.mul_vec((xi1, xi2));
                x += dx * cfg.dt + nx * sqrt_dt;
                y += dy * cfg.dt + ny * sqrt_dt;
                if x.hypot(y) > escape {
                    return Err(Error::TrajectoryDiverged { step });
                }
                if step >= cfg.n_burnin {
                    samples.push((Complex64::new(x, y), Complex64::new(x, -y)));
                }
            }
        }
        (Regime::Linearized, NoiseMode::ComplexDoubled) => {
            let jac = drift_jacobian(alpha_bar, p);
            let b = noise_factor(cfg.ordering, alpha_bar, p, NoiseMode::ComplexDoubled)?;
            let (mut z1, mut z2) = (Complex64::ZERO, Complex64::ZERO);
            for step in 0..total {
                let (xi1, xi2) = draw(&mut rng);
                let (d1, d2) = jac.mul_vec((z1, z2));
                z1 += d1 * cfg.dt + (b.m11 * xi1 + b.m12 * xi2) * sqrt_dt;
                z2 += d2 * cfg.dt + (b.m21 * xi1 + b.m22 * xi2) * sqrt_dt;
                if z1.norm() > escape || z2.norm() > escape {
                    return Err(Error::TrajectoryDiverged { step });
                }
                if step >= cfg.n_burnin {
                    samples.push((z1, z2));
                }
            }
        }
        (Regime::Nonlinear, NoiseMode::RealConjugate) => {
            let s = cfg.ordering.effective_s();
            let (mut x, mut y) = (alpha_bar.re, alpha_bar.im);
            for step in 0..total {
                let (xi1, xi2) = draw(&mut rng);
                let alpha = Complex64::new(x, y);
                let (a1, _) = drift(alpha, p);
                // PSD is re-verified along the trajectory
                let l = real_noise_factor(s, x, y, p)?;
                let (nx, ny) = l.mul_vec((xi1, xi2));
                x += a1.re * cfg.dt + nx * sqrt_dt;
                y += a1.im * cfg.dt + ny * sqrt_dt;
                if x.hypot(y) > escape {
                    return Err(Error::TrajectoryDiverged { step });
                }
                if step >= cfg.n_burnin {
                    samples.push((Complex64::new(x, y), Complex64::new(x, -y)));
                }
            }
        }
        (Regime::Nonlinear, NoiseMode::ComplexDoubled) => {
            let (mut alpha, mut beta) = (alpha_bar, alpha_bar.conj());
            for step in 0..total {
                let (xi1, xi2) = draw(&mut rng);
                let (a1, a2) = drift_doubled(alpha, beta, p);
                let b = noise_factor_doubled(alpha, beta, p);
                alpha += a1 * cfg.dt + (b.m11 * xi1 + b.m12 * xi2) * sqrt_dt;
                beta += a2 * cfg.dt + (b.m21 * xi1 + b.m22 * xi2) * sqrt_dt;
                if alpha.norm() > escape || beta.norm() > escape {
                    return Err(Error::TrajectoryDiverged { step });
                }
                if step >= cfg.n_burnin {
                    samples.push((alpha, beta));
                }
            }
        }
    }

    Ok(Trajectory {
        samples,
        config: *cfg,
        trajectory_index: index,
        alpha_bar,
    })
}

/// Drift matrix of the linearized dynamics in `(x, y)` coordinates.
fn real_drift_matrix(ss: &SteadyState, p: &SystemParams) -> RealMat2 {
    let jac = drift_jacobian(ss.amplitude(p), p);
    let (pp, qq) = (jac.m11, jac.m12);
    RealMat2::new(
        (pp + qq).re,
        (qq - pp).im,
        (pp + qq).im,
        (pp - qq).re,
    )
}
