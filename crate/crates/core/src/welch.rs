//! Welch cross-periodogram estimation of the phase-space spectral matrix
//! and time-domain quadrature-variance estimation from trajectories.
//!
//! The analytic spectral matrix follows the `e^{+i w tau}` transform of the
//! forward two-time correlation (that is what the resolvent product
//! evaluates to), so each periodogram pairs the transform of coordinate `i`
//! at the mirrored frequency with that of coordinate `j` at the frequency
//! itself:
//! `S_ij(w_k) = dt * F_i(-w_k) F_j(w_k) / sum(w_n^2)`.
//! Validated against the analytic resolvent on the linear-cavity benchmark.

use crate::error::{Error, Result};
use crate::langevin::{Regime, Trajectory};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Segment window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rect,
}

impl Window {
    fn coefficient(&self, n: usize, len: usize) -> f64 {
        match self {
            Window::Rect => 1.0,
            Window::Hann => {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
            }
        }
    }
}

/// Cross-spectral matrix estimate on the discrete Fourier grid of the
/// segment length, averaged over segments and trajectories, with standard
/// errors from the inter-segment scatter.
#[derive(Clone, Debug)]
pub struct EstimatedSpectrum {
    /// Signed angular frequencies, ascending.
    pub omega: Vec<f64>,
    pub s11: Vec<Complex64>,
    pub s12: Vec<Complex64>,
    pub s21: Vec<Complex64>,
    pub s22: Vec<Complex64>,
    pub se11: Vec<f64>,
    pub se12: Vec<f64>,
    pub se21: Vec<f64>,
    pub se22: Vec<f64>,
    pub n_segments: usize,
    pub segment_len: usize,
    pub dt: f64,
}

impl EstimatedSpectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

const MIN_SEGMENTS: usize = 8;

/// Welch estimate over an ensemble of trajectories sharing one
/// configuration. Nonlinear trajectories have their per-trajectory sample
/// mean removed first (the spectra are of fluctuations); linearized
/// trajectories already record fluctuations with true mean zero.
pub fn estimate_spectral_matrix(
    trajs: &[Trajectory],
    segment_len: usize,
    window: Window,
) -> Result<EstimatedSpectrum> {
    let traj0 = trajs.first().ok_or(Error::InsufficientData {
        needed: 1,
        got: 0,
    })?;
    let dt = traj0.config.dt;
    if segment_len == 0 || trajs.iter().any(|t| t.samples.len() < segment_len) {
        return Err(Error::InsufficientData {
            needed: segment_len,
            got: trajs.iter().map(|t| t.samples.len()).min().unwrap_or(0),
        });
    }
    let total_segments: usize = trajs.iter().map(|t| t.samples.len() / segment_len).sum();
    if total_segments < MIN_SEGMENTS {
        return Err(Error::InsufficientData {
            needed: MIN_SEGMENTS,
            got: total_segments,
        });
    }

    let len = segment_len;
    let coeffs: Vec<f64> = (0..len).map(|n| window.coefficient(n, len)).collect();
    let w2: f64 = coeffs.iter().map(|w| w * w).sum();
    let norm = dt / w2;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);

    let mut sums = vec![[Complex64::ZERO; 4]; len];
    let mut sums_sq = vec![[0.0f64; 4]; len];
    let mut buf1 = vec![Complex64::ZERO; len];
    let mut buf2 = vec![Complex64::ZERO; len];

    for traj in trajs {
        let mean = if traj.config.regime == Regime::Nonlinear {
            let n = traj.samples.len() as f64;
            let (m1, m2) = traj
                .samples
                .iter()
                .fold((Complex64::ZERO, Complex64::ZERO), |acc, s| {
                    (acc.0 + s.0, acc.1 + s.1)
                });
            (m1 / n, m2 / n)
        } else {
            (Complex64::ZERO, Complex64::ZERO)
        };
        let n_seg = traj.samples.len() / len;
        for seg in 0..n_seg {
            let chunk = &traj.samples[seg * len..(seg + 1) * len];
            for (n, &(z1, z2)) in chunk.iter().enumerate() {
                buf1[n] = (z1 - mean.0) * coeffs[n];
                buf2[n] = (z2 - mean.1) * coeffs[n];
            }
            fft.process(&mut buf1);
            fft.process(&mut buf2);
            for k in 0..len {
                let mk = (len - k) % len;
                let p = [
                    norm * buf1[mk] * buf1[k],
                    norm * buf1[mk] * buf2[k],
                    norm * buf2[mk] * buf1[k],
                    norm * buf2[mk] * buf2[k],
                ];
                for e in 0..4 {
                    sums[k][e] += p[e];
                    sums_sq[k][e] += p[e].norm_sqr();
                }
            }
        }
    }

    let m = total_segments as f64;
    // ascending signed-frequency order: negative bins first
    let order: Vec<usize> = (len / 2 + 1..len).chain(0..=len / 2).collect();
    let mut out = EstimatedSpectrum {
        omega: Vec::with_capacity(len),
        s11: Vec::with_capacity(len),
        s12: Vec::with_capacity(len),
        s21: Vec::with_capacity(len),
        s22: Vec::with_capacity(len),
        se11: Vec::with_capacity(len),
        se12: Vec::with_capacity(len),
        se21: Vec::with_capacity(len),
        se22: Vec::with_capacity(len),
        n_segments: total_segments,
        segment_len: len,
        dt,
    };
    for &k in &order {
        let signed = if k <= len / 2 {
            k as f64
        } else {
            k as f64 - len as f64
        };
        out.omega
            .push(2.0 * std::f64::consts::PI * signed / (len as f64 * dt));
        let mut means = [Complex64::ZERO; 4];
        let mut ses = [0.0f64; 4];
        for e in 0..4 {
            let mean = sums[k][e] / m;
            let var = ((sums_sq[k][e] / m - mean.norm_sqr()) * m / (m - 1.0)).max(0.0);
            means[e] = mean;
            ses[e] = (var / m).sqrt();
        }
        out.s11.push(means[0]);
        out.s12.push(means[1]);
        out.s21.push(means[2]);
        out.s22.push(means[3]);
        out.se11.push(ses[0]);
        out.se12.push(ses[1]);
        out.se21.push(ses[2]);
        out.se22.push(ses[3]);
    }
    Ok(out)
}

/// Time-domain quadrature variance `Var X_phi` with a batched-means standard
/// error. Returns `(variance, standard_error)`.
pub fn estimate_quadrature_variance(traj: &Trajectory, phi: f64) -> Result<(f64, f64)> {
    let n = traj.samples.len();
    if n < 64 {
        return Err(Error::InsufficientData { needed: 64, got: n });
    }
    let rot = Complex64::from_polar(0.5, -phi);
    let quad: Vec<Complex64> = traj
        .samples
        .iter()
        .map(|&(z1, z2)| z1 * rot + z2 * rot.conj())
        .collect();
    let mean = quad.iter().sum::<Complex64>() / n as f64;
    // plain (unconjugated) square, matching the phase-space covariance
    let squares: Vec<f64> = quad.iter().map(|q| ((q - mean) * (q - mean)).re).collect();
    let variance = squares.iter().sum::<f64>() / n as f64;

    let n_batches = 32.min(n / 8).max(2);
    let batch = n / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let slice = &squares[b * batch..(b + 1) * batch];
        batch_means.push(slice.iter().sum::<f64>() / batch as f64);
    }
    let bm = batch_means.iter().sum::<f64>() / n_batches as f64;
    let bvar = batch_means.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>()
        / (n_batches as f64 - 1.0);
    Ok((variance, (bvar / n_batches as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::{SimConfig, Trajectory};
    use crate::phase_space::{NoiseMode, OrderingSelector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn synthetic(samples: Vec<(Complex64, Complex64)>, dt: f64) -> Trajectory {
        let mut cfg = SimConfig::defaults(2.0);
        cfg.dt = dt;
        cfg.n_steps = samples.len();
        Trajectory {
            samples,
            config: cfg,
            trajectory_index: 0,
            alpha_bar: Complex64::ZERO,
        }
    }

    #[test]
    fn white_noise_spectrum_is_flat_at_dt() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let dt = 0.05;
        let n = 128 * 256;
        let samples: Vec<_> = (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                (Complex64::new(x, 0.0), Complex64::new(x, 0.0))
            })
            .collect();
        let traj = synthetic(samples, dt);
        let est = estimate_spectral_matrix(std::slice::from_ref(&traj), 256, Window::Hann).unwrap();
        assert_eq!(est.n_segments, 128);
        let mut worst_z = 0.0f64;
        for k in 0..est.len() {
            let z = (est.s11[k].re - dt).abs() / est.se11[k];
            worst_z = worst_z.max(z);
            assert!(est.s11[k].im.abs() <= 3.0 * est.se11[k]);
        }
        // a handful of 3-sigma outliers among 256 bins would be expected;
        // require the bulk to be consistent
        let n_bad = (0..est.len())
            .filter(|&k| (est.s11[k].re - dt).abs() > 3.0 * est.se11[k])
            .count();
        assert!(n_bad <= est.len() / 20, "{n_bad} outliers, worst z {worst_z}");
    }

    #[test]
    fn needs_at_least_eight_segments() {
        let samples = vec![(Complex64::ZERO, Complex64::ZERO); 1024];
        let traj = synthetic(samples, 0.01);
        assert!(matches!(
            estimate_spectral_matrix(std::slice::from_ref(&traj), 256, Window::Hann),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn zero_trajectory_variance() {
        let traj = synthetic(vec![(Complex64::ZERO, Complex64::ZERO); 256], 0.01);
        let (v, se) = estimate_quadrature_variance(&traj, 0.4).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn variance_invariant_under_phase_flip() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..512)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                let z = Complex64::new(x, y);
                (z, z.conj())
            })
            .collect();
        let traj = synthetic(samples, 0.01);
        let (v1, _) = estimate_quadrature_variance(&traj, 0.7).unwrap();
        let (v2, _) = estimate_quadrature_variance(&traj, 0.7 + std::f64::consts::PI).unwrap();
        assert!((v1 - v2).abs() < 1e-14);
    }

    #[test]
    fn grid_is_ascending_and_centered() {
        let samples = vec![(Complex64::ONE, Complex64::ONE); 4096];
        let traj = synthetic(samples, 0.5);
        let est = estimate_spectral_matrix(std::slice::from_ref(&traj), 64, Window::Rect).unwrap();
        assert_eq!(est.len(), 64);
        for k in 1..est.len() {
            assert!(est.omega[k] > est.omega[k - 1]);
        }
        // contains zero and the Nyquist frequency
        assert!(est.omega.contains(&0.0));
        let nyquist = std::f64::consts::PI / 0.5;
        assert!((est.omega.last().unwrap() - nyquist).abs() < 1e-12);
    }

    /// OU validation: linear cavity with detuning, antinormal ordering. The
    /// analytic spectrum peaks at w = +theta, which pins down the frequency
    /// sign convention of the estimator.
    #[test]
    fn linear_cavity_matches_analytic_resolvent() {
        use crate::model::SystemParams;
        use crate::spectra::spectral_matrix_numeric;

        let p = SystemParams::new(2.0, 1.5, 0.0, 0.0).unwrap();
        let ss = p.steady_states().unwrap()[0];
        let cfg = SimConfig {
            dt: 0.005,
            n_steps: 1024 * 8192,
            n_burnin: 16384,
            n_trajectories: 1,
            seed: 11,
            mode: NoiseMode::RealConjugate,
            regime: crate::langevin::Regime::Linearized,
            ordering: OrderingSelector::SOrder(-1.0),
        };
        let traj = crate::langevin::simulate(&cfg, &ss, &p).unwrap();
        let est = estimate_spectral_matrix(std::slice::from_ref(&traj), 8192, Window::Hann).unwrap();

        // peak of S12 close to +theta
        let peak = (0..est.len())
            .max_by(|&a, &b| est.s12[a].re.partial_cmp(&est.s12[b].re).unwrap())
            .unwrap();
        assert!(
            (est.omega[peak] - p.detuning).abs() < 0.5,
            "S12 peak at {} instead of {}",
            est.omega[peak],
            p.detuning
        );

        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..est.len() {
            let w = est.omega[k];
            if w.abs() > 5.0 {
                continue;
            }
            let analytic = spectral_matrix_numeric(cfg.ordering, &ss, &p, w).unwrap();
            let rel = (est.s12[k] - analytic.m12).norm() / analytic.m12.norm();
            num += rel * rel;
            den += 1.0;
        }
        let rms = (num / den).sqrt();
        assert!(rms < 0.05, "RMS relative deviation {rms:.4}");

        // conjugate-mode estimates carry the Hermitian-pair structure to
        // rounding (the two coordinates run through independent transforms)
        for k in 0..est.len() {
            let scale = est.s11[k].norm().max(1e-300);
            assert!((est.s22[k] - est.s11[k].conj()).norm() <= 1e-10 * scale);
        }
        for k in 0..est.len() {
            if est.omega[k].abs() >= std::f64::consts::PI / cfg.dt - 1e-9 {
                continue; // the Nyquist bin has no mirror on the grid
            }
            let mk = est
                .omega
                .iter()
                .position(|&w| w == -est.omega[k])
                .unwrap();
            let scale = est.s12[mk].norm().max(1e-300);
            assert!((est.s21[k] - est.s12[mk]).norm() <= 1e-10 * scale);
        }
    }
}
