//! Monte-Carlo estimator properties on the stable-branch benchmark
//! (gamma = 2, Delta = 0, I = 1): Euler-Maruyama weak-convergence check and
//! the 1/sqrt(N) consistency of the Welch estimator.

use num_complex::Complex64;
use sqz_core::langevin::{simulate_ensemble, Regime, SimConfig};
use sqz_core::model::{steady_state_phase, ScaledParams, SteadyState, SystemParams};
use sqz_core::phase_space::{NoiseMode, OrderingSelector};
use sqz_core::spectra::spectral_matrix_closed;
use sqz_core::welch::{estimate_spectral_matrix, EstimatedSpectrum, Window};

fn benchmark() -> (SystemParams, SteadyState) {
    let gamma = 2.0;
    let p = SystemParams::new(gamma, 0.0, 1.0, 2f64.sqrt()).unwrap();
    let phase = steady_state_phase(1.0, 0.0, 1.0);
    let ss = SteadyState {
        intensity: 1.0,
        phase,
        alpha: Some(Complex64::from_polar(1.0, phase)),
        stability: sqz_core::Stability::Stable,
    };
    (p, ss)
}

fn run(dt: f64, n_trajectories: usize, seed: u64, segment_len: usize) -> EstimatedSpectrum {
    let (p, ss) = benchmark();
    let cfg = SimConfig {
        dt,
        n_steps: 64 * segment_len,
        n_burnin: 4 * segment_len,
        n_trajectories,
        seed,
        mode: NoiseMode::RealConjugate,
        regime: Regime::Linearized,
        ordering: OrderingSelector::SOrder(0.0),
    };
    let trajs = simulate_ensemble(&cfg, &ss, &p).unwrap();
    estimate_spectral_matrix(&trajs, segment_len, Window::Hann).unwrap()
}

/// RMS relative deviation of the estimated S11 from the closed form over the
/// frequency band `|Omega| <= 5`.
fn rms_error(est: &EstimatedSpectrum) -> f64 {
    let sp = ScaledParams::new(0.0, 2.0, 1.0).unwrap();
    let mut sum = 0.0;
    let mut count = 0.0;
    for k in 0..est.len() {
        let om = est.omega[k];
        if om.abs() > 5.0 {
            continue;
        }
        let analytic = spectral_matrix_closed(OrderingSelector::SOrder(0.0), &sp, 1.0, om);
        let rel = (est.s11[k] - analytic.m11).norm() / analytic.m11.norm();
        sum += rel * rel;
        count += 1.0;
    }
    (sum / count).sqrt()
}

/// Halving the step changes the estimated spectrum by less than the
/// Monte-Carlo uncertainty of the difference.
#[test]
fn weak_convergence_under_step_halving() {
    let coarse = run(0.01, 4, 21, 4096);
    let fine = run(0.005, 4, 22, 8192); // same physical segment duration
    assert_eq!(coarse.len(), fine.len() / 2);
    let mut worst_z = 0.0f64;
    for k in 0..coarse.len() {
        let om = coarse.omega[k];
        if om.abs() > 5.0 {
            continue;
        }
        // the fine grid contains the coarse frequencies exactly
        let kf = fine
            .omega
            .iter()
            .position(|&w| (w - om).abs() < 1e-9)
            .unwrap();
        let se = (coarse.se11[k] * coarse.se11[k] + fine.se11[kf] * fine.se11[kf]).sqrt();
        let z = (coarse.s11[k] - fine.s11[kf]).norm() / se;
        worst_z = worst_z.max(z);
    }
    assert!(worst_z < 4.0, "step halving moved S11 by {worst_z:.2} sigma");
}

/// The spectral-estimation error decreases as 1/sqrt(total segments); the
/// fitted log-log slope must be within 20% of -1/2. A small step keeps the
/// discretization bias well under the statistical error everywhere on the
/// sequence.
#[test]
fn estimator_error_scales_as_inverse_sqrt_segments() {
    let dt = 0.0025;
    let seg = 16384; // keeps the frequency resolution of the benchmark
    let sizes = [1usize, 4, 16];
    let mut errors = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        // two independent replicates per size tame the scatter of the
        // error estimate itself
        let e1 = rms_error(&run(dt, n, 31 + i as u64, seg));
        let e2 = rms_error(&run(dt, n, 131 + i as u64, seg));
        errors.push((0.5 * (e1 * e1 + e2 * e2)).sqrt());
    }
    // least-squares slope of ln(error) against ln(N)
    let xs: Vec<f64> = sizes.iter().map(|&n| ((n * 64) as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!(
        (slope + 0.5).abs() <= 0.1,
        "slope {slope:.3} (errors {errors:?})"
    );
}
