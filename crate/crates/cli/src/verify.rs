//! Randomized analytic-identity battery behind `sqz verify`.

use crate::CliError;
use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sqz_core::model::{
    classify_stability, stability_discriminant, steady_state_phase, ScaledParams, Stability,
    SteadyState, SystemParams,
};
use sqz_core::phase_space::{
    combination_weights, combine_diffusion, diffusion, diffusion_eigenvalues, diffusion_real,
    is_psd, OrderingSelector,
};
use sqz_core::spectra::{
    combine_spectra, spectral_matrix_closed, spectral_matrix_numeric, squeezing_spectrum_out,
    SqueezeRoute,
};

#[derive(Args)]
pub struct VerifyArgs {
    /// Number of random parameter tuples per identity.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Scales every tolerance; 0 makes all identities fail (harness sanity).
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

struct RandomPoint {
    p: SystemParams,
    ss: SteadyState,
    sp: ScaledParams,
    s: f64,
    s_prime: f64,
    omega_scaled: f64,
}

fn random_point(rng: &mut ChaCha12Rng) -> RandomPoint {
    loop {
        let delta = rng.random_range(0.0..4.0);
        let eta = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let intensity = rng.random_range(0.05..4.0);
        if classify_stability(intensity, delta) != Stability::Stable
            || stability_discriminant(intensity, delta) < 1e-3
        {
            continue;
        }
        let s: f64 = rng.random_range(-1.0..1.0);
        let s_prime: f64 = rng.random_range(-1.0..1.0);
        if (s - s_prime).abs() < 1e-3 {
            continue;
        }
        let gamma = rng.random_range(0.5..4.0);
        let abs_g = rng.random_range(0.2..3.0);
        let mu = intensity * (1.0 + (intensity - delta) * (intensity - delta));
        let pump = (mu / ((2.0f64 / gamma).powi(3) * abs_g)).sqrt();
        let p = SystemParams::new(gamma, eta * delta * gamma / 2.0, eta * abs_g, pump).unwrap();
        let phase = steady_state_phase(intensity, delta, eta);
        let alpha =
            Complex64::from_polar((intensity * gamma / (2.0 * abs_g)).sqrt(), phase);
        return RandomPoint {
            p,
            ss: SteadyState {
                intensity,
                phase,
                alpha: Some(alpha),
                stability: Stability::Stable,
            },
            sp: ScaledParams::new(delta, mu, eta).unwrap(),
            s,
            s_prime,
            omega_scaled: rng.random_range(-20.0..20.0),
        };
    }
}

struct Identity {
    name: &'static str,
    tolerance: f64,
    max_residual: f64,
}

pub fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut identities = vec![
        Identity { name: "cross_ordering_combination", tolerance: 1e-10, max_residual: 0.0 },
        Identity { name: "closed_form_vs_resolvent", tolerance: 1e-10, max_residual: 0.0 },
        Identity { name: "spectral_structure", tolerance: 1e-12, max_residual: 0.0 },
        Identity { name: "squeezing_route_equivalence", tolerance: 1e-12, max_residual: 0.0 },
        Identity { name: "diffusion_combination", tolerance: 1e-14, max_residual: 0.0 },
        Identity { name: "diffusion_eigenvalues", tolerance: 1e-12, max_residual: 0.0 },
        Identity { name: "psd_boundary", tolerance: 1e-9, max_residual: 0.0 },
    ];

    for _ in 0..args.trials {
        let pt = random_point(&mut rng);
        let omega = pt.omega_scaled * pt.p.gamma / 2.0;
        let ord_s = OrderingSelector::SOrder(pt.s);
        let ord_sp = OrderingSelector::SOrder(pt.s_prime);

        let m_s = spectral_matrix_numeric(ord_s, &pt.ss, &pt.p, omega)?;
        let m_sp = spectral_matrix_numeric(ord_sp, &pt.ss, &pt.p, omega)?;
        let gen_p =
            spectral_matrix_numeric(OrderingSelector::GeneralizedP, &pt.ss, &pt.p, omega)?;
        let comb = combine_spectra(pt.s, pt.s_prime, &m_s, &m_sp)?;
        identities[0].max_residual = identities[0]
            .max_residual
            .max((comb - gen_p).max_abs() / gen_p.max_abs());

        let closed = spectral_matrix_closed(ord_s, &pt.sp, pt.ss.intensity, pt.omega_scaled)
            * (2.0 / pt.p.gamma);
        identities[1].max_residual = identities[1]
            .max_residual
            .max((m_s - closed).max_abs() / closed.max_abs());

        let mirrored = spectral_matrix_numeric(ord_s, &pt.ss, &pt.p, -omega)?;
        let scale = m_s.max_abs();
        let structure = ((m_s.m22 - m_s.m11.conj()).norm() / scale)
            .max((m_s.m21 - mirrored.m12).norm() / scale);
        identities[2].max_residual = identities[2].max_residual.max(structure);

        let phi = pt.phase_sample();
        let direct =
            squeezing_spectrum_out(SqueezeRoute::DirectP, &pt.ss, &pt.p, phi, omega)?;
        let paired = squeezing_spectrum_out(
            SqueezeRoute::Pair(pt.s, pt.s_prime),
            &pt.ss,
            &pt.p,
            phi,
            omega,
        )?;
        identities[3].max_residual = identities[3].max_residual.max((direct - paired).abs());

        let alpha = pt.ss.alpha.unwrap();
        let d_s = diffusion(ord_s, alpha, &pt.p);
        let d_sp = diffusion(ord_sp, alpha, &pt.p);
        let d_one = diffusion(OrderingSelector::SOrder(1.0), alpha, &pt.p);
        let comb_d = combine_diffusion(pt.s, pt.s_prime, &d_s, &d_sp)?;
        let (w, w_prime) = combination_weights(pt.s, pt.s_prime)?;
        let norm = (w.abs() * d_s.max_abs() + w_prime.abs() * d_sp.max_abs()).max(pt.p.gamma);
        identities[4].max_residual = identities[4]
            .max_residual
            .max((comb_d - d_one).max_abs() / norm);

        let (dp, dm) = diffusion_eigenvalues(pt.s, alpha, &pt.p);
        let (ep, em) = diffusion_real(pt.s, alpha.re, alpha.im, &pt.p).sym_eigenvalues();
        let escale = dp.abs().max(dm.abs()).max(1e-300);
        identities[5].max_residual = identities[5]
            .max_residual
            .max((dp - ep).abs().max((dm - em).abs()) / escale);

        // s = -1: PSD boundary sits at |alpha|^2 = gamma/|g|
        let bound = pt.p.gamma / pt.p.coupling.abs();
        let ord_q = OrderingSelector::SOrder(-1.0);
        let inside = Complex64::new((bound * (1.0 - 1e-9)).sqrt(), 0.0);
        let outside = Complex64::new((bound * (1.0 + 1e-9)).sqrt(), 0.0);
        let detected = is_psd(ord_q, inside, &pt.p) && !is_psd(ord_q, outside, &pt.p);
        if !detected {
            identities[6].max_residual = identities[6].max_residual.max(1.0);
        }
        // s = 0 always PSD, s = 1 never away from the origin
        if !is_psd(OrderingSelector::SOrder(0.0), alpha * 10.0, &pt.p)
            || is_psd(OrderingSelector::SOrder(1.0), alpha, &pt.p)
        {
            identities[6].max_residual = identities[6].max_residual.max(1.0);
        }
    }

    println!("identity                        max residual   tolerance   status");
    let mut all_ok = true;
    for id in &identities {
        let tol = id.tolerance * args.tolerance_scale;
        let ok = id.max_residual <= tol;
        all_ok &= ok;
        println!(
            "{:<30} {:>13.3e} {:>11.1e}   {}",
            id.name,
            id.max_residual,
            tol,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Verification(
            "one or more identities exceeded tolerance".into(),
        ))
    }
}

impl RandomPoint {
    /// A deterministic phase derived from the sampled values.
    fn phase_sample(&self) -> f64 {
        (self.s + 2.0 * self.s_prime + self.omega_scaled).sin()
    }
}
