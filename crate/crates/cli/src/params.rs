//! Parameter-block resolution: scaled or physical input, flat key-value
//! config files, and steady-branch selection.
//!
//! Scaled input is the primary interface (the result coordinates are
//! dimensionless); it is embedded into physical parameters with the
//! canonical choice `|g| = 1` and the supplied or default `gamma`, under
//! which every reported quantity is exact (the scaled results do not depend
//! on the embedding).

use crate::CliError;
use clap::Args;
use num_complex::Complex64;
use sqz_core::model::{characteristic_pump, classify_stability, steady_state_phase};
use sqz_core::{ScaledParams, Stability, SteadyState, SystemParams};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Args, Clone, Debug, Default)]
pub struct ParamArgs {
    /// Flat key = value config file; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Scaled detuning (dimensionless).
    #[arg(long = "Delta", alias = "delta", allow_negative_numbers = true)]
    pub delta: Option<f64>,

    /// Scaled pump (dimensionless, >= 0).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,

    /// Scaled intensity of the working branch (dimensionless, >= 0).
    #[arg(long = "I", alias = "intensity", allow_negative_numbers = true)]
    pub intensity: Option<f64>,

    /// Sign of the nonlinear coupling, +1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,

    /// Cavity intensity loss rate, 1/s (> 0). Defaults to 2 in scaled mode.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// Cavity-pump detuning, 1/s (physical mode).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,

    /// Nonlinear coupling, 1/s, signed (selects physical mode).
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,

    /// Pump amplitude, 1/s (physical mode, >= 0).
    #[arg(long, allow_negative_numbers = true)]
    pub e0: Option<f64>,

    /// Steady-branch index (ascending intensity) when several roots exist.
    #[arg(long)]
    pub branch: Option<usize>,
}

/// Fully resolved parameters: physical always available, scaled whenever the
/// coupling is nonzero.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub physical: SystemParams,
    pub scaled: Option<ScaledParams>,
    /// Intensity pinned directly on the command line, bypassing the pump.
    pub pinned_intensity: Option<f64>,
}

fn config_map(path: &PathBuf) -> Result<BTreeMap<String, f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {} is not key = value", lineno + 1)))?;
        let value: f64 = v.trim().parse().map_err(|_| {
            CliError::Usage(format!("config value for {} is not a number", k.trim()))
        })?;
        map.insert(k.trim().to_lowercase(), value);
    }
    Ok(map)
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let file = match &self.config {
            Some(path) => config_map(path)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<f64>, key: &str| flag.or_else(|| file.get(key).copied());

        let delta = pick(self.delta, "delta");
        let mu = pick(self.mu, "mu");
        let intensity = pick(self.intensity, "intensity").or_else(|| file.get("i").copied());
        let eta = pick(self.eta, "eta");
        let gamma = pick(self.gamma, "gamma");
        let theta = pick(self.theta, "theta");
        let g = pick(self.g, "g");
        let e0 = pick(self.e0, "e0");

        if let Some(i) = intensity {
            if i < 0.0 {
                return Err(CliError::Usage("intensity must be nonnegative".into()));
            }
        }

        if let Some(g) = g {
            // physical mode
            let gamma =
                gamma.ok_or_else(|| CliError::Usage("physical mode requires --gamma".into()))?;
            let p = SystemParams::new(gamma, theta.unwrap_or(0.0), g, e0.unwrap_or(0.0))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let scaled = p.scaled().ok();
            return Ok(Resolved {
                physical: p,
                scaled,
                pinned_intensity: intensity,
            });
        }

        // scaled mode
        let delta =
            delta.ok_or_else(|| CliError::Usage("missing parameters: give --Delta (scaled mode) or --g (physical mode)".into()))?;
        let eta = eta.unwrap_or(1.0);
        if eta != 1.0 && eta != -1.0 {
            return Err(CliError::Usage("eta must be +1 or -1".into()));
        }
        let gamma = gamma.unwrap_or(2.0);
        if gamma <= 0.0 {
            return Err(CliError::Usage("gamma must be positive".into()));
        }
        let mu = match (mu, intensity) {
            (Some(m), _) => m,
            (None, Some(i)) => characteristic_pump(i, delta)
                .map_err(|e| CliError::Usage(e.to_string()))?,
            (None, None) => {
                return Err(CliError::Usage(
                    "scaled mode requires --mu or --I in addition to --Delta".into(),
                ))
            }
        };
        if mu < 0.0 {
            return Err(CliError::Usage("mu must be nonnegative".into()));
        }
        let scaled = ScaledParams::new(delta, mu, eta).map_err(|e| CliError::Usage(e.to_string()))?;
        // canonical embedding |g| = 1
        let pump = (mu / (2.0 / gamma).powi(3)).sqrt();
        let physical = SystemParams::new(gamma, eta * delta * gamma / 2.0, eta, pump)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Resolved {
            physical,
            scaled: Some(scaled),
            pinned_intensity: intensity,
        })
    }
}

impl Resolved {
    /// All steady states in ascending intensity, with amplitudes.
    pub fn steady_states(&self) -> Result<Vec<SteadyState>, CliError> {
        if let Some(i) = self.pinned_intensity {
            let sp = self
                .scaled
                .ok_or_else(|| CliError::Usage("--I requires a nonzero coupling".into()))?;
            let phase = steady_state_phase(i, sp.delta, sp.eta);
            let p = &self.physical;
            let alpha =
                Complex64::from_polar((i * p.gamma / (2.0 * p.coupling.abs())).sqrt(), phase);
            return Ok(vec![SteadyState {
                intensity: i,
                phase,
                alpha: Some(alpha),
                stability: classify_stability(i, sp.delta),
            }]);
        }
        self.physical
            .steady_states()
            .map_err(|e| CliError::Numeric(e.to_string()))
    }

    /// The working branch: the pinned intensity, the lone stable root, or
    /// the `--branch` selection when several roots exist.
    pub fn working_state(&self, branch: Option<usize>) -> Result<SteadyState, CliError> {
        let states = self.steady_states()?;
        if let Some(idx) = branch {
            return states.get(idx).copied().ok_or_else(|| {
                CliError::Usage(format!("branch {idx} out of range (0..{})", states.len()))
            });
        }
        if states.len() == 1 {
            return Ok(states[0]);
        }
        let stable: Vec<&SteadyState> = states
            .iter()
            .filter(|s| s.stability == Stability::Stable)
            .collect();
        match stable.len() {
            1 => Ok(*stable[0]),
            _ => Err(CliError::Usage(format!(
                "{} steady states ({} stable); select one with --branch or pin --I",
                states.len(),
                stable.len()
            ))),
        }
    }
}
