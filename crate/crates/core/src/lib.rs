//! Squeezing spectra and intracavity quadrature variances for dispersive
//! optical bistability, computed from s-ordered phase-space representations,
//! with stochastic Langevin simulation for cross-validation.
//!
//! The library is organized around the route from cavity parameters to
//! measurable noise spectra:
//!
//! * [`model`] — physical parameters, dimensionless scaling, classical
//!   steady states, turning points and linear stability.
//! * [`phase_space`] — drift fields, the drift Jacobian, s-ordered diffusion
//!   matrices, their positive-semidefiniteness region, and noise factors for
//!   simulation.
//! * [`spectra`] — linearized spectral matrices (numeric resolvent and
//!   closed forms), the cross-ordering combination that rebuilds the
//!   generalized-P result from any two s-orderings, output-field squeezing
//!   spectra and frequency-integrated intracavity variances.
//! * [`langevin`] — Euler-Maruyama integration of the linearized and
//!   nonlinear Langevin equations with reproducible noise substreams.
//! * [`welch`] — cross-periodogram spectral estimation and quadrature
//!   variance estimation from simulated trajectories.
//!
//! All quantities are `f64`; complex amplitudes use [`num_complex::Complex64`].

pub mod error;
pub mod langevin;
pub mod mat2;
pub mod model;
pub mod phase_space;
pub mod quad;
pub mod spectra;
pub mod welch;

pub use error::{Error, Result};
pub use mat2::{ComplexMat2, RealMat2};
pub use model::{
    classify_stability, estimate_coupling, turning_points, PhysicalConstants, ScaledParams,
    Stability, SteadyState, SystemParams,
};
pub use phase_space::{NoiseMode, OrderingSelector};
pub use spectra::{SqueezeRoute, SHOT_NOISE};
