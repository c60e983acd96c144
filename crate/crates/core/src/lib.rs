//! Exact polarization dynamics of spin-½ gas clusters in ellipsoidal nano-cavities.
//!
//! In a closed nano-pore the dipolar couplings are averaged by molecular motion
//! to a single constant `g` shared by every spin pair. The polarization of an
//! initially polarized spin then oscillates forever instead of relaxing; this
//! crate computes that oscillation in closed form, cross-checks it with an
//! angular-momentum construction and a brute-force Hilbert-space oracle, and
//! adds coupling noise, asymptotic pulse profiles and the free-induction line
//! shape.

pub mod asymptotics;
pub mod error;
pub mod exact_dynamics;
pub mod geometry;
pub mod lineshape;
pub mod noise;
pub mod numeric;
pub mod oracle;
pub mod spectral_cg;

pub use asymptotics::{pulse_metrics, PulseMetrics};
pub use error::{Error, Result};
pub use exact_dynamics::{
    coefficient_a, p1_exact, p1_time_average, p_other, trace, ClusterSpec, ExactPolarization, Parity,
    PolarizationTrace, TimeGrid,
};
pub use geometry::{coupling_g, form_factor, invert_measurement, CavityGeometry, GasSpec, Inversion};
pub use lineshape::{delta_comb, fid, moments, spectrum, spectrum_dft, LineShape};
pub use noise::{
    monte_carlo, p1_noise_analytic, p1_noise_gaussian_approx, peak_envelope, t_squared, Kernel, MonteCarloTrace,
    NoiseModel,
};
