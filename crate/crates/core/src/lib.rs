//! Resonant photon creation in a rectangular cavity split by a thin
//! conducting film whose conductivity is driven periodically.
//!
//! Natural units with `c = 1` are used throughout: lengths, times,
//! wavenumbers and the conductivity potential `V` are in meters or inverse
//! meters. See [`units`] for conversions.

pub mod cli;
pub mod config;
pub mod coupling;
pub mod direct;
pub mod drive;
pub mod error;
pub mod msa;
pub mod ode;
pub mod photons;
pub mod quadrature;
pub mod spectrum;
pub mod units;

pub use coupling::{
    coupling_coeffs, inner_product, scan_resonances, CouplingTable, FieldKind, ResonanceReport, Tolerance,
};
pub use direct::{extract_slow, integrate_full, phi_mode_check, DirectOptions, DriveSource, KModel, Reduction};
pub use drive::{fourier_numeric, fourier_ramp, DriveProfile, FourierSeries, Harmonic};
pub use error::{DceError, Result};
pub use msa::{detuned_parametric, msa_general, msa_parametric, rate_ratio, AmplitudeState, AmplitudeTrajectory};
pub use photons::{fit_rate, photon_number, FitOutcome, PhotonRecord};
pub use spectrum::{epsilon_n, solve_k, CavityConfig, ModeCut, ModeIndex, ModeSpectrum, PsiMode};
