//! Natural units with c = 1: lengths, times, wavenumbers and angular
//! frequencies are all expressed in meters or inverse meters.

use std::f64::consts::PI;

/// Speed of light used for unit conversion, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Seconds to natural time (meters).
pub fn seconds_to_meters(t: f64) -> f64 {
    t * SPEED_OF_LIGHT
}

pub fn meters_to_seconds(t: f64) -> f64 {
    t / SPEED_OF_LIGHT
}

/// Angular frequency in m⁻¹ to ordinary frequency in Hz.
pub fn omega_to_hz(omega: f64) -> f64 {
    omega * SPEED_OF_LIGHT / (2.0 * PI)
}

pub fn omega_to_ghz(omega: f64) -> f64 {
    omega_to_hz(omega) * 1e-9
}

/// A rate in m⁻¹ (per unit natural time) expressed in s⁻¹.
pub fn rate_to_hz(rate: f64) -> f64 {
    rate * SPEED_OF_LIGHT
}
