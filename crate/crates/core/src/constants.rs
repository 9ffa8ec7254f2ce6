//! Physical constants (CODATA 2018) and the unit conversions used throughout
//! the crate. Everything internal is SI; dipole moments and polarizabilities
//! are additionally exposed in atomic units.

use std::f64::consts::PI;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Hartree energy, J.
pub const HARTREE: f64 = 4.359_744_722_207_1e-18;
/// Atomic mass constant, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Standard acceleration of gravity, m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// One atomic unit of electric dipole moment (e a0), C m.
pub const DIPOLE_AU: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS;

/// One atomic unit of polarizability, C m^2 / V. Equal to 4 pi eps0 a0^3.
pub const POLARIZABILITY_AU: f64 = 4.0 * PI * EPSILON_0 * BOHR_RADIUS * BOHR_RADIUS * BOHR_RADIUS;

/// Ordinary frequency (Hz) to energy in hartree.
pub fn hz_to_hartree(freq_hz: f64) -> f64 {
    PLANCK * freq_hz / HARTREE
}

/// Vacuum wavelength (m) to ordinary frequency (Hz).
pub fn wavelength_to_hz(lambda_m: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_m
}

/// Ordinary frequency (Hz) to vacuum wavelength (m).
pub fn hz_to_wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

pub fn angular(freq_hz: f64) -> f64 {
    2.0 * PI * freq_hz
}

pub fn ordinary(omega: f64) -> f64 {
    omega / (2.0 * PI)
}
