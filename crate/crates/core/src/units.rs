//! Physical constants and unit helpers.
//!
//! Frequencies are angular (rad/s) everywhere inside the library. Fields
//! are Gauss at API boundaries, so the only dimensionful constant needed
//! is the Bohr magneton expressed as an angular frequency per Gauss.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Bohr magneton over h, in Hz/Gauss (CODATA-derived).
pub const MU_B_HZ_PER_GAUSS: f64 = 1.399_624e6;

/// Bohr magneton over hbar, in rad/s per Gauss.
pub const MU_B: f64 = TWO_PI * MU_B_HZ_PER_GAUSS;

/// Convert an ordinary frequency in Hz to angular frequency.
#[inline]
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

/// Convert an angular frequency to ordinary frequency in Hz.
#[inline]
pub fn to_hz(w: f64) -> f64 {
    w / TWO_PI
}

/// Convert kHz to rad/s.
#[inline]
pub fn khz(f: f64) -> f64 {
    hz(f * 1e3)
}

/// Convert MHz to rad/s.
#[inline]
pub fn mhz(f: f64) -> f64 {
    hz(f * 1e6)
}

/// Convert GHz to rad/s.
#[inline]
pub fn ghz(f: f64) -> f64 {
    hz(f * 1e9)
}

/// Microseconds to seconds.
#[inline]
pub fn us(t: f64) -> f64 {
    t * 1e-6
}

/// Milligauss to Gauss.
#[inline]
pub fn mgauss(b: f64) -> f64 {
    b * 1e-3
}
