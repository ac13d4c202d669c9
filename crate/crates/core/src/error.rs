//! Error types shared across the library.

use crate::spin::StateLabel;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A spin quantum number whose doubled value is not a non-negative integer.
    #[error("invalid spin quantum number {value}: twice the value must be a non-negative integer")]
    InvalidSpin { value: f64 },

    /// Species parameters fail the zero-field-splitting consistency check.
    #[error("species inconsistency: hyperfine constant implies omega_0 = {derived:.6e} rad/s, configured {configured:.6e} rad/s")]
    InconsistentSpecies { derived: f64, configured: f64 },

    /// A requested `(F, mF)` label does not exist in the manifold.
    #[error("unknown level label {0}")]
    UnknownLabel(StateLabel),

    /// Two label candidates fit an eigenvector with indistinguishable overlaps.
    #[error("degenerate labeling near {label}: competing candidate overlaps are equal within tolerance (|ov| = {overlap:.6})")]
    DegenerateLabeling { label: StateLabel, overlap: f64 },

    /// Dressing requested on a transition with vanishing matrix element.
    #[error("forbidden transition {s1} <-> {s2}: |<s1|J_x|s2>| = {element:.3e}")]
    ForbiddenTransition {
        s1: StateLabel,
        s2: StateLabel,
        element: f64,
    },

    /// Mixing angle undefined because both the Rabi frequency and detuning vanish.
    #[error("undefined mixing angle: Omega and delta are both zero")]
    UndefinedAngle,

    /// Matrix dimensions do not match the manifold.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Finite-difference step shrank below the resolvable limit.
    #[error("finite-difference step underflow at h = {step:.3e} G")]
    StepUnderflow { step: f64 },

    /// Adaptive integration could not proceed.
    #[error("integration failure at t = {t:.6e} s: {reason} (dt = {dt:.3e} s, {steps} steps taken)")]
    IntegrationFailure {
        t: f64,
        dt: f64,
        steps: u64,
        reason: String,
    },

    /// Domain error in a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration of a schedule, drive, or protocol.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
