//! Artificial clock states: dressed qubit splitting, magnetic
//! sensitivity, and the magic detunings where it vanishes.
//!
//! The qubit is the `{|F+,0⟩, |F−,0⟩}` pair. Dressing it through the
//! `m_F = +1` states makes the splitting's field dependence tunable: red
//! or blue detunings both admit a point where the linear sensitivity
//! cancels the bare quadratic-Zeeman slope. Coupling through `m_F = −1`
//! instead flips the sign of the detuning's field dependence and no such
//! point exists.

use crate::atomstruct::{field_derivatives, IonSpecies, LevelDiagram};
use crate::dressing::{
    dressed_shift, dressed_subspaces, Branch, DressedSpectrum, DressingConfig,
};
use crate::error::{Error, Result};
use crate::numerics::{bisect, central_derivative, log_grid, second_derivative};
use crate::spin::StateLabel;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Evaluation mode for the dressed splitting and its sensitivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingMode {
    /// Closed-form two-subspace expressions on top of the bare splitting.
    Analytic,
    /// Exact diagonalization plus the full static dressed spectrum
    /// (includes quadratic Zeeman and all off-resonant couplings).
    Numeric,
}

/// Clock qubit labels `(lower = |F−,0⟩, upper = |F+,0⟩)`.
pub fn clock_labels(species: &IonSpecies) -> Result<(StateLabel, StateLabel)> {
    let two_f_dn = species.two_f_lower().ok_or_else(|| {
        Error::InvalidConfig("clock qubit requires two hyperfine manifolds".into())
    })?;
    Ok((
        StateLabel::from_doubled(two_f_dn, 0),
        StateLabel::from_doubled(species.two_f_upper(), 0),
    ))
}

// finite-difference tuning for the field sensitivity: splittings are
// ~1e10 rad/s, so the eigen-solve cancellation floor is a few rad/s per
// Gauss at these steps, far below every curve scale of interest
const SENS_H0: f64 = 2e-4; // G
const SENS_REL_TOL: f64 = 1e-6;
const SENS_ABS_TOL: f64 = 5.0; // rad/s per G
const SENS_MIN_STEP: f64 = 1e-7; // G
const CURVATURE_STEP: f64 = 1e-2; // G

/// Total dressed qubit splitting `ω_{I,q}` at field `b_gauss`, rad/s.
///
/// The dressing carrier is frozen inside `config`; evaluating at a field
/// away from the one `config` was built at moves the detuning with the
/// Zeeman splitting exactly as a fixed-frequency tone would.
pub fn dressed_qubit_splitting(
    species: &IonSpecies,
    b_gauss: f64,
    config: &DressingConfig,
    mode: SplittingMode,
) -> Result<f64> {
    let (lower, upper) = clock_labels(species)?;
    let diagram = LevelDiagram::at_field(species, b_gauss)?;
    let bare = diagram.transition_frequency(lower, upper)?;
    match mode {
        SplittingMode::Analytic => {
            let [sub_a, sub_b] = dressed_subspaces(&diagram, config)?;
            Ok(bare + dressed_shift(&sub_a) + dressed_shift(&sub_b))
        }
        SplittingMode::Numeric => {
            let spectrum = DressedSpectrum::build(&diagram, config)?;
            // upper lives in the carrier-rotated sector of K
            Ok(spectrum.dressed_splitting(lower, upper)? + config.carrier)
        }
    }
}

/// Magnetic sensitivity `ω'_{I,q} = ∂ω_{I,q}/∂B`, rad/s per Gauss.
///
/// `Numeric` differentiates [`dressed_qubit_splitting`] at fixed carrier;
/// `Analytic` evaluates the closed form
/// `½[ω_q'(cos²(θ_a/2)+cos²(θ_b/2)) + ω_z'(|δ_a|/Δ_a + |δ_b|/Δ_b − 2)]`
/// with the mixing angles folded onto `[0, π/2]` so the adiabatic branch
/// is followed for either detuning sign (`ω_z'` is the signed pair-
/// transition slope: negative on the `m_F − 1` branch, hence no roots
/// there).
pub fn dressed_sensitivity(
    species: &IonSpecies,
    b_gauss: f64,
    config: &DressingConfig,
    mode: SplittingMode,
) -> Result<f64> {
    match mode {
        SplittingMode::Numeric => central_derivative(
            |b| dressed_qubit_splitting(species, b, config, SplittingMode::Numeric),
            b_gauss,
            SENS_H0,
            SENS_REL_TOL,
            SENS_ABS_TOL,
            SENS_MIN_STEP,
        ),
        SplittingMode::Analytic => {
            let (lower, upper) = clock_labels(species)?;
            let diagram = LevelDiagram::at_field(species, b_gauss)?;
            let [sub_a, sub_b] = dressed_subspaces(&diagram, config)?;
            let w_q_prime = field_derivatives(species, b_gauss, lower, upper, 1)?;
            let w_pair_prime =
                field_derivatives(species, b_gauss, sub_a.lower, sub_a.upper, 1)?;
            let weight = |sub: &crate::dressing::DressedSubspace| {
                // (1 + |cos θ|)/2 = cos²(θ/2) with θ folded to [0, π/2]
                (1.0 + sub.mixing_angle.cos().abs()) / 2.0
            };
            let bracket = |sub: &crate::dressing::DressedSubspace| {
                sub.detuning.abs() / sub.splitting - 1.0
            };
            Ok(0.5
                * (w_q_prime * (weight(&sub_a) + weight(&sub_b))
                    + w_pair_prime * (bracket(&sub_a) + bracket(&sub_b))))
        }
    }
}

/// Detuning search window for root finding and sweeps, magnitudes in
/// rad/s; both detuning signs are scanned.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub min_abs: f64,
    pub max_abs: f64,
    pub points: usize,
}

impl DeltaWindow {
    /// Default window: `|δ|/2π ∈ [1 kHz, 5 MHz]` capped at `0.7 ω_z` so
    /// the tone stays on its intended pair (past `2ω_z` the carrier walks
    /// onto the opposite-branch transitions).
    pub fn default_for(diagram: &LevelDiagram) -> Self {
        let wz = diagram.zeeman_splitting();
        let max_abs = (crate::units::mhz(5.0)).min(0.7 * wz);
        DeltaWindow {
            min_abs: crate::units::khz(1.0),
            max_abs,
            points: 400,
        }
    }

    /// Full signed grid, ascending from `-max` to `+max`.
    pub fn signed_grid(&self) -> Vec<f64> {
        let half = log_grid(self.min_abs, self.max_abs, self.points / 2);
        let mut grid: Vec<f64> = half.iter().rev().map(|d| -d).collect();
        grid.extend(half.iter().copied());
        grid
    }
}

const ROOT_REL_TOL: f64 = 1e-6;

/// All magic detunings: sign changes of the numeric `ω'_{I,q}(δ)` over
/// the window, refined by bisection. Empty when no sign change exists
/// (the `m_F − 1` branch).
pub fn find_magic_detuning(
    species: &IonSpecies,
    b_q: f64,
    b_d_gauss: f64,
    branch: Branch,
    window: &DeltaWindow,
) -> Result<Vec<f64>> {
    let diagram = LevelDiagram::at_field(species, b_q)?;
    let sens_at = |delta: f64| -> Result<f64> {
        let config = DressingConfig::new(&diagram, b_d_gauss, delta, 0, branch)?;
        dressed_sensitivity(species, b_q, &config, SplittingMode::Numeric)
    };

    let mut roots = Vec::new();
    for sign in [-1.0, 1.0] {
        let grid = sign_grid(window, sign);
        let values: Result<Vec<f64>> = grid.par_iter().map(|&d| sens_at(d)).collect();
        let values = values?;
        for k in 1..grid.len() {
            if values[k - 1] == 0.0 {
                roots.push(grid[k - 1]);
            } else if values[k - 1].signum() != values[k].signum() {
                let root = bisect(&sens_at, grid[k - 1], grid[k], ROOT_REL_TOL)?;
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // evaluation noise near a zero can bracket the same root twice
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * a.abs().max(b.abs()));
    Ok(roots)
}

fn sign_grid(window: &DeltaWindow, sign: f64) -> Vec<f64> {
    let mut g: Vec<f64> = log_grid(window.min_abs, window.max_abs, window.points / 2)
        .into_iter()
        .map(|d| sign * d)
        .collect();
    if sign < 0.0 {
        g.reverse();
    }
    g
}

/// Closed-form magic detuning `δ = sqrt(ω_z'(Ω_a² + Ω_b²) / 4 ω_q')`,
/// valid in the `δ ≫ Ω_α` limit.
pub fn analytic_magic_detuning(
    w_z_prime: f64,
    w_q_prime: f64,
    omega_a: f64,
    omega_b: f64,
) -> Result<f64> {
    if w_q_prime <= 0.0 {
        return Err(Error::Domain(format!(
            "closed-form magic detuning needs positive qubit sensitivity, got {w_q_prime}"
        )));
    }
    let radicand = w_z_prime * (omega_a * omega_a + omega_b * omega_b) / (4.0 * w_q_prime);
    if radicand < 0.0 {
        return Err(Error::Domain(
            "negative pair slope: no real magic detuning on this branch".into(),
        ));
    }
    Ok(radicand.sqrt())
}

/// Full sweep data for one `(B_D, branch)` pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub b_q_gauss: f64,
    pub b_d_gauss: f64,
    pub branch: Branch,
    /// Signed detunings, ascending, rad/s.
    pub deltas: Vec<f64>,
    /// `ω_{I,q}(δ)`, rad/s.
    pub splittings: Vec<f64>,
    /// `ω'_{I,q}(δ)`, rad/s per Gauss.
    pub sensitivities: Vec<f64>,
    /// Magic detunings found in the window, rad/s.
    pub roots: Vec<f64>,
    /// Closed-form prediction (positive root), when it exists.
    pub delta_pred: Option<f64>,
    /// `∂²ω_{I,q}/∂B²` at each root, rad/s per Gauss².
    pub curvature_at_roots: Vec<f64>,
}

/// Sweep `ω_{I,q}` and `ω'_{I,q}` over the window for every requested
/// `(B_D, branch)` combination. Grid points evaluate in parallel with
/// deterministic output ordering.
pub fn sensitivity_sweep(
    species: &IonSpecies,
    b_q: f64,
    b_d_list: &[f64],
    branches: &[Branch],
    window: &DeltaWindow,
) -> Result<Vec<SensitivityReport>> {
    let diagram = LevelDiagram::at_field(species, b_q)?;
    let (lower, upper) = clock_labels(species)?;
    let mut reports = Vec::new();
    for &b_d in b_d_list {
        for &branch in branches {
            let deltas = window.signed_grid();
            let rows: Result<Vec<(f64, f64)>> = deltas
                .par_iter()
                .map(|&delta| {
                    let config = DressingConfig::new(&diagram, b_d, delta, 0, branch)?;
                    let s =
                        dressed_qubit_splitting(species, b_q, &config, SplittingMode::Numeric)?;
                    let sp = dressed_sensitivity(species, b_q, &config, SplittingMode::Numeric)?;
                    Ok((s, sp))
                })
                .collect();
            let rows = rows?;
            let roots = find_magic_detuning(species, b_q, b_d, branch, window)?;

            let delta_pred = {
                // Ω is δ-independent; any in-window detuning works here
                let cfg =
                    DressingConfig::new(&diagram, b_d, window.max_abs / 2.0, 0, branch)?;
                let [sub_a, sub_b] = dressed_subspaces(&diagram, &cfg)?;
                let w_q_prime = field_derivatives(species, b_q, lower, upper, 1)?;
                let w_pair_prime =
                    field_derivatives(species, b_q, sub_a.lower, sub_a.upper, 1)?;
                analytic_magic_detuning(w_pair_prime, w_q_prime, sub_a.rabi, sub_b.rabi).ok()
            };

            let curvature_at_roots: Result<Vec<f64>> = roots
                .iter()
                .map(|&root| {
                    let config = DressingConfig::new(&diagram, b_d, root, 0, branch)?;
                    second_derivative(
                        |b| dressed_qubit_splitting(species, b, &config, SplittingMode::Numeric),
                        b_q,
                        CURVATURE_STEP,
                    )
                })
                .collect();

            reports.push(SensitivityReport {
                b_q_gauss: b_q,
                b_d_gauss: b_d,
                branch,
                deltas,
                splittings: rows.iter().map(|r| r.0).collect(),
                sensitivities: rows.iter().map(|r| r.1).collect(),
                roots,
                delta_pred,
                curvature_at_roots: curvature_at_roots?,
            });
        }
    }
    Ok(reports)
}
