//! Ion species parameters.

use crate::error::{Error, Result};
use crate::spin::HalfSpin;
use crate::units;
use serde::{Deserialize, Serialize};

/// Atomic parameters of one ion species' ground `S_1/2` manifold.
///
/// The hyperfine constant is the coefficient of `I · J` in angular
/// frequency units, fixed against the configured zero-field splitting by
/// `A (I + 1/2) = omega_0` (the `F+`/`F−` gap at zero field). The nuclear
/// g-factor enters with the same sign structure as the electron one,
/// `H_Z = mu_B B (g_J J_z + g_I I_z)`, so species with a positive nuclear
/// magnetic moment carry a negative `g_I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub nuclear_spin: HalfSpin,
    /// Electron g-factor (dimensionless, positive).
    pub g_j: f64,
    /// Nuclear g-factor in Bohr-magneton units (dimensionless, tiny).
    pub g_i: f64,
    /// Coefficient of `I · J`, rad/s.
    pub hyperfine_constant: f64,
    /// Zero-field `F+`/`F−` splitting, rad/s.
    pub omega_0: f64,
}

/// Relative tolerance of the `omega_0` consistency invariant.
const OMEGA0_RTOL: f64 = 1e-6;

impl IonSpecies {
    /// Build a species from the zero-field splitting, deriving the
    /// hyperfine constant from `A = omega_0 / (I + 1/2)`.
    pub fn new(nuclear_spin: HalfSpin, g_j: f64, g_i: f64, omega_0: f64) -> Self {
        let a = omega_0 / (nuclear_spin.value() + 0.5);
        IonSpecies {
            nuclear_spin,
            g_j,
            g_i,
            hyperfine_constant: a,
            omega_0,
        }
    }

    /// Build from an explicit hyperfine constant, enforcing the `omega_0`
    /// consistency invariant.
    pub fn from_hyperfine(
        nuclear_spin: HalfSpin,
        g_j: f64,
        g_i: f64,
        hyperfine_constant: f64,
        omega_0: f64,
    ) -> Result<Self> {
        let species = IonSpecies {
            nuclear_spin,
            g_j,
            g_i,
            hyperfine_constant,
            omega_0,
        };
        species.check_consistency()?;
        Ok(species)
    }

    /// Verify that the hyperfine constant reproduces the configured
    /// zero-field splitting through the `I · J` eigenvalue difference.
    pub fn check_consistency(&self) -> Result<()> {
        let derived = self.hyperfine_constant * (self.nuclear_spin.value() + 0.5);
        let scale = self.omega_0.abs().max(1.0);
        if (derived - self.omega_0).abs() > OMEGA0_RTOL * scale {
            return Err(Error::InconsistentSpecies {
                derived,
                configured: self.omega_0,
            });
        }
        Ok(())
    }

    pub fn electron_spin(&self) -> HalfSpin {
        HalfSpin::HALF
    }

    /// Manifold dimension `(2I+1)(2J+1)`.
    pub fn dimension(&self) -> usize {
        self.nuclear_spin.multiplicity() * 2
    }

    /// Doubled `F` of the upper hyperfine manifold, `2(I + 1/2)`.
    pub fn two_f_upper(&self) -> u32 {
        self.nuclear_spin.doubled() + 1
    }

    /// Doubled `F` of the lower hyperfine manifold, `2(I - 1/2)`.
    ///
    /// Equals zero capacity for `I = 0` (single manifold).
    pub fn two_f_lower(&self) -> Option<u32> {
        self.nuclear_spin.doubled().checked_sub(1)
    }

    /// 137Ba+ ground-state defaults.
    ///
    /// The paper's worked example. Values are configuration inputs, not
    /// paper data: omega_0/2pi = 8.037741667 GHz, g_J = 2.00249, and
    /// g_I = -3.4034e-4 from the +0.937365 nuclear-magneton moment under
    /// this crate's sign convention.
    pub fn ba137() -> Self {
        IonSpecies::new(
            HalfSpin::from_doubled(3),
            2.00249,
            -3.4034e-4,
            units::ghz(8.037741667),
        )
    }

    /// 171Yb+ ground-state defaults (I = 1/2), mainly useful for
    /// exercising the four-level manifold.
    pub fn yb171() -> Self {
        IonSpecies::new(
            HalfSpin::HALF,
            1.998,
            -5.3775e-4,
            units::ghz(12.642812),
        )
    }
}

/// On-disk species description with unit-suffixed keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SpeciesSpec {
    /// Optional human-readable name, e.g. "137Ba+".
    #[serde(default)]
    pub name: Option<String>,
    pub nuclear_spin: f64,
    #[serde(rename = "g_J")]
    pub g_j: f64,
    #[serde(rename = "g_I")]
    pub g_i: f64,
    pub omega_0_GHz: f64,
}

impl SpeciesSpec {
    pub fn build(&self) -> Result<IonSpecies> {
        let i = HalfSpin::new(self.nuclear_spin)?;
        if !self.omega_0_GHz.is_finite() || self.omega_0_GHz < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "omega_0_GHz must be finite and non-negative, got {}",
                self.omega_0_GHz
            )));
        }
        Ok(IonSpecies::new(
            i,
            self.g_j,
            self.g_i,
            units::ghz(self.omega_0_GHz),
        ))
    }
}
