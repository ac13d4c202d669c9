//! Simulation library for microwave dressing of a trapped-ion hyperfine
//! manifold driven by the near field of a trap-integrated wire.
//!
//! The library models the ground-state `S_1/2` manifold of a nuclear
//! spin-`I`, electron spin-`1/2` ion in a weak quantization field, an
//! off-resonant x-polarized microwave dressing tone addressing the two
//! near-degenerate `|F∓,mF⟩ ↔ |F±,mF±1⟩` transitions, and the protocols
//! that dressing enables:
//!
//! * artificial clock states — tuning the dressing detuning so the linear
//!   magnetic sensitivity of the `{|F+,0⟩, |F−,0⟩}` qubit vanishes
//!   ([`clocksense`]),
//! * degeneracy-broken shelving with a z-polarized MHz tone
//!   ([`protocols::run_shelving`]),
//! * frequency-separated single-qubit gates and their crosstalk scaling
//!   ([`protocols::run_gate`], [`protocols::crosstalk_sweep`]).
//!
//! Internal units are angular frequency (rad/s) throughout; magnetic
//! fields are Gauss at API boundaries. All operations are pure functions
//! of their inputs and safe to call concurrently.

pub mod atomstruct;
pub mod clocksense;
pub mod dressing;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod numerics;
pub mod protocols;
pub mod spin;
pub mod units;

pub use error::{Error, Result};
pub use spin::{HalfSpin, StateLabel};
