//! Time-dependent Schrödinger propagation of the full manifold under
//! scheduled drive tones, in the lab or rotating frame, plus the dressed
//! effective model and the ramp adiabaticity scan.

mod envelope;
mod hamiltonian;
mod integrator;
mod propagate;
mod trajectory;

pub use envelope::{DriveTone, Envelope, PulseSchedule, ScheduledTone, ToneRole};
pub use hamiltonian::{build_hamiltonian_fn, Frame, HamiltonianFn, RwaMode, TimeDependentHamiltonian};
pub use integrator::{integrate_interval, Integrator, IntegratorStats};
pub use propagate::{
    adiabaticity_scan, basis_state, propagate, propagate_effective, EffectiveHamiltonian,
};
pub use trajectory::Trajectory;
