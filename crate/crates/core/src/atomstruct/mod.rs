//! Static structure of the `S_1/2` hyperfine manifold.
//!
//! Builds the angular-momentum operators and the hyperfine + Zeeman
//! Hamiltonian, diagonalizes it at any quantization field, attaches
//! adiabatic `|F, mF⟩` labels by continuity from the zero-field coupled
//! basis, and provides transition frequencies, matrix elements, and
//! field derivatives.

mod diagram;
mod operators;
mod species;

pub use diagram::{
    build_static_hamiltonian, diagonalize_and_label, field_derivatives, zeeman_operator,
    LevelDiagram, SpinAxis,
};
pub use operators::{
    build_spin_operators, build_spin_operators_checked, spin_matrices, SpinOperatorSet,
};
pub use species::{IonSpecies, SpeciesSpec};
