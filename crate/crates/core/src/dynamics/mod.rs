//! Hamiltonians, propagation and observables.

pub mod drive;
pub mod expm;
pub mod hamiltonian;
pub mod observables;
pub mod propagate;

pub use drive::{ConstantDrive, Drive, GaussianDrive, ShortcutDrive};
pub use expm::unitary_step;
pub use hamiltonian::{build_hamiltonian, DriveSample, HamiltonianKind};
pub use observables::{
    attach_bloch, dressed_basis, effective_field, gauge_transform, spin_polarization, transfer_efficiency,
    DressedBasis, EffectiveField,
};
pub use propagate::{propagate, Model, PropagationOptions};
