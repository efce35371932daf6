//! Dense complex linear algebra for small Hilbert spaces.

mod eigen;
mod matrix;
mod state;

pub use eigen::{eig_hermitian, HermitianEigen};
pub use matrix::{dagger, kron, kron_all, ComplexMatrix, HERMITIAN_TOL};
pub(crate) use state::{entropy_from_values, reduce};
pub use state::{
    partial_trace, von_neumann_entropy, BasisLayout, DensityMatrix, QuantumState, Subsystem,
    ENTROPY_CUTOFF,
};

pub use num_complex::Complex64;
