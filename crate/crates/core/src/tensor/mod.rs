//! Dense complex linear algebra for density matrices and superoperators.

mod expm;
mod matrix;
mod spectral;
mod state;

pub use expm::{expm, expm_frechet};
pub use matrix::{kron, ComplexMatrix, C64, I, ONE, ZERO};
pub use spectral::{hermitian_eig, hermitian_eigenvalues, trace_norm_hermitian, HERMITIAN_TOL};
pub use state::{
    check_density, devectorize, vectorize, vectorize_matrix, DensityMatrix, VectorizedState, PSD_TOL, TRACE_TOL,
};
