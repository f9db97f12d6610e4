use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::spectral::{hermitian_eigenvalues, HERMITIAN_TOL};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_density(&matrix).map_err(Error::InvalidState)?;
        Ok(Self { matrix })
    }

    /// Projector onto a normalized ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ket has squared norm {norm}, expected 1")));
        }
        Self::new(ComplexMatrix::outer(ket, ket))
    }

    /// Computational basis projector `|i⟩⟨i|`.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidArgument(format!("basis index {i} outside dimension {n}")));
        }
        let mut ket = vec![ZERO; n];
        ket[i] = ONE;
        Self::pure(&ket)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diag(&vec![1.0 / n as f64; n]),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Real diagonal entry `⟨i|ρ|i⟩`.
    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag_real()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix).expect("density matrices are Hermitian")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Checks the density-matrix invariants, describing the first violation.
pub fn check_density(m: &ComplexMatrix) -> std::result::Result<(), String> {
    if !m.is_square() || m.rows() == 0 {
        return Err(format!("shape {:?} is not a non-empty square", m.shape()));
    }
    if let Some(z) = m.entries().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(format!("non-finite entry {z}"));
    }
    let herm = m.hermitian_deviation();
    if herm > HERMITIAN_TOL {
        return Err(format!("Hermiticity deviation {herm:.3e} exceeds {HERMITIAN_TOL:e}"));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(format!("trace {tr} differs from 1 by more than {TRACE_TOL:e}"));
    }
    let min = hermitian_eigenvalues(m)
        .map_err(|e| e.to_string())?
        .first()
        .copied()
        .unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(format!("minimum eigenvalue {min:.3e} below -{PSD_TOL:e}"));
    }
    Ok(())
}

/// Row-major vectorization `|ρ⟩` of an `N×N` matrix: entry `i·N + j` is `ρ_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedState {
    entries: Vec<C64>,
}

impl VectorizedState {
    pub fn from_entries(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `op |v⟩` for a superoperator matrix.
    pub fn apply(&self, op: &ComplexMatrix) -> VectorizedState {
        assert_eq!(op.cols(), self.len(), "superoperator does not act on this space");
        let v = ndarray::ArrayView1::from(&self.entries[..]);
        Self {
            entries: op.as_array().dot(&v).to_vec(),
        }
    }
}

pub fn vectorize(rho: &DensityMatrix) -> VectorizedState {
    vectorize_matrix(rho.matrix())
}

pub fn vectorize_matrix(m: &ComplexMatrix) -> VectorizedState {
    VectorizedState {
        entries: m.entries().copied().collect(),
    }
}

/// Inverse of [`vectorize`]. No Hermiticity is enforced on the result.
pub fn devectorize(v: &VectorizedState, n: usize) -> Result<ComplexMatrix> {
    if v.len() != n * n {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot be reshaped to {n}x{n}",
            v.len()
        )));
    }
    ComplexMatrix::new(n, n, v.entries.clone())
}
