//! Dense Hermitian eigensolve with degeneracy clustering.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};

pub const DENSE_CAP: usize = 4096;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const DEGENERACY_TOL: f64 = 1e-8;

/// A distinct eigenvalue and how many times it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn eigenvalues_hermitian(op: &ComplexOperator, cap: usize) -> Result<Vec<f64>> {
    if op.dim() > cap {
        return Err(GentileError::DenseCap { dim: op.dim(), cap });
    }
    let asymmetry = op.asymmetry();
    if asymmetry >= HERMITIAN_TOL {
        return Err(GentileError::NonHermitian { asymmetry });
    }
    if op.dim() == 0 {
        return Ok(Vec::new());
    }
    let dense: DMatrix<Complex64> = op.to_dense();
    // symmetrize away round-off before handing to the solver
    let dense = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Groups sorted eigenvalues whose consecutive gaps are below `tol`.
/// Each level reports the cluster mean.
pub fn cluster(sorted: &[f64], tol: f64) -> Vec<Level> {
    let mut levels: Vec<Level> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] >= tol {
            let group = &sorted[start..i];
            if !group.is_empty() {
                levels.push(Level {
                    value: group.iter().sum::<f64>() / group.len() as f64,
                    multiplicity: group.len(),
                });
            }
            start = i;
        }
    }
    levels
}

/// Clustered spectrum `[(eigenvalue, multiplicity)]`, ascending; the
/// multiplicities sum to the dimension.
pub fn eigensolve_hermitian(op: &ComplexOperator, degeneracy_tol: f64) -> Result<Vec<Level>> {
    eigensolve_hermitian_capped(op, degeneracy_tol, DENSE_CAP)
}

pub fn eigensolve_hermitian_capped(op: &ComplexOperator, degeneracy_tol: f64, cap: usize) -> Result<Vec<Level>> {
    Ok(cluster(&eigenvalues_hermitian(op, cap)?, degeneracy_tol))
}
