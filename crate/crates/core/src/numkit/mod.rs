//! Dense real/complex linear algebra for small matrices.

mod complex;
mod eigen;
mod expm;
mod kron;
mod linsolve;
mod matrix;

pub use complex::ComplexMatrix;
pub use eigen::{
    eig, eigenvalues, symmetric_eigen, EigenDecomp, SymmetricEigen, DEFECTIVE_CONDITION,
    MAX_EIG_ORDER,
};
pub use expm::expm;
pub use kron::kron;
pub use linsolve::{inverse, solve, ComplexLu, Lu};
pub use matrix::DenseMatrix;
pub use num_complex::Complex64;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular to working precision (condition ≈ {condition:e})")]
    Singular { condition: f64 },
    #[error("numerical failure: {what} (residual {residual:e})")]
    NumericFailure { what: String, residual: f64 },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("matrix order {order} exceeds the supported limit {limit}")]
    TooLarge { order: usize, limit: usize },
}

/// Outcome of a Hurwitz stability test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HurwitzVerdict {
    pub hurwitz: bool,
    /// Largest real part over the spectrum.
    pub abscissa: f64,
}

/// True iff every eigenvalue has strictly negative real part.
pub fn is_hurwitz(m: &DenseMatrix) -> Result<HurwitzVerdict, NumError> {
    let abscissa = eigenvalues(m)?
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HurwitzVerdict {
        hurwitz: abscissa < 0.0,
        abscissa,
    })
}

/// Euclidean norm of a real vector.
pub fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_identity_is_hurwitz() {
        let v = is_hurwitz(&DenseMatrix::identity(3).scale(-1.0)).unwrap();
        assert!(v.hurwitz);
        assert!((v.abscissa + 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_loop_example_is_hurwitz() {
        let a = DenseMatrix::from_rows(&[[-1.5, 2.0], [-1.28, 1.7]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let k = DenseMatrix::from_rows(&[[0.1333, -1.9167]]).unwrap();
        let acl = &a + &b.matmul(&k);
        // trace ≈ -3.5, det ≈ 3.0 → both roots in the open left half-plane
        assert!((acl.trace() + 3.5001).abs() < 1e-9);
        let v = is_hurwitz(&acl).unwrap();
        assert!(v.hurwitz);
        let open = is_hurwitz(&a).unwrap();
        assert!(!open.hurwitz);
        assert!((open.abscissa - 0.1).abs() < 1e-6);
    }
}
