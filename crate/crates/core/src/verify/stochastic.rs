use crate::netgraph::LaplacianMatrix;
use crate::numkit::{expm, symmetric_eigen, DenseMatrix};

use super::VerifyError;

/// Residual tolerance for the doubly-stochastic checks.
pub const STOCHASTIC_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DoublyStochasticReport {
    pub w: DenseMatrix,
    pub symmetry_residual: f64,
    /// Smallest entry of W (should be ≥ 0).
    pub min_entry: f64,
    pub row_sum_residual: f64,
    pub col_sum_residual: f64,
    /// Largest eigenvalue of W (should be 1).
    pub leading_eigenvalue: f64,
    /// Second largest eigenvalue, equal to `e^{−γλ²h}`.
    pub second_eigenvalue: f64,
    /// True when 1 is a simple eigenvalue (fails as γh → 0, where W → I).
    pub unit_eigenvalue_simple: bool,
    /// Symmetric, nonnegative, unit row and column sums.
    pub passed: bool,
}

/// Checks that `W = exp(−γ L h)` is symmetric and doubly stochastic.
pub fn check_doubly_stochastic(
    l: &LaplacianMatrix,
    gamma: f64,
    h: f64,
) -> Result<DoublyStochasticReport, VerifyError> {
    if !l.is_undirected() {
        return Err(VerifyError::NotApplicable("graph is directed".into()));
    }
    let w = expm(l.matrix(), -gamma * h)?;
    let m = w.rows();
    let symmetry_residual = w.max_abs_diff(&w.transpose());
    let min_entry = w.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let row_sum_residual = (0..m)
        .map(|i| (w.row(i).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let col_sum_residual = (0..m)
        .map(|j| (w.column(j).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let sym = symmetric_eigen(&w.scale(0.5).try_add(&w.transpose().scale(0.5))?);
    let leading_eigenvalue = sym.values[m - 1];
    let second_eigenvalue = if m > 1 { sym.values[m - 2] } else { f64::NEG_INFINITY };
    let passed = symmetry_residual < STOCHASTIC_TOL
        && min_entry >= -STOCHASTIC_TOL
        && row_sum_residual < STOCHASTIC_TOL
        && col_sum_residual < STOCHASTIC_TOL;
    Ok(DoublyStochasticReport {
        symmetry_residual,
        min_entry,
        row_sum_residual,
        col_sum_residual,
        leading_eigenvalue,
        second_eigenvalue,
        unit_eigenvalue_simple: (leading_eigenvalue - 1.0).abs() < STOCHASTIC_TOL
            && second_eigenvalue < 1.0 - 1e-12,
        passed,
        w,
    })
}
