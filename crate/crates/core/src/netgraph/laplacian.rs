use std::cmp::Ordering;

use num_complex::Complex64;

use crate::numkit::{eig, DenseMatrix, Lu, NumError};

use super::{Digraph, GraphError};

/// Graph Laplacian `L_ij = -α_ij (i ≠ j)`, `L_ii = Σ_j α_ij`, with its source graph.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianMatrix {
    matrix: DenseMatrix,
    source: Digraph,
}

impl LaplacianMatrix {
    /// Recovers the graph from a Laplacian-shaped matrix (off-diagonals ≤ 0,
    /// zero row sums) and rebuilds the Laplacian from it.
    pub fn try_from_matrix(l: &DenseMatrix, alpha_floor: f64) -> Result<Self, GraphError> {
        if !l.is_square() {
            return Err(GraphError::Dimension("Laplacian must be square".into()));
        }
        let m = l.rows();
        let mut w = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                row_sum += l[(i, j)];
                if i != j {
                    w[(i, j)] = -l[(i, j)];
                }
            }
            if row_sum.abs() > 1e-9 * (1.0 + l[(i, i)].abs()) {
                return Err(GraphError::Dimension(format!(
                    "row {i} of the Laplacian sums to {row_sum}, expected 0"
                )));
            }
        }
        Ok(laplacian_of(&Digraph::from_weights(w, alpha_floor)?))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn source(&self) -> &Digraph {
        &self.source
    }

    pub fn order(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_undirected(&self) -> bool {
        self.source.is_undirected()
    }
}

pub fn laplacian_of(g: &Digraph) -> LaplacianMatrix {
    let m = g.agent_count();
    let mut l = DenseMatrix::zeros(m, m);
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i != j {
                let a = g.weight(i, j);
                l[(i, j)] = -a;
                diag += a;
            }
        }
        l[(i, i)] = diag;
    }
    LaplacianMatrix {
        matrix: l,
        source: g.clone(),
    }
}

/// Sorted Laplacian spectrum with the consensus eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralSummary {
    /// Ascending by real part, ties by imaginary part.
    pub values: Vec<Complex64>,
    /// Second entry of `values` (zero for a single agent).
    pub lambda2: Complex64,
    /// Right null vector scaled to have mean 1 (≈ 1_m).
    pub right1: Vec<f64>,
    /// Left null vector ξ₁ with `ξ₁ᵀ 1_m = 1`.
    pub left1: Vec<f64>,
    pub simple_zero: bool,
}

fn zero_tolerance(l: &DenseMatrix) -> f64 {
    1e-9 * l.max_abs().max(1.0) * l.rows() as f64
}

pub fn spectral_summary(l: &LaplacianMatrix) -> Result<SpectralSummary, NumError> {
    let lm = l.matrix();
    let m = lm.rows();
    let decomp = eig(lm)?;
    let scale = lm.max_abs().max(1.0);
    let tol = 1e-12 * scale;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (decomp.values[i], decomp.values[j]);
        if (a.re - b.re).abs() > tol {
            a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal)
        } else {
            a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal)
        }
    });
    let values: Vec<Complex64> = order.iter().map(|&i| decomp.values[i]).collect();
    let zero_tol = zero_tolerance(lm);
    let zeros = values.iter().filter(|v| v.norm() <= zero_tol).count();

    let first = order[0];
    let right = decomp.right_vector(first);
    let mean: Complex64 = right.iter().sum::<Complex64>() / m as f64;
    let right1 = if mean.norm() > 1e-12 {
        right.iter().map(|v| (v / mean).re).collect()
    } else {
        right.iter().map(|v| v.re).collect()
    };

    let left1 = left_null_vector(lm).unwrap_or_else(|| {
        let y = decomp.left_vector(first);
        let s: Complex64 = y.iter().sum();
        if s.norm() > 1e-12 {
            y.iter().map(|v| (v / s).re).collect()
        } else {
            let n = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            y.iter().map(|v| v.re / n).collect()
        }
    });

    Ok(SpectralSummary {
        lambda2: values.get(1).copied().unwrap_or(Complex64::new(0.0, 0.0)),
        values,
        right1,
        left1,
        simple_zero: zeros == 1,
    })
}

/// Solves `Lᵀ ξ = 0`, `1ᵀ ξ = 1` by replacing the redundant last equation.
fn left_null_vector(l: &DenseMatrix) -> Option<Vec<f64>> {
    let m = l.rows();
    let mut sys = l.transpose();
    for j in 0..m {
        sys[(m - 1, j)] = 1.0;
    }
    let mut rhs = DenseMatrix::zeros(m, 1);
    rhs[(m - 1, 0)] = 1.0;
    let lu = Lu::factor(&sys).ok()?;
    if lu.condition() > 1e12 {
        return None;
    }
    let x = lu.solve(&rhs).ok()?;
    Some(x.column(0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertyCheck {
    pub passed: bool,
    pub residual: f64,
}

/// Pass/fail record of the four standard Laplacian properties.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianReport {
    /// Row sums vanish.
    pub row_sums_zero: PropertyCheck,
    /// Smallest eigenvalue is 0 with right eigenvector 1_m.
    pub zero_eigenvalue: PropertyCheck,
    /// Connected graph ⇒ the zero eigenvalue is simple.
    pub simple_zero_when_connected: PropertyCheck,
    /// Spectrum in the closed right half-plane; real when undirected.
    pub right_half_plane: PropertyCheck,
    pub connected: bool,
}

impl LaplacianReport {
    pub fn all_passed(&self) -> bool {
        self.row_sums_zero.passed
            && self.zero_eigenvalue.passed
            && self.simple_zero_when_connected.passed
            && self.right_half_plane.passed
    }
}

pub fn validate_laplacian_properties(l: &LaplacianMatrix) -> Result<LaplacianReport, NumError> {
    let lm = l.matrix();
    let m = lm.rows();
    let scale = lm.max_abs().max(1.0);
    let ones = vec![1.0; m];

    let row_resid = lm.matvec(&ones).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let row_sums_zero = PropertyCheck {
        passed: row_resid <= 1e-12 * scale,
        residual: row_resid,
    };

    let summary = spectral_summary(l)?;
    let zero_tol = zero_tolerance(lm);
    let smallest = summary.values[0];
    let zero_resid = smallest.norm().max(row_resid);
    let zero_eigenvalue = PropertyCheck {
        passed: smallest.norm() <= zero_tol && row_sums_zero.passed,
        residual: zero_resid,
    };

    let connected = l.source().is_connected();
    let simple_zero_when_connected = PropertyCheck {
        passed: !connected || summary.simple_zero,
        residual: summary.lambda2.re,
    };

    let min_re = summary.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max_im = summary.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let undirected = l.is_undirected();
    let mut half_resid = (-min_re).max(0.0);
    if undirected {
        half_resid = half_resid.max(max_im);
    }
    let right_half_plane = PropertyCheck {
        passed: min_re >= -zero_tol && (!undirected || max_im <= 1e-10),
        residual: half_resid,
    };

    Ok(LaplacianReport {
        row_sums_zero,
        zero_eigenvalue,
        simple_zero_when_connected,
        right_half_plane,
        connected,
    })
}
