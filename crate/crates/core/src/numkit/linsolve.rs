//! LU factorization with partial pivoting for real and complex matrices.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{ComplexMatrix, DenseMatrix, NumError};

/// Reciprocal condition numbers below this are treated as singular.
const RCOND_FLOOR: f64 = 1e-15;

pub(crate) trait Field:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Debug)]
struct LuFactors<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    condition: f64,
}

impl<T: Field> LuFactors<T> {
    fn factor(n: usize, a: &[T]) -> Result<Self, NumError> {
        let norm = one_norm(n, n, a);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(NumError::Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] = lu[i * n + j] - f * u;
                }
            }
        }
        let mut out = Self {
            n,
            lu,
            perm,
            condition: f64::INFINITY,
        };
        let inv = out.solve_cols(&identity::<T>(n), n);
        let inv_norm = one_norm(n, n, &inv);
        out.condition = norm * inv_norm;
        if !out.condition.is_finite() || 1.0 / out.condition < RCOND_FLOOR {
            return Err(NumError::Singular {
                condition: out.condition,
            });
        }
        Ok(out)
    }

    /// Solves for a row-major `n x ncols` right-hand side.
    fn solve_cols(&self, rhs: &[T], ncols: usize) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::zero(); n * ncols];
        for i in 0..n {
            let src = self.perm[i];
            x[i * ncols..(i + 1) * ncols].copy_from_slice(&rhs[src * ncols..(src + 1) * ncols]);
        }
        for c in 0..ncols {
            for i in 0..n {
                let mut s = x[i * ncols + c];
                for k in 0..i {
                    s = s - self.lu[i * n + k] * x[k * ncols + c];
                }
                x[i * ncols + c] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[i * ncols + c];
                for k in (i + 1)..n {
                    s = s - self.lu[i * n + k] * x[k * ncols + c];
                }
                x[i * ncols + c] = s / self.lu[i * n + i];
            }
        }
        x
    }
}

fn identity<T: Field>(n: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    v
}

fn one_norm<T: Field>(rows: usize, cols: usize, a: &[T]) -> f64 {
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j].modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization of a real square matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    inner: LuFactors<f64>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self, NumError> {
        if !m.is_square() {
            return Err(NumError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self {
            inner: LuFactors::factor(m.rows(), m.as_slice())?,
        })
    }

    /// 1-norm condition number estimate `‖M‖₁‖M⁻¹‖₁`.
    pub fn condition(&self) -> f64 {
        self.inner.condition
    }

    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, NumError> {
        if rhs.rows() != self.inner.n {
            return Err(NumError::Dimension(format!(
                "right-hand side has {} rows, system has order {}",
                rhs.rows(),
                self.inner.n
            )));
        }
        let x = self.inner.solve_cols(rhs.as_slice(), rhs.cols());
        DenseMatrix::from_row_slice(rhs.rows(), rhs.cols(), &x)
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.inner.n;
        self.solve(&DenseMatrix::identity(n)).expect("square")
    }
}

/// LU factorization of a complex square matrix.
#[derive(Clone, Debug)]
pub struct ComplexLu {
    inner: LuFactors<Complex64>,
}

impl ComplexLu {
    pub fn factor(m: &ComplexMatrix) -> Result<Self, NumError> {
        if m.rows() != m.cols() {
            return Err(NumError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self {
            inner: LuFactors::factor(m.rows(), m.as_slice())?,
        })
    }

    pub fn condition(&self) -> f64 {
        self.inner.condition
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
        if rhs.rows() != self.inner.n {
            return Err(NumError::Dimension("right-hand side row mismatch".into()));
        }
        let x = self.inner.solve_cols(rhs.as_slice(), rhs.cols());
        ComplexMatrix::from_row_slice(rhs.rows(), rhs.cols(), &x)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.inner.n))
            .expect("square")
    }
}

/// Solves `M X = rhs`.
pub fn solve(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix, NumError> {
    Lu::factor(m)?.solve(rhs)
}

pub fn inverse(m: &DenseMatrix) -> Result<DenseMatrix, NumError> {
    Ok(Lu::factor(m)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = 1.0 / (i + j + 1) as f64;
            }
        }
        h
    }

    #[test]
    fn identity_system_returns_rhs() {
        let rhs = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let x = solve(&DenseMatrix::identity(3), &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn hand_inverse_of_transformation() {
        // det Q = 0.02, adjugate / det
        let q = DenseMatrix::from_rows(&[[-0.2, -0.5], [-0.16, -0.5]]).unwrap();
        let qi = inverse(&q).unwrap();
        let expected = DenseMatrix::from_rows(&[[-25.0, 25.0], [8.0, -10.0]]).unwrap();
        assert!(qi.max_abs_diff(&expected) < 1e-12, "{qi:?}");
    }

    #[test]
    fn hilbert_is_solved_but_flagged_ill_conditioned() {
        let h = hilbert(8);
        let lu = Lu::factor(&h).unwrap();
        assert!(lu.condition() > 1e9, "condition {}", lu.condition());
        let rhs = DenseMatrix::column_vector(&[1.0; 8]);
        let x = lu.solve(&rhs).unwrap();
        let resid = (&h.matmul(&x) - &rhs).max_abs();
        assert!(resid <= 1e-10 * rhs.max_abs(), "residual {resid}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        match Lu::factor(&m) {
            Err(NumError::Singular { condition }) => assert!(condition > 1e15),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn complex_inverse_round_trip() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let m = ComplexMatrix::from_row_slice(2, 2, &[one, i, -i, one * 3.0]).unwrap();
        let inv = ComplexLu::factor(&m).unwrap().inverse();
        let prod = m.matmul(&inv);
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}
