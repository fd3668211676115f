//! Dense eigendecomposition.
//!
//! Symmetric input goes through cyclic Jacobi rotations, which gives
//! orthonormal eigenvectors even for repeated eigenvalues. Everything else
//! is reduced to Hessenberg form and driven to complex Schur form by
//! single-shift QR; eigenvectors come from back-substitution on the
//! triangular factor. Defective input is detected, not repaired: no
//! generalized eigenvectors are ever produced.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::linsolve::ComplexLu;
use super::{ComplexMatrix, DenseMatrix, NumError};

/// Matrices above this order are rejected.
pub const MAX_EIG_ORDER: usize = 500;

/// Eigenvector condition numbers above this mark the input as (near-)defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

const QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues, right and left eigenvectors of a square real matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    /// Sorted by descending real part, then descending imaginary part.
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors as columns, in the order of `values`.
    pub right_vectors: ComplexMatrix,
    /// Left eigenvectors as rows. When `vector_condition` is finite the rows
    /// are scaled so that `left_vectors * right_vectors = I`.
    pub left_vectors: ComplexMatrix,
    /// 1-norm condition number of `right_vectors`; infinite when a repeated
    /// eigenvalue lacks a full set of eigenvectors.
    pub vector_condition: f64,
}

impl EigenDecomp {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn is_defective(&self) -> bool {
        !(self.vector_condition <= DEFECTIVE_CONDITION)
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn right_vector(&self, i: usize) -> Vec<Complex64> {
        self.right_vectors.column(i)
    }

    pub fn left_vector(&self, i: usize) -> Vec<Complex64> {
        self.left_vectors.row(i).to_vec()
    }
}

/// Eigenvalues and orthonormal eigenvectors of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver. Only the upper triangle symmetry is assumed;
/// the caller is responsible for passing a symmetric matrix.
pub fn symmetric_eigen(m: &DenseMatrix) -> SymmetricEigen {
    assert!(m.is_square(), "symmetric_eigen needs a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let frob = a.norm_frobenius();
    if frob > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= f64::EPSILON * 1e-2 * frob {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        for (i, x) in col.iter().enumerate() {
            vectors[(i, dst)] = *x;
        }
    }
    SymmetricEigen { values, vectors }
}

fn fix_sign(col: &mut [f64]) {
    let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(lead) = col.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if *lead < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Full eigendecomposition with deterministic ordering.
pub fn eig(m: &DenseMatrix) -> Result<EigenDecomp, NumError> {
    check_input(m)?;
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    if m.is_symmetric(1e-14 * scale) {
        let sym = symmetric_eigen(m);
        let order: Vec<usize> = (0..n).rev().collect();
        let values: Vec<Complex64> = order
            .iter()
            .map(|&i| Complex64::new(sym.values[i], 0.0))
            .collect();
        let mut right = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                right[(i, dst)] = Complex64::new(sym.vectors[(i, src)], 0.0);
            }
        }
        let left = right.transpose();
        let vector_condition = right.norm_one() * left.norm_one();
        return Ok(EigenDecomp {
            values,
            right_vectors: right,
            left_vectors: left,
            vector_condition,
        });
    }

    let (values, right, clustered_defect) = general_right_eigen(m)?;
    let mut vector_condition = f64::INFINITY;
    let mut left = None;
    if !clustered_defect {
        if let Ok(lu) = ComplexLu::factor(&right) {
            vector_condition = lu.condition();
            left = Some(lu.inverse());
        }
    }
    let left = match left {
        Some(l) => l,
        None => left_from_transpose(m, &values, &right)?,
    };
    Ok(EigenDecomp {
        values,
        right_vectors: right,
        left_vectors: left,
        vector_condition,
    })
}

/// Eigenvalues only, in the same ordering as [`eig`].
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>, NumError> {
    check_input(m)?;
    let scale = m.max_abs().max(1.0);
    if m.is_symmetric(1e-14 * scale) {
        let sym = symmetric_eigen(m);
        return Ok(sym
            .values
            .iter()
            .rev()
            .map(|v| Complex64::new(*v, 0.0))
            .collect());
    }
    let (t, _) = complex_schur(&ComplexMatrix::from_real(m), false)?;
    let mut values: Vec<Complex64> = (0..m.rows()).map(|i| t[(i, i)]).collect();
    snap_real(&mut values, scale);
    let order = sorted_order(&values, scale);
    Ok(order.iter().map(|&i| values[i]).collect())
}

fn check_input(m: &DenseMatrix) -> Result<(), NumError> {
    if !m.is_square() {
        return Err(NumError::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > MAX_EIG_ORDER {
        return Err(NumError::TooLarge {
            order: m.rows(),
            limit: MAX_EIG_ORDER,
        });
    }
    if !m.is_finite() {
        return Err(NumError::NumericFailure {
            what: "non-finite entries in eigenvalue input".into(),
            residual: f64::NAN,
        });
    }
    Ok(())
}

fn snap_real(values: &mut [Complex64], scale: f64) {
    for v in values.iter_mut() {
        if v.im.abs() <= 1e-13 * scale {
            v.im = 0.0;
        }
    }
}

fn sorted_order(values: &[Complex64], scale: f64) -> Vec<usize> {
    let tol = 1e-12 * scale;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        if (a.re - b.re).abs() > tol {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
        } else {
            b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
        }
    });
    order
}

/// Returns sorted eigenvalues, unit right eigenvectors and whether a cluster
/// of nearly equal eigenvalues has a rank-deficient eigenvector set.
fn general_right_eigen(
    m: &DenseMatrix,
) -> Result<(Vec<Complex64>, ComplexMatrix, bool), NumError> {
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    let (t, z) = complex_schur(&ComplexMatrix::from_real(m), true)?;
    let z = z.expect("vectors requested");
    let mut raw_values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let tmax = t.max_abs().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tmax).max(f64::MIN_POSITIVE * 1e3);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[k] = Complex64::new(1.0, 0.0);
        let lambda = t[(k, k)];
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * x[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            x[i] = -s / d;
            let big = x.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
            if big > 1e150 {
                x.iter_mut().for_each(|v| *v /= big);
            }
        }
        let mut v = z.matvec(&x);
        normalize_phase(&mut v);
        vectors.set_column(k, &v);
    }

    snap_real(&mut raw_values, scale);
    let order = sorted_order(&raw_values, scale);
    let values: Vec<Complex64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut right = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        right.set_column(dst, &vectors.column(src));
    }
    let defect = cluster_defect(&values, &right, scale);
    Ok((values, right, defect))
}

fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let lead = *v
        .iter()
        .find(|x| x.norm() >= max * (1.0 - 1e-9))
        .expect("nonzero vector");
    let phase = lead.conj() / lead.norm();
    for x in v.iter_mut() {
        *x = *x * phase / norm;
        if x.im.abs() <= 1e-15 {
            x.im = 0.0;
        }
    }
}

/// Groups eigenvalues closer than a relative tolerance and checks that each
/// group's eigenvectors span a space of full dimension.
fn cluster_defect(values: &[Complex64], right: &ComplexMatrix, scale: f64) -> bool {
    let n = values.len();
    let tol = 1e-4 * scale;
    let mut group: Vec<usize> = (0..n).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (root(&mut group, i), root(&mut group, j));
                group[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    for r in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| root(&mut group, i) == r).collect();
        if members.len() < 2 {
            continue;
        }
        if min_singular_sq(right, &members) < 1e-12 {
            return true;
        }
    }
    false
}

/// Smallest eigenvalue of the Gram matrix of the selected columns.
fn min_singular_sq(v: &ComplexMatrix, cols: &[usize]) -> f64 {
    let k = cols.len();
    // Hermitian k x k Gram matrix embedded as a real symmetric 2k x 2k matrix.
    let mut emb = DenseMatrix::zeros(2 * k, 2 * k);
    for (a, &ca) in cols.iter().enumerate() {
        for (b, &cb) in cols.iter().enumerate() {
            let mut g = Complex64::new(0.0, 0.0);
            for i in 0..v.rows() {
                g += v[(i, ca)].conj() * v[(i, cb)];
            }
            emb[(a, b)] = g.re;
            emb[(a + k, b + k)] = g.re;
            emb[(a, b + k)] = -g.im;
            emb[(a + k, b)] = g.im;
        }
    }
    symmetric_eigen(&emb).values[0]
}

fn left_from_transpose(
    m: &DenseMatrix,
    values: &[Complex64],
    right: &ComplexMatrix,
) -> Result<ComplexMatrix, NumError> {
    let n = m.rows();
    let (tvalues, tvectors, _) = general_right_eigen(&m.transpose())?;
    let mut left = ComplexMatrix::zeros(n, n);
    let mut used = vec![false; n];
    for (i, lambda) in values.iter().enumerate() {
        let j = (0..n)
            .filter(|j| !used[*j])
            .min_by(|a, b| {
                (tvalues[*a] - lambda)
                    .norm()
                    .total_cmp(&(tvalues[*b] - lambda).norm())
            })
            .expect("same order");
        used[j] = true;
        // Left eigenvectors of M are right eigenvectors of Mᵀ (no conjugation
        // for real M).
        let y = tvectors.column(j);
        let v = right.column(i);
        let dot: Complex64 = y.iter().zip(&v).map(|(a, b)| a * b).sum();
        let scale = if dot.norm() > 1e-8 {
            Complex64::new(1.0, 0.0) / dot
        } else {
            Complex64::new(1.0, 0.0)
        };
        for (k, yk) in y.iter().enumerate() {
            left[(i, k)] = yk * scale;
        }
    }
    Ok(left)
}

/// Complex Schur decomposition `A = Z T Zᴴ` with `T` upper triangular.
pub(crate) fn complex_schur(
    a: &ComplexMatrix,
    want_vectors: bool,
) -> Result<(ComplexMatrix, Option<ComplexMatrix>), NumError> {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = ComplexMatrix::identity(n);
    let zero = Complex64::new(0.0, 0.0);

    // Householder reduction to upper Hessenberg form.
    for k in 0..n.saturating_sub(2) {
        let xnorm = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * xnorm;
        let vn2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        // H <- P H
        for j in k..n {
            let mut s = zero;
            for (idx, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + idx, j)];
            }
            let f = s * (2.0 / vn2);
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * f;
            }
        }
        // H <- H P, Z <- Z P
        for target in [&mut h, &mut z] {
            for i in 0..n {
                let mut s = zero;
                for (idx, vi) in v.iter().enumerate() {
                    s += target[(i, k + 1 + idx)] * vi;
                }
                let f = s * (2.0 / vn2);
                for (idx, vi) in v.iter().enumerate() {
                    target[(i, k + 1 + idx)] -= f * vi.conj();
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = zero;
        }
    }

    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    let budget = QR_ITERATIONS_PER_EIGENVALUE * n.max(1);
    let mut total_iter = 0usize;
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { norm } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > budget {
            return Err(NumError::NumericFailure {
                what: format!("QR iteration did not converge after {budget} sweeps"),
                residual: h[(hi, hi - 1)].norm(),
            });
        }

        let mu = if iter_since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = l + idx;
            let row_end = (k + 2).min(hi + 1);
            for i in 0..row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            if want_vectors {
                for i in 0..n {
                    let a = z[(i, k)];
                    let b = z[(i, k + 1)];
                    z[(i, k)] = a * c + b * s.conj();
                    z[(i, k + 1)] = -a * s + b * c;
                }
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = zero;
        }
    }
    Ok((h, want_vectors.then_some(z)))
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Rotation `[[c, s], [-s̄, c]]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}
