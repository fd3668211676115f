use num_complex::Complex64;

use crate::numkit::{eig, ComplexMatrix, DenseMatrix, Lu};

use super::SynthError;

/// Eigenvalues with real part above this count as unstable (closed right half).
pub const UNSTABLE_RE_THRESHOLD: f64 = -1e-12;

/// Tolerance for accepting a user transformation as diagonalizing/Jordanizing.
pub const REDUCTION_TOL: f64 = 1e-8;

/// Agent dynamics `ẇ = A w + B u`, optionally with output `y = C w`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentModel {
    a: DenseMatrix,
    b: DenseMatrix,
    c: Option<DenseMatrix>,
}

impl AgentModel {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: Option<DenseMatrix>) -> Result<Self, SynthError> {
        if !a.is_square() {
            return Err(SynthError::Dimension(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != a.rows() {
            return Err(SynthError::Dimension(format!(
                "B has {} rows but A has order {}",
                b.rows(),
                a.rows()
            )));
        }
        if let Some(c) = &c {
            if c.cols() != a.rows() {
                return Err(SynthError::Dimension(format!(
                    "C has {} columns but A has order {}",
                    c.cols(),
                    a.rows()
                )));
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> Option<&DenseMatrix> {
        self.c.as_ref()
    }

    /// State dimension n.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Input dimension n_B.
    pub fn n_b(&self) -> usize {
        self.b.cols()
    }
}

/// A run of modes sharing one eigenvalue and coupled by a nilpotent shift.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlock {
    /// Index of the first mode of the block.
    pub start: usize,
    pub size: usize,
    pub eigenvalue: f64,
}

/// Modal coordinates `x = Q⁻¹ z` of an agent model.
#[derive(Clone, Debug)]
pub struct ModalForm {
    q: ComplexMatrix,
    q_inv: ComplexMatrix,
    eigenvalues: Vec<Complex64>,
    unstable: usize,
    jordan_blocks: Option<Vec<JordanBlock>>,
    reduction_residual: f64,
}

impl ModalForm {
    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn q_inv(&self) -> &ComplexMatrix {
        &self.q_inv
    }

    /// Q as a real matrix when the modal basis is real.
    pub fn real_q(&self) -> Option<DenseMatrix> {
        (self.q.max_imag() <= 1e-12 * self.q.max_abs().max(1.0)).then(|| self.q.real_part())
    }

    pub fn real_q_inv(&self) -> Option<DenseMatrix> {
        (self.q_inv.max_imag() <= 1e-12 * self.q_inv.max_abs().max(1.0))
            .then(|| self.q_inv.real_part())
    }

    /// λ_A^1..λ_A^n, real parts non-increasing.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Number r of eigenvalues classified as unstable.
    pub fn unstable_count(&self) -> usize {
        self.unstable
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Non-trivial Jordan blocks (size ≥ 2); `None` when S is diagonal.
    pub fn jordan_blocks(&self) -> Option<&[JordanBlock]> {
        self.jordan_blocks.as_deref()
    }

    pub fn is_diagonal(&self) -> bool {
        self.jordan_blocks.is_none()
    }

    /// Max deviation of `Q⁻¹AQ` from the declared structure.
    pub fn reduction_residual(&self) -> f64 {
        self.reduction_residual
    }

    /// Partition of all modes into blocks; diagonal modes are size-1 blocks.
    pub fn block_partition(&self) -> Vec<(usize, usize)> {
        let n = self.order();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let size = self
                .jordan_blocks
                .iter()
                .flatten()
                .find(|b| b.start == i)
                .map_or(1, |b| b.size);
            out.push((i, size));
            i += size;
        }
        out
    }

    /// The structured modal matrix S (diagonal, or Jordan with unit superdiagonal).
    pub fn s_matrix(&self) -> ComplexMatrix {
        let n = self.order();
        let mut s = ComplexMatrix::zeros(n, n);
        for (i, v) in self.eigenvalues.iter().enumerate() {
            s[(i, i)] = *v;
        }
        for b in self.jordan_blocks.iter().flatten() {
            for k in b.start..(b.start + b.size - 1) {
                s[(k, k + 1)] = Complex64::new(1.0, 0.0);
            }
        }
        s
    }

    /// S as a real matrix when every eigenvalue is real.
    pub fn real_s(&self) -> Option<DenseMatrix> {
        let s = self.s_matrix();
        (s.max_imag() == 0.0).then(|| s.real_part())
    }

    /// Projects agent coordinates onto modes: row i of the result is `pᵢᵀ z_j`
    /// over agents j, i.e. the block `xⁱ` of x̂. `z` is m x n (row per agent).
    pub fn to_modal(&self, z: &DenseMatrix) -> ComplexMatrix {
        // x_j = Q⁻¹ z_j  ⇒  X (n x m) = Q⁻¹ Zᵀ
        self.q_inv.matmul_real(&z.transpose())
    }

    /// Inverse of [`ModalForm::to_modal`]: returns m x n agent coordinates.
    pub fn from_modal(&self, x: &ComplexMatrix) -> DenseMatrix {
        self.q.matmul(x).real_part().transpose()
    }
}

/// Sorts the spectrum of A (real parts non-increasing) and builds Q.
///
/// Without `user_q`, A must be diagonalizable. With `user_q`, `Q⁻¹AQ` must be
/// diagonal or block-Jordan `λI + N` within [`REDUCTION_TOL`].
pub fn modal_decompose(
    model: &AgentModel,
    user_q: Option<&DenseMatrix>,
) -> Result<ModalForm, SynthError> {
    match user_q {
        Some(q) => from_user_transformation(model.a(), q),
        None => from_eigenvectors(model.a()),
    }
}

fn count_unstable(values: &[Complex64]) -> usize {
    values.iter().filter(|v| v.re > UNSTABLE_RE_THRESHOLD).count()
}

fn from_eigenvectors(a: &DenseMatrix) -> Result<ModalForm, SynthError> {
    let e = eig(a)?;
    if e.is_defective() {
        return Err(SynthError::DefectiveWithoutTransformation {
            condition: e.vector_condition,
        });
    }
    let q = e.right_vectors.clone();
    let q_inv = e.left_vectors.clone();
    let residual = {
        let s = q_inv.matmul_real(a).matmul(&q);
        let mut d = s.clone();
        for (i, v) in e.values.iter().enumerate() {
            d[(i, i)] -= v;
        }
        d.max_abs()
    };
    Ok(ModalForm {
        unstable: count_unstable(&e.values),
        eigenvalues: e.values,
        q,
        q_inv,
        jordan_blocks: None,
        reduction_residual: residual,
    })
}

fn from_user_transformation(a: &DenseMatrix, q: &DenseMatrix) -> Result<ModalForm, SynthError> {
    let n = a.rows();
    if q.rows() != n || q.cols() != n {
        return Err(SynthError::Dimension(format!(
            "Q must be {n}x{n}, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let q_inv = Lu::factor(q)?.inverse();
    let s = q_inv.matmul(a).matmul(q);
    let tol = REDUCTION_TOL * a.max_abs().max(1.0);

    // Walk the diagonal, grouping modes linked by a unit superdiagonal.
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut residual: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let mut size = 1;
        while i + size < n {
            let sup = s[(i + size - 1, i + size)];
            if (sup - 1.0).abs() <= tol {
                size += 1;
            } else {
                break;
            }
        }
        let lambda = (i..i + size).map(|k| s[(k, k)]).sum::<f64>() / size as f64;
        for k in i..i + size {
            residual = residual.max((s[(k, k)] - lambda).abs());
            if k + 1 < i + size {
                residual = residual.max((s[(k, k + 1)] - 1.0).abs());
            }
        }
        blocks.push((i, size));
        i += size;
    }
    for r in 0..n {
        for c in 0..n {
            if r == c {
                continue;
            }
            let inside_chain = c == r + 1
                && blocks
                    .iter()
                    .any(|&(st, sz)| r >= st && c < st + sz);
            if !inside_chain {
                residual = residual.max(s[(r, c)].abs());
            }
        }
    }
    if residual > tol {
        return Err(SynthError::BadTransformation { residual });
    }

    // Stable reorder of blocks so block eigenvalues are non-increasing.
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by(|&x, &y| s[(blocks[y].0, blocks[y].0)].total_cmp(&s[(blocks[x].0, blocks[x].0)]));
    let mut perm = Vec::with_capacity(n);
    let mut jordan = Vec::new();
    let mut eigenvalues = Vec::with_capacity(n);
    for &bi in &order {
        let (st, sz) = blocks[bi];
        let lambda = (st..st + sz).map(|k| s[(k, k)]).sum::<f64>() / sz as f64;
        if sz >= 2 {
            jordan.push(JordanBlock {
                start: perm.len(),
                size: sz,
                eigenvalue: lambda,
            });
        }
        for k in st..st + sz {
            perm.push(k);
            eigenvalues.push(Complex64::new(lambda, 0.0));
        }
    }
    let mut qp = DenseMatrix::zeros(n, n);
    let mut qip = DenseMatrix::zeros(n, n);
    for (dst, &src) in perm.iter().enumerate() {
        for r in 0..n {
            qp[(r, dst)] = q[(r, src)];
            qip[(dst, r)] = q_inv[(src, r)];
        }
    }
    Ok(ModalForm {
        unstable: count_unstable(&eigenvalues),
        eigenvalues,
        q: ComplexMatrix::from_real(&qp),
        q_inv: ComplexMatrix::from_real(&qip),
        jordan_blocks: (!jordan.is_empty()).then_some(jordan),
        reduction_residual: residual,
    })
}
