use super::{DenseMatrix, NumError};

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, NumError> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some() => (r, c),
        _ => {
            return Err(NumError::Dimension(format!(
                "Kronecker product of {}x{} and {}x{} overflows",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )))
        }
    };
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for p in 0..b.rows() {
                for q in 0..b.cols() {
                    out[(i * b.rows() + p, j * b.cols() + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    Ok(out)
}
