//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use super::linsolve::Lu;
use super::{DenseMatrix, NumError};

/// Padé(13,13) numerator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which Padé(13) reaches unit roundoff without scaling.
const THETA13: f64 = 5.371_920_351_148_152;

/// Scaled norms beyond this overflow any double-precision exponential.
const MAX_SQUARINGS: u32 = 1100;

/// `e^{M t}`.
pub fn expm(m: &DenseMatrix, t: f64) -> Result<DenseMatrix, NumError> {
    if !m.is_square() {
        return Err(NumError::Dimension(format!(
            "expm needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !t.is_finite() || !m.is_finite() {
        return Err(NumError::NumericFailure {
            what: "non-finite input to expm".into(),
            residual: f64::NAN,
        });
    }
    let n = m.rows();
    let a = m.scale(t);
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(DenseMatrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    if squarings > MAX_SQUARINGS {
        return Err(NumError::Overflow(format!(
            "‖Mt‖₁ = {norm:e} is out of range for the matrix exponential"
        )));
    }
    let a = a.scale(0.5f64.powi(squarings as i32));
    let mut result = pade13(&a)?;
    for _ in 0..squarings {
        result = result.matmul(&result);
        if !result.is_finite() {
            return Err(NumError::Overflow(format!(
                "matrix exponential overflowed while squaring (‖Mt‖₁ = {norm:e})"
            )));
        }
    }
    Ok(result)
}

fn pade13(a: &DenseMatrix) -> Result<DenseMatrix, NumError> {
    let n = a.rows();
    let b = &PADE13;
    let ident = DenseMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> DenseMatrix {
        let mut out = a6.scale(c6);
        for ((o, x4), (x2, id)) in out
            .as_mut_slice()
            .iter_mut()
            .zip(a4.as_slice())
            .zip(a2.as_slice().iter().zip(ident.as_slice()))
        {
            *o += c4 * x4 + c2 * x2 + c0 * id;
        }
        out
    };

    let u_inner = a6.matmul(&lin(b[13], b[11], b[9], 0.0));
    let u = a.matmul(&(&u_inner + &lin(b[7], b[5], b[3], b[1])));
    let v_inner = a6.matmul(&lin(b[12], b[10], b[8], 0.0));
    let v = &v_inner + &lin(b[6], b[4], b[2], b[0]);

    let num = &v + &u;
    let den = &v - &u;
    Lu::factor(&den)?.solve(&num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_identity() {
        for n in 1..5 {
            let e = expm(&DenseMatrix::zeros(n, n), 3.7).unwrap();
            assert_eq!(e, DenseMatrix::identity(n));
        }
    }

    #[test]
    fn diagonal_case() {
        let d = DenseMatrix::from_diag(&[0.3, -2.0, 1.5]);
        let e = expm(&d, 2.0).unwrap();
        for (i, l) in [0.3f64, -2.0, 1.5].iter().enumerate() {
            let want = (l * 2.0).exp();
            assert!((e[(i, i)] - want).abs() <= 1e-13 * want, "{}", e[(i, i)]);
        }
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn two_node_laplacian_closed_form() {
        // -γL for a 2-node graph, γ = α = h = 1
        let m = DenseMatrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let e = expm(&m, 1.0).unwrap();
        let d = (-2.0f64).exp();
        let want =
            DenseMatrix::from_rows(&[[0.5 * (1.0 + d), 0.5 * (1.0 - d)], [0.5 * (1.0 - d), 0.5 * (1.0 + d)]])
                .unwrap();
        assert!(e.max_abs_diff(&want) < 1e-15, "{e:?}");
    }

    #[test]
    fn nilpotent_block_is_exact_polynomial() {
        let n = DenseMatrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        let t = 2.5;
        let e = expm(&n, t).unwrap();
        let want =
            DenseMatrix::from_rows(&[[1.0, t, t * t / 2.0], [0.0, 1.0, t], [0.0, 0.0, 1.0]]).unwrap();
        assert!(e.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn large_norm_is_scaled() {
        let r = DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let t = 50.0;
        let e = expm(&r, t).unwrap();
        let want = DenseMatrix::from_rows(&[[t.cos(), t.sin()], [-t.sin(), t.cos()]]).unwrap();
        assert!(e.max_abs_diff(&want) < 1e-12, "{e:?}");
    }

    #[test]
    fn overflow_is_reported() {
        let m = DenseMatrix::from_diag(&[1.0]);
        assert!(matches!(expm(&m, 1e6), Err(NumError::Overflow(_))));
        assert!(expm(&m, f64::NAN).is_err());
    }
}
