use num_complex::Complex64;

use crate::numkit::{is_hurwitz, DenseMatrix, HurwitzVerdict, Lu, NumError};

use super::modal::{AgentModel, ModalForm};
use super::SynthError;

/// Assembled gains for one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct GainDesign {
    pub gamma: Vec<f64>,
    pub phi: DenseMatrix,
    pub k: DenseMatrix,
    pub h: Option<DenseMatrix>,
    pub margin: f64,
}

impl GainDesign {
    /// Builds Φ from γ and checks that `A+BK` (and `A+HC`, if given) are Hurwitz.
    pub fn assemble(
        model: &AgentModel,
        mf: &ModalForm,
        gamma: Vec<f64>,
        k: DenseMatrix,
        h: Option<DenseMatrix>,
        margin: f64,
    ) -> Result<Self, SynthError> {
        let v = validate_k(model, &k)?;
        if !v.hurwitz {
            return Err(SynthError::NotHurwitz {
                which: "A+BK",
                abscissa: v.abscissa,
            });
        }
        if let Some(h) = &h {
            let v = validate_h(model, h)?;
            if !v.hurwitz {
                return Err(SynthError::NotHurwitz {
                    which: "A+HC",
                    abscissa: v.abscissa,
                });
            }
        }
        let phi = mf.phi(&gamma)?;
        Ok(Self {
            gamma,
            phi,
            k,
            h,
            margin,
        })
    }
}

/// Hurwitz verdict for `A + BK`.
pub fn validate_k(model: &AgentModel, k: &DenseMatrix) -> Result<HurwitzVerdict, SynthError> {
    if k.rows() != model.n_b() || k.cols() != model.n() {
        return Err(SynthError::Dimension(format!(
            "K must be {}x{}, got {}x{}",
            model.n_b(),
            model.n(),
            k.rows(),
            k.cols()
        )));
    }
    Ok(is_hurwitz(&(model.a() + &model.b().matmul(k)))?)
}

/// Hurwitz verdict for `A + HC`.
pub fn validate_h(model: &AgentModel, h: &DenseMatrix) -> Result<HurwitzVerdict, SynthError> {
    let c = model.c().ok_or(SynthError::MissingOutputMatrix)?;
    if h.rows() != model.n() || h.cols() != c.rows() {
        return Err(SynthError::Dimension(format!(
            "H must be {}x{}, got {}x{}",
            model.n(),
            c.rows(),
            h.rows(),
            h.cols()
        )));
    }
    Ok(is_hurwitz(&(model.a() + &h.matmul(c)))?)
}

/// Monic characteristic polynomial with the given roots, lowest degree first.
fn char_poly(poles: &[Complex64]) -> Result<Vec<f64>, SynthError> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for p in poles {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * p;
        }
        c = next;
    }
    let scale = c.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if c.iter().any(|v| v.im.abs() > 1e-9 * scale) {
        return Err(SynthError::NotApplicable(
            "poles must come in conjugate pairs".into(),
        ));
    }
    Ok(c.iter().map(|v| v.re).collect())
}

/// Ackermann pole placement for a single input: returns K with `eig(A+BK) = poles`.
pub fn place_poles_single_input(
    a: &DenseMatrix,
    b: &DenseMatrix,
    poles: &[Complex64],
) -> Result<DenseMatrix, SynthError> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || b.cols() != 1 || poles.len() != n {
        return Err(SynthError::Dimension(format!(
            "need square A, n x 1 B and n poles (n = {n}, B {}x{}, {} poles)",
            b.rows(),
            b.cols(),
            poles.len()
        )));
    }
    let coeffs = char_poly(poles)?;
    // controllability matrix [b, Ab, …, A^{n-1}b] and p(A) by Horner
    let mut ctrb = DenseMatrix::zeros(n, n);
    let mut col = b.column(0);
    for j in 0..n {
        for i in 0..n {
            ctrb[(i, j)] = col[i];
        }
        col = a.matvec(&col);
    }
    let mut p = DenseMatrix::identity(n).scale(coeffs[n]);
    for k in (0..n).rev() {
        p = &p.matmul(a) + &DenseMatrix::identity(n).scale(coeffs[k]);
    }
    let lu = Lu::factor(&ctrb.transpose()).map_err(|e| match e {
        NumError::Singular { .. } => SynthError::NoFeasibleGain("(A, B) is not controllable".into()),
        other => other.into(),
    })?;
    let mut en = DenseMatrix::zeros(n, 1);
    en[(n - 1, 0)] = 1.0;
    let row = lu.solve(&en)?.transpose();
    Ok(row.matmul(&p).scale(-1.0))
}

/// Observer gain for a single output by duality: `eig(A+HC) = poles`.
pub fn observer_gain_single_output(
    a: &DenseMatrix,
    c: &DenseMatrix,
    poles: &[Complex64],
) -> Result<DenseMatrix, SynthError> {
    let kd = place_poles_single_input(&a.transpose(), &c.transpose(), poles)?;
    Ok(kd.transpose())
}

/// Static coupling coefficients `Bᵀ(BBᵀ)⁻¹Φ`, defined when B has full row rank.
pub fn static_gain_controller(model: &AgentModel, phi: &DenseMatrix) -> Result<DenseMatrix, SynthError> {
    let n = model.n();
    if phi.rows() != n || phi.cols() != n {
        return Err(SynthError::Dimension(format!(
            "Φ must be {n}x{n}, got {}x{}",
            phi.rows(),
            phi.cols()
        )));
    }
    let b = model.b();
    if b.cols() < n {
        return Err(SynthError::NotApplicable(format!(
            "B has {} columns, fewer than the state dimension {n}",
            b.cols()
        )));
    }
    let bbt = b.matmul(&b.transpose());
    let lu = Lu::factor(&bbt).map_err(|_| SynthError::NotApplicable("B is rank deficient".into()))?;
    Ok(b.transpose().matmul(&lu.solve(phi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::eigenvalues;
    use crate::synth::modal_decompose;

    fn dm<R: AsRef<[f64]>>(rows: &[R]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn example() -> AgentModel {
        AgentModel::new(dm(&[[-1.5, 2.0], [-1.28, 1.7]]), dm(&[[1.0], [2.0]]), None).unwrap()
    }

    #[test]
    fn example_k_is_stabilizing() {
        let k = dm(&[[0.1333, -1.9167]]);
        assert!(validate_k(&example(), &k).unwrap().hurwitz);
        assert!(!validate_k(&example(), &DenseMatrix::zeros(1, 2)).unwrap().hurwitz);
        assert!(validate_k(&example(), &DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn observer_gain_for_identity_output() {
        let a = dm(&[[-1.5, 2.0], [-1.28, 1.7]]);
        let model = AgentModel::new(a.clone(), dm(&[[1.0], [2.0]]), Some(DenseMatrix::identity(2))).unwrap();
        let h = &a.scale(-1.0) - &DenseMatrix::identity(2);
        let v = validate_h(&model, &h).unwrap();
        assert!(v.hurwitz);
        assert!((v.abscissa + 1.0).abs() < 1e-12);
        assert!(matches!(
            validate_h(&example(), &h),
            Err(SynthError::MissingOutputMatrix)
        ));
    }

    #[test]
    fn ackermann_places_poles() {
        let a = dm(&[[-1.5, 2.0], [-1.28, 1.7]]);
        let b = dm(&[[1.0], [2.0]]);
        let poles = [Complex64::new(-1.5, 0.0), Complex64::new(-2.0, 0.0)];
        let k = place_poles_single_input(&a, &b, &poles).unwrap();
        // the published K places roughly these poles
        assert!(k.max_abs_diff(&dm(&[[0.1333, -1.9167]])) < 1e-3);
        let mut ev: Vec<f64> = eigenvalues(&(&a + &b.matmul(&k))).unwrap().iter().map(|v| v.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-9 && (ev[1] + 1.5).abs() < 1e-9);

        let osc = [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, -1.0)];
        let k = place_poles_single_input(&a, &b, &osc).unwrap();
        let acl = &a + &b.matmul(&k);
        assert!((acl.trace() + 2.0).abs() < 1e-9);

        // uncontrollable pair
        let bad = place_poles_single_input(&DenseMatrix::identity(2), &b, &poles);
        assert!(matches!(bad, Err(SynthError::NoFeasibleGain(_))));
        // non-conjugate poles
        let skew = [Complex64::new(-1.0, 1.0), Complex64::new(-1.0, 0.0)];
        assert!(place_poles_single_input(&a, &b, &skew).is_err());
    }

    #[test]
    fn observer_by_duality() {
        let a = dm(&[[0.0, 1.0], [2.0, -1.0]]);
        let c = dm(&[[1.0, 0.0]]);
        let poles = [Complex64::new(-3.0, 0.0), Complex64::new(-4.0, 0.0)];
        let h = observer_gain_single_output(&a, &c, &poles).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&(&a + &h.matmul(&c))).unwrap().iter().map(|v| v.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 4.0).abs() < 1e-9 && (ev[1] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn static_controller() {
        let phi = dm(&[[6.5, -5.0], [4.0, -2.5]]);
        let id = AgentModel::new(DenseMatrix::zeros(2, 2), DenseMatrix::identity(2), None).unwrap();
        assert!(static_gain_controller(&id, &phi).unwrap().max_abs_diff(&phi) < 1e-14);

        let scaled = AgentModel::new(DenseMatrix::zeros(2, 2), DenseMatrix::from_diag(&[1.0, 2.0]), None).unwrap();
        let want = DenseMatrix::from_diag(&[1.0, 0.5]).matmul(&phi);
        assert!(static_gain_controller(&scaled, &phi).unwrap().max_abs_diff(&want) < 1e-14);

        assert!(matches!(
            static_gain_controller(&example(), &phi),
            Err(SynthError::NotApplicable(_))
        ));
        let deficient = AgentModel::new(DenseMatrix::zeros(2, 2), dm(&[[1.0, 1.0], [1.0, 1.0]]), None).unwrap();
        assert!(matches!(
            static_gain_controller(&deficient, &phi),
            Err(SynthError::NotApplicable(_))
        ));
    }

    #[test]
    fn assemble_checks_hurwitz() {
        let model = example();
        let q = dm(&[[-0.2, -0.5], [-0.16, -0.5]]);
        let mf = modal_decompose(&model, Some(&q)).unwrap();
        let g = GainDesign::assemble(&model, &mf, vec![2.5, 1.5], dm(&[[0.1333, -1.9167]]), None, 0.25).unwrap();
        assert!(g.phi.max_abs_diff(&dm(&[[6.5, -5.0], [4.0, -2.5]])) < 1e-12);
        assert!(matches!(
            GainDesign::assemble(&model, &mf, vec![2.5, 1.5], DenseMatrix::zeros(1, 2), None, 0.25),
            Err(SynthError::NotHurwitz { .. })
        ));
    }
}
