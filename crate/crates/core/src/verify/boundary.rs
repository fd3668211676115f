use crate::numkit::{symmetric_eigen, vec_norm, ComplexMatrix, DenseMatrix};
use crate::switchsim::{propagate_modal_closed_form, GraphFamily, Schedule};

use super::{scalar_modal, VerifyError};

/// Run held on the weakest graph with the gain exactly at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDemo {
    /// Index of the graph with the smallest λ².
    pub i_star: usize,
    pub lambda2: f64,
    pub gamma1: f64,
    /// Unit λ²-eigenvector used as `x¹(t₀)`.
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    /// Disagreement `‖(I − 1̂1̂ᵀ) x¹(t)‖` at the sample times. For undirected
    /// graphs this equals `‖x¹(t) − e^{λ_A t} 1̂1̂ᵀ x¹(t₀)‖`, but it does not
    /// amplify rounding along the growing consensus direction.
    pub deviation: Vec<f64>,
    /// `max |δ(t)/δ(0) − 1|`.
    pub max_relative_change: f64,
}

impl BoundaryDemo {
    /// True when the deviation stays within `tol` (relative) of its start.
    pub fn is_constant(&self, tol: f64) -> bool {
        self.max_relative_change <= tol
    }
}

/// Holds the graph with the smallest λ² forever, starting on its λ²
/// eigenvector, with `γ¹ = λ_A/λ²` unless overridden. At the boundary the
/// deviation neither grows nor decays.
pub fn boundary_counterexample(
    family: &GraphFamily,
    lambda_a1: f64,
    horizon: f64,
    gamma_override: Option<f64>,
) -> Result<BoundaryDemo, VerifyError> {
    if !family.all_undirected() {
        return Err(VerifyError::NotApplicable("family has directed members".into()));
    }
    let m = family.agent_count();
    if m < 2 {
        return Err(VerifyError::Dimension("need at least two agents".into()));
    }
    let i_star = (0..family.len())
        .min_by(|&a, &b| family.lambda2(a).total_cmp(&family.lambda2(b)))
        .unwrap_or(0);
    let l = family.member(i_star).matrix();
    let sym = symmetric_eigen(l);
    let lambda2 = sym.values[1];
    let gamma1 = gamma_override.unwrap_or(lambda_a1 / lambda2);
    let x0 = sym.vectors.column(1);

    // Unit intervals, re-centred after each: the consensus direction is
    // invariant, and dropping the rounding-level mean keeps it from growing
    // like e^{λ_A t} and swamping the disagreement.
    let steps = horizon.ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let sched = Schedule::constant(i_star, h)?;
    let mf = scalar_modal(lambda_a1)?;
    let centred = |x: &[f64]| -> Vec<f64> {
        let mean = x.iter().sum::<f64>() / m as f64;
        x.iter().map(|v| v - mean).collect()
    };
    let mut x = centred(&x0);
    let mut times = vec![0.0];
    let mut deviation = vec![vec_norm(&x)];
    for k in 1..=steps {
        let xm = ComplexMatrix::from_real(&DenseMatrix::from_row_slice(1, m, &x)?);
        let traj = propagate_modal_closed_form(&mf, &[gamma1], family, &sched, &xm)?;
        let next: Vec<f64> = traj.last().row(0).iter().map(|v| v.re).collect();
        x = centred(&next);
        times.push(k as f64 * h);
        deviation.push(vec_norm(&x));
    }
    let d0 = deviation[0];
    let max_relative_change = deviation
        .iter()
        .map(|d| (d / d0 - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(BoundaryDemo {
        i_star,
        lambda2,
        gamma1,
        x0,
        times,
        deviation,
        max_relative_change,
    })
}
