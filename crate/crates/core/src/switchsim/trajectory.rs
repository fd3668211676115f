use num_complex::Complex64;

use crate::numkit::DenseMatrix;
use crate::synth::ModalForm;

use super::{GraphFamily, SimError};

/// Sampled closed-loop run. Every state is m x n with one agent per row.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub agent_states: Vec<DenseMatrix>,
    pub compensator_states: Option<Vec<DenseMatrix>>,
    pub observer_states: Option<Vec<DenseMatrix>>,
    pub error_series: Vec<f64>,
    /// Sample index of each switch time, then of the horizon.
    pub switch_sample_indices: Vec<usize>,
}

impl Trajectory {
    pub fn final_error(&self) -> f64 {
        self.error_series.last().copied().unwrap_or(0.0)
    }

    /// First sample time at which `e(t) < fraction · e(0)`, if any.
    pub fn first_time_below(&self, fraction: f64) -> Option<f64> {
        let e0 = *self.error_series.first()?;
        self.times
            .iter()
            .zip(&self.error_series)
            .find(|(_, e)| **e < fraction * e0)
            .map(|(t, _)| *t)
    }
}

/// Largest `‖xᵢ − xⱼ‖_∞` over all agent pairs.
pub fn spread(x: &DenseMatrix) -> f64 {
    (0..x.cols())
        .map(|c| {
            let col = x.column(c);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// `e(t)` for every sample.
pub fn consensus_error(states: &[DenseMatrix]) -> Vec<f64> {
    states.iter().map(spread).collect()
}

/// Common trajectory the agents approach on a fixed graph:
/// `Σ_{i≤r} qᵢ e^{λᵢ t} ξ₁ᵀ xⁱ(0)` with `ξ₁ᵀ1 = 1` and `x = Q⁻¹z`.
pub fn asymptotic_consensus_value(
    mf: &ModalForm,
    family: &GraphFamily,
    z0: &DenseMatrix,
    t: f64,
) -> Result<Vec<f64>, SimError> {
    if family.len() != 1 {
        return Err(SimError::NotAvailable(
            "the limit under switching depends on the realized graph sequence".into(),
        ));
    }
    if !mf.is_diagonal() {
        return Err(SimError::NotAvailable("A must be diagonalizable".into()));
    }
    let m = family.agent_count();
    if z0.rows() != m || z0.cols() != mf.order() {
        return Err(SimError::Dimension(format!(
            "z0 must be {m}x{}, got {}x{}",
            mf.order(),
            z0.rows(),
            z0.cols()
        )));
    }
    let xi = &family.summary(0).left1;
    let x0 = mf.to_modal(z0);
    let n = mf.order();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..mf.unstable_count() {
        let mu: Complex64 = x0.row(i).iter().zip(xi).map(|(x, w)| x * w).sum();
        let c = (mf.eigenvalues()[i] * t).exp() * mu;
        for (r, o) in out.iter_mut().enumerate() {
            *o += mf.q()[(r, i)] * c;
        }
    }
    Ok(out.iter().map(|v| v.re).collect())
}
