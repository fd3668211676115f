use num_complex::Complex64;

use crate::netgraph::{spectral_summary, LaplacianMatrix};
use crate::numkit::{ComplexMatrix, DenseMatrix, Lu};

use super::modal::ModalForm;
use super::SynthError;

/// Default design margin (multiplicative and additive) above the strict threshold.
pub const DEFAULT_MARGIN: f64 = 0.25;

/// Below this, λ² is treated as zero (graph without a spanning tree).
const LAMBDA2_FLOOR: f64 = 1e-10;

/// How Jordan blocks are treated when checking gains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JordanPolicy {
    /// Every mode of a Jordan block must carry the same γ.
    #[default]
    Strict,
    /// Only the per-mode inequality is checked.
    Permissive,
}

/// Per-mode gains with the thresholds they were designed against.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaDesign {
    pub gammas: Vec<f64>,
    /// `Re(λ_A^i) / λ²` for every mode.
    pub thresholds: Vec<f64>,
    /// λ² used (the family minimum in the switching case).
    pub lambda2: f64,
    pub margin: f64,
}

/// Outcome of the strict inequality for one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVerdict {
    pub index: usize,
    pub eigenvalue_re: f64,
    pub gamma: f64,
    pub threshold: f64,
    /// `Re(λ_A^i) − γ^i λ²`; negative means the mode is pulled to consensus.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedConditionReport {
    pub lambda2: f64,
    pub modes: Vec<ModeVerdict>,
    /// False when some Jordan block mixes different gains.
    pub jordan_uniform: bool,
    pub policy: JordanPolicy,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwitchingConditionReport {
    pub lambda2_omega: f64,
    pub lambda_a1: f64,
    pub gamma1: f64,
    /// `Re(λ_A^1) − γ¹ λ²_Ω`.
    pub slack: f64,
    /// True when A has no unstable mode, so the condition says nothing.
    pub vacuous: bool,
    pub passed: bool,
}

/// Real part of the algebraic connectivity of `l`.
pub fn lambda2_re(l: &LaplacianMatrix) -> Result<f64, SynthError> {
    if l.order() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(spectral_summary(l)?.lambda2.re)
}

/// `min_j Re(λ²(L_j))` over a graph family.
pub fn lambda2_omega(family: &[LaplacianMatrix]) -> Result<f64, SynthError> {
    if family.is_empty() {
        return Err(SynthError::EmptyFamily);
    }
    family
        .iter()
        .map(lambda2_re)
        .try_fold(f64::INFINITY, |acc, v| Ok(acc.min(v?)))
}

fn check_margin(margin: f64) -> Result<(), SynthError> {
    if margin > 0.0 && margin.is_finite() {
        Ok(())
    } else {
        Err(SynthError::InvalidMargin(margin))
    }
}

fn threshold(re: f64, lambda2: f64) -> f64 {
    if lambda2 > LAMBDA2_FLOOR {
        re / lambda2
    } else if re < 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

fn mode_verdicts(gammas: &[f64], mf: &ModalForm, lambda2: f64) -> Result<Vec<ModeVerdict>, SynthError> {
    if gammas.len() != mf.order() {
        return Err(SynthError::Dimension(format!(
            "{} gains for {} modes",
            gammas.len(),
            mf.order()
        )));
    }
    Ok(mf
        .eigenvalues()
        .iter()
        .zip(gammas)
        .enumerate()
        .map(|(index, (lam, &gamma))| {
            let threshold = threshold(lam.re, lambda2);
            ModeVerdict {
                index,
                eigenvalue_re: lam.re,
                gamma,
                threshold,
                slack: lam.re - gamma * lambda2,
                passed: gamma > threshold,
            }
        })
        .collect())
}

fn jordan_uniform(gammas: &[f64], mf: &ModalForm) -> bool {
    mf.jordan_blocks().into_iter().flatten().all(|b| {
        let g = &gammas[b.start..b.start + b.size];
        g.iter().all(|x| *x == g[0])
    })
}

fn designed(mf: &ModalForm, lambda2: f64, margin: f64, per_mode: bool) -> GammaDesign {
    let r = mf.unstable_count();
    let lead = mf.eigenvalues().first().map_or(0.0, |v| v.re);
    let thresholds: Vec<f64> = mf.eigenvalues().iter().map(|v| threshold(v.re, lambda2)).collect();
    let gammas = (0..mf.order())
        .map(|i| {
            if i >= r {
                return 1.0;
            }
            let re = if per_mode { mf.eigenvalues()[i].re } else { lead };
            (re / lambda2).max(0.0) * (1.0 + margin) + margin
        })
        .collect();
    GammaDesign {
        gammas,
        thresholds,
        lambda2,
        margin,
    }
}

/// Per-mode gains strictly above `Re(λ_A^i)/Re(λ²)` for unstable modes; 1 for the rest.
pub fn design_gamma_fixed(
    mf: &ModalForm,
    l: &LaplacianMatrix,
    margin: f64,
) -> Result<GammaDesign, SynthError> {
    check_margin(margin)?;
    let lambda2 = lambda2_re(l)?;
    if !l.source().is_connected() || lambda2 <= LAMBDA2_FLOOR {
        return Err(SynthError::NoFeasibleGain(format!(
            "graph is not connected (λ² = {lambda2:e})"
        )));
    }
    Ok(designed(mf, lambda2, margin, true))
}

/// One gain shared by all unstable modes, strictly above `Re(λ_A^1)/λ²_Ω`.
pub fn design_gamma_uniform(
    mf: &ModalForm,
    family: &[LaplacianMatrix],
    margin: f64,
) -> Result<GammaDesign, SynthError> {
    check_margin(margin)?;
    if family.is_empty() {
        return Err(SynthError::EmptyFamily);
    }
    if let Some(index) = family.iter().position(|l| !l.source().is_connected()) {
        return Err(SynthError::DisconnectedMember { index });
    }
    let lambda2 = lambda2_omega(family)?;
    if lambda2 <= LAMBDA2_FLOOR {
        let index = family
            .iter()
            .position(|l| lambda2_re(l).map_or(true, |v| v <= LAMBDA2_FLOOR))
            .unwrap_or(0);
        return Err(SynthError::DisconnectedMember { index });
    }
    Ok(designed(mf, lambda2, margin, false))
}

/// Fixed-graph condition: `γ^i > Re(λ_A^i)/Re(λ²)` for every mode.
pub fn check_condition_fixed(
    gammas: &[f64],
    mf: &ModalForm,
    l: &LaplacianMatrix,
    policy: JordanPolicy,
) -> Result<FixedConditionReport, SynthError> {
    let lambda2 = lambda2_re(l)?;
    report(gammas, mf, lambda2, policy)
}

fn report(
    gammas: &[f64],
    mf: &ModalForm,
    lambda2: f64,
    policy: JordanPolicy,
) -> Result<FixedConditionReport, SynthError> {
    let modes = mode_verdicts(gammas, mf, lambda2)?;
    let uniform = jordan_uniform(gammas, mf);
    let passed = modes.iter().all(|m| m.passed) && (uniform || policy == JordanPolicy::Permissive);
    Ok(FixedConditionReport {
        lambda2,
        modes,
        jordan_uniform: uniform,
        policy,
        passed,
    })
}

/// Switching condition on the leading mode: `Re(λ_A^1) − γ¹ λ²_Ω < 0`.
pub fn check_condition_switching(
    gamma1: f64,
    mf: &ModalForm,
    family: &[LaplacianMatrix],
) -> Result<SwitchingConditionReport, SynthError> {
    let lambda2_omega = lambda2_omega(family)?;
    let lambda_a1 = mf.eigenvalues().first().map_or(0.0, |v| v.re);
    let slack = lambda_a1 - gamma1 * lambda2_omega;
    let vacuous = mf.unstable_count() == 0;
    Ok(SwitchingConditionReport {
        lambda2_omega,
        lambda_a1,
        gamma1,
        slack,
        vacuous,
        passed: vacuous || slack < 0.0,
    })
}

/// Per-mode form of the switching condition, with λ²_Ω in place of λ².
pub fn check_condition_switching_modes(
    gammas: &[f64],
    mf: &ModalForm,
    family: &[LaplacianMatrix],
    policy: JordanPolicy,
) -> Result<FixedConditionReport, SynthError> {
    report(gammas, mf, lambda2_omega(family)?, policy)
}

/// `Φ = Q diag(γ) Q⁻¹`.
pub fn phi_from_gamma(q: &DenseMatrix, gammas: &[f64]) -> Result<DenseMatrix, SynthError> {
    if !q.is_square() || q.rows() != gammas.len() {
        return Err(SynthError::Dimension(format!(
            "Q is {}x{} but {} gains were given",
            q.rows(),
            q.cols(),
            gammas.len()
        )));
    }
    let q_inv = Lu::factor(q)?.inverse();
    let mut qg = q.clone();
    for i in 0..q.rows() {
        for (j, g) in gammas.iter().enumerate() {
            qg[(i, j)] *= g;
        }
    }
    Ok(qg.matmul(&q_inv))
}

impl ModalForm {
    /// `Φ = Q diag(γ) Q⁻¹` for a possibly complex modal basis.
    pub fn phi(&self, gammas: &[f64]) -> Result<DenseMatrix, SynthError> {
        let n = self.order();
        if gammas.len() != n {
            return Err(SynthError::Dimension(format!("{} gains for {n} modes", gammas.len())));
        }
        let mut qg = self.q().clone();
        for i in 0..n {
            for (j, g) in gammas.iter().enumerate() {
                qg[(i, j)] *= Complex64::new(*g, 0.0);
            }
        }
        let phi: ComplexMatrix = qg.matmul(self.q_inv());
        if phi.max_imag() > 1e-9 * phi.max_abs().max(1.0) {
            return Err(SynthError::NonRealGain);
        }
        Ok(phi.real_part())
    }
}
