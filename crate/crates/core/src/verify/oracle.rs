use crate::numkit::{expm, kron, DenseMatrix};
use crate::switchsim::{propagate_modal_closed_form, simulate_z_loop, spread, GraphFamily, Schedule};
use crate::synth::{modal_decompose, AgentModel};

use super::VerifyError;

/// Largest `n·m` the brute-force oracle accepts.
pub const ORACLE_MAX_ORDER: usize = 60;

/// States of the stacked modal system `x̂` (mode-major: entry `i·m + j` is
/// mode i of agent j) at switch times and the horizon.
#[derive(Clone, Debug)]
pub struct KroneckerRun {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl KroneckerRun {
    /// State `k` as an n x m matrix (row per mode).
    pub fn modal_matrix(&self, k: usize, n: usize) -> DenseMatrix {
        let m = self.states[k].len() / n;
        DenseMatrix::from_row_slice(n, m, &self.states[k]).expect("stacked state shape")
    }
}

/// `S ⊗ I_m − Γ ⊗ L`.
pub fn kronecker_generator(
    s: &DenseMatrix,
    gamma: &DenseMatrix,
    l: &DenseMatrix,
) -> Result<DenseMatrix, VerifyError> {
    Ok(&kron(s, &DenseMatrix::identity(l.rows()))? - &kron(gamma, l)?)
}

/// Propagates `ẋ̂ = (S ⊗ I − Γ ⊗ L_σ) x̂` with one exponential of the full
/// generator per interval.
pub fn oracle_full_kronecker(
    s: &DenseMatrix,
    gamma: &DenseMatrix,
    family: &GraphFamily,
    schedule: &Schedule,
    x0: &[f64],
) -> Result<KroneckerRun, VerifyError> {
    let n = s.rows();
    let m = family.agent_count();
    let order = n * m;
    if order > ORACLE_MAX_ORDER {
        return Err(VerifyError::TooLarge {
            order,
            limit: ORACLE_MAX_ORDER,
        });
    }
    if !s.is_square() || gamma.rows() != n || gamma.cols() != n || x0.len() != order {
        return Err(VerifyError::Dimension(format!(
            "S {}x{}, Γ {}x{}, x0 of length {} for {m} agents",
            s.rows(),
            s.cols(),
            gamma.rows(),
            gamma.cols(),
            x0.len()
        )));
    }
    schedule.check_modes(family.len())?;
    let gens = family
        .members()
        .iter()
        .map(|l| kronecker_generator(s, gamma, l.matrix()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut times = vec![schedule.start()];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for iv in schedule.intervals() {
        x = expm(&gens[iv.mode], iv.length())?.matvec(&x);
        times.push(iv.end);
        states.push(x.clone());
    }
    Ok(KroneckerRun { times, states })
}

/// Agreement of the three engines on a Jordan-coupled network, plus decay.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanReductionReport {
    /// Max relative gap between the block formula and the Kronecker oracle.
    pub closed_vs_oracle: f64,
    /// Max relative gap between the block formula and RK4.
    pub closed_vs_ode: f64,
    /// Spread across agents (max over modes) at each switch time.
    pub deviations: Vec<f64>,
    pub initial_deviation: f64,
    pub final_deviation: f64,
    /// `γ · min Re λ² > λ`, the scalar condition the reduction relies on.
    pub scalar_condition_holds: bool,
}

impl JordanReductionReport {
    pub fn passed(&self, engine_tol: f64, ode_tol: f64, final_tol: f64) -> bool {
        self.closed_vs_oracle < engine_tol
            && self.closed_vs_ode < ode_tol
            && (!self.scalar_condition_holds || self.final_deviation < final_tol)
    }
}

fn rel_gap(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

/// Runs `ẋᵢ = J xᵢ + γ Σⱼ αᵢⱼ (xⱼ − xᵢ)` with `J = λI + N` of order
/// `n_jordan` through the block formula, the Kronecker oracle and RK4.
/// `x0` is `n_jordan x m` (row per mode).
pub fn jordan_reduction_check(
    lambda: f64,
    n_jordan: usize,
    gamma: f64,
    family: &GraphFamily,
    schedule: &Schedule,
    x0: &DenseMatrix,
    step: Option<f64>,
) -> Result<JordanReductionReport, VerifyError> {
    let m = family.agent_count();
    if n_jordan < 1 || x0.rows() != n_jordan || x0.cols() != m {
        return Err(VerifyError::Dimension(format!(
            "x0 must be {n_jordan}x{m}, got {}x{}",
            x0.rows(),
            x0.cols()
        )));
    }
    let mut j = DenseMatrix::from_diag(&vec![lambda; n_jordan]);
    for k in 0..n_jordan - 1 {
        j[(k, k + 1)] = 1.0;
    }
    let model = AgentModel::new(j.clone(), DenseMatrix::zeros(n_jordan, 1), None)?;
    let mf = modal_decompose(&model, Some(&DenseMatrix::identity(n_jordan)))?;
    let gammas = vec![gamma; n_jordan];
    let closed = propagate_modal_closed_form(
        &mf,
        &gammas,
        family,
        schedule,
        &crate::numkit::ComplexMatrix::from_real(x0),
    )?;
    let oracle = oracle_full_kronecker(
        &j,
        &DenseMatrix::identity(n_jordan).scale(gamma),
        family,
        schedule,
        x0.as_slice(),
    )?;
    let ode = simulate_z_loop(
        &j,
        &DenseMatrix::identity(n_jordan).scale(gamma),
        family,
        schedule,
        &x0.transpose(),
        step,
    )?;

    let mut closed_vs_oracle: f64 = 0.0;
    let mut closed_vs_ode: f64 = 0.0;
    let mut deviations = Vec::new();
    for (k, state) in closed.states.iter().enumerate() {
        let c = state.real_part();
        closed_vs_oracle = closed_vs_oracle.max(rel_gap(&c, &oracle.modal_matrix(k, n_jordan)));
        let z = &ode.agent_states[ode.switch_sample_indices[k]];
        closed_vs_ode = closed_vs_ode.max(rel_gap(&c, &z.transpose()));
        deviations.push(spread(&c.transpose()));
    }
    Ok(JordanReductionReport {
        closed_vs_oracle,
        closed_vs_ode,
        initial_deviation: deviations[0],
        final_deviation: *deviations.last().unwrap(),
        deviations,
        scalar_condition_holds: gamma * family.lambda2_min() > lambda,
    })
}
