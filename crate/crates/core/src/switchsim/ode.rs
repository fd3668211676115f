use crate::numkit::{kron, DenseMatrix};
use crate::synth::{AgentModel, GainDesign, SynthError};

use super::trajectory::{consensus_error, Trajectory};
use super::{GraphFamily, Schedule, SimError, DIVERGENCE_LIMIT};

/// Samples of a piecewise-linear-system integration.
#[derive(Clone, Debug)]
pub struct LinearRun {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Sample index of every switch time followed by the horizon.
    pub switch_indices: Vec<usize>,
}

/// Default RK4 step: `min(ẖ/50, 1e-2)`.
pub fn default_step(schedule: &Schedule) -> f64 {
    (schedule.dwell_floor() / 50.0).min(1e-2)
}

fn rk4_step(m: &DenseMatrix, x: &[f64], h: f64) -> Vec<f64> {
    let k1 = m.matvec(x);
    let axpy = |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k2 = m.matvec(&axpy(&k1, h / 2.0));
    let k3 = m.matvec(&axpy(&k2, h / 2.0));
    let k4 = m.matvec(&axpy(&k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Fixed-step RK4 for `ẋ = M_σ(t) x`. Each dwell interval is split into equal
/// steps no longer than `step`, so switch times are grid points.
pub fn integrate_linear(
    mats: &[DenseMatrix],
    schedule: &Schedule,
    x0: &[f64],
    step: Option<f64>,
) -> Result<LinearRun, SimError> {
    schedule.check_modes(mats.len())?;
    if let Some(bad) = mats.iter().find(|m| m.rows() != x0.len() || m.cols() != x0.len()) {
        return Err(SimError::Dimension(format!(
            "system matrix is {}x{} but the state has {} entries",
            bad.rows(),
            bad.cols(),
            x0.len()
        )));
    }
    let limit = schedule.dwell_floor() / 10.0;
    let step = step.unwrap_or_else(|| default_step(schedule));
    if !(step > 0.0) || step > limit * (1.0 + 1e-12) {
        return Err(SimError::StepTooLarge { step, limit });
    }
    let mut times = vec![schedule.start()];
    let mut states = vec![x0.to_vec()];
    let mut switch_indices = vec![0];
    let mut x = x0.to_vec();
    for iv in schedule.intervals() {
        let m = &mats[iv.mode];
        let count = (iv.length() / step).ceil().max(1.0) as usize;
        let h = iv.length() / count as f64;
        for s in 1..=count {
            x = rk4_step(m, &x, h);
            let t = if s == count { iv.end } else { iv.start + s as f64 * h };
            if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
                return Err(SimError::Divergence { time: t });
            }
            times.push(t);
            states.push(x.clone());
        }
        switch_indices.push(times.len() - 1);
    }
    Ok(LinearRun {
        times,
        states,
        switch_indices,
    })
}

/// `ż = (I ⊗ A − L ⊗ Φ) z` with agent-major stacking.
pub fn z_loop_matrix(a: &DenseMatrix, phi: &DenseMatrix, l: &DenseMatrix) -> Result<DenseMatrix, SimError> {
    let m = l.rows();
    Ok(&kron(&DenseMatrix::identity(m), a)? - &kron(l, phi)?)
}

/// Closed loop in `[w; η]`:
/// `ẇ = (I⊗A)w + (I⊗BK)η`, `η̇ = (I⊗(A+BK))η + (L⊗Φ)(w − η)`.
pub fn compensator_loop_matrix(
    a: &DenseMatrix,
    bk: &DenseMatrix,
    phi: &DenseMatrix,
    l: &DenseMatrix,
) -> Result<DenseMatrix, SimError> {
    let m = l.rows();
    let id = DenseMatrix::identity(m);
    let lphi = kron(l, phi)?;
    let blocks = [
        [kron(&id, a)?, kron(&id, bk)?],
        [lphi.clone(), &kron(&id, &(a + bk))? - &lphi],
    ];
    Ok(assemble(&blocks))
}

/// Closed loop in `[w; w̃; η]` with the observer
/// `w̃̇ = Aw̃ + BKη + HC(w̃ − w)` driving the compensator.
pub fn observer_loop_matrix(
    a: &DenseMatrix,
    bk: &DenseMatrix,
    hc: &DenseMatrix,
    phi: &DenseMatrix,
    l: &DenseMatrix,
) -> Result<DenseMatrix, SimError> {
    let m = l.rows();
    let id = DenseMatrix::identity(m);
    let n = a.rows();
    let zero = DenseMatrix::zeros(n * m, n * m);
    let lphi = kron(l, phi)?;
    let ihc = kron(&id, hc)?;
    let blocks = [
        [kron(&id, a)?, zero.clone(), kron(&id, bk)?],
        [ihc.scale(-1.0), &kron(&id, a)? + &ihc, kron(&id, bk)?],
        [zero, lphi.clone(), &kron(&id, &(a + bk))? - &lphi],
    ];
    Ok(assemble(&blocks))
}

fn assemble<const R: usize, const C: usize>(blocks: &[[DenseMatrix; C]; R]) -> DenseMatrix {
    let bs = blocks[0][0].rows();
    let mut out = DenseMatrix::zeros(R * bs, C * bs);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            for i in 0..bs {
                for j in 0..bs {
                    out[(bi * bs + i, bj * bs + j)] = blk[(i, j)];
                }
            }
        }
    }
    out
}

fn check_agents(name: &str, x: &DenseMatrix, m: usize, n: usize) -> Result<(), SimError> {
    if x.rows() != m || x.cols() != n {
        return Err(SimError::Dimension(format!(
            "{name} must be {m}x{n} (agent per row), got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn slice_block(states: &[Vec<f64>], block: usize, m: usize, n: usize) -> Vec<DenseMatrix> {
    let off = block * m * n;
    states
        .iter()
        .map(|s| DenseMatrix::from_row_slice(m, n, &s[off..off + m * n]).expect("block shape"))
        .collect()
}

fn mode_matrices<F>(family: &GraphFamily, build: F) -> Result<Vec<DenseMatrix>, SimError>
where
    F: Fn(&DenseMatrix) -> Result<DenseMatrix, SimError>,
{
    family.members().iter().map(|l| build(l.matrix())).collect()
}

/// Integrates the z-coordinate dynamics `żᵢ = A zᵢ + Φ Σⱼ αᵢⱼ (zⱼ − zᵢ)`.
pub fn simulate_z_loop(
    a: &DenseMatrix,
    phi: &DenseMatrix,
    family: &GraphFamily,
    schedule: &Schedule,
    z0: &DenseMatrix,
    step: Option<f64>,
) -> Result<Trajectory, SimError> {
    let (m, n) = (family.agent_count(), a.rows());
    check_agents("z0", z0, m, n)?;
    let mats = mode_matrices(family, |l| z_loop_matrix(a, phi, l))?;
    let run = integrate_linear(&mats, schedule, z0.as_slice(), step)?;
    let agents = slice_block(&run.states, 0, m, n);
    Ok(Trajectory {
        error_series: consensus_error(&agents),
        times: run.times,
        agent_states: agents,
        compensator_states: None,
        observer_states: None,
        switch_sample_indices: run.switch_indices,
    })
}

/// Integrates the full agent/compensator loop with `uᵢ = K ηᵢ`.
pub fn simulate_compensator_loop(
    model: &AgentModel,
    design: &GainDesign,
    family: &GraphFamily,
    schedule: &Schedule,
    w0: &DenseMatrix,
    eta0: &DenseMatrix,
    step: Option<f64>,
) -> Result<Trajectory, SimError> {
    let (m, n) = (family.agent_count(), model.n());
    check_agents("w0", w0, m, n)?;
    check_agents("eta0", eta0, m, n)?;
    let bk = model.b().matmul(&design.k);
    let mats = mode_matrices(family, |l| compensator_loop_matrix(model.a(), &bk, &design.phi, l))?;
    let x0: Vec<f64> = w0.as_slice().iter().chain(eta0.as_slice()).copied().collect();
    let run = integrate_linear(&mats, schedule, &x0, step)?;
    let agents = slice_block(&run.states, 0, m, n);
    Ok(Trajectory {
        error_series: consensus_error(&agents),
        times: run.times,
        agent_states: agents,
        compensator_states: Some(slice_block(&run.states, 1, m, n)),
        observer_states: None,
        switch_sample_indices: run.switch_indices,
    })
}

/// Integrates the observer-based loop; needs C in the model and H in the design.
#[allow(clippy::too_many_arguments)]
pub fn simulate_observer_loop(
    model: &AgentModel,
    design: &GainDesign,
    family: &GraphFamily,
    schedule: &Schedule,
    w0: &DenseMatrix,
    wtilde0: &DenseMatrix,
    eta0: &DenseMatrix,
    step: Option<f64>,
) -> Result<Trajectory, SimError> {
    let c = model.c().ok_or(SynthError::MissingOutputMatrix)?;
    let h = design
        .h
        .as_ref()
        .ok_or_else(|| SimError::NotAvailable("observer loop needs an observer gain H".into()))?;
    let (m, n) = (family.agent_count(), model.n());
    check_agents("w0", w0, m, n)?;
    check_agents("wtilde0", wtilde0, m, n)?;
    check_agents("eta0", eta0, m, n)?;
    let bk = model.b().matmul(&design.k);
    let hc = h.matmul(c);
    let mats = mode_matrices(family, |l| observer_loop_matrix(model.a(), &bk, &hc, &design.phi, l))?;
    let x0: Vec<f64> = w0
        .as_slice()
        .iter()
        .chain(wtilde0.as_slice())
        .chain(eta0.as_slice())
        .copied()
        .collect();
    let run = integrate_linear(&mats, schedule, &x0, step)?;
    let agents = slice_block(&run.states, 0, m, n);
    Ok(Trajectory {
        error_series: consensus_error(&agents),
        times: run.times,
        agent_states: agents,
        observer_states: Some(slice_block(&run.states, 1, m, n)),
        compensator_states: Some(slice_block(&run.states, 2, m, n)),
        switch_sample_indices: run.switch_indices,
    })
}
