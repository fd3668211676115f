use num_complex::Complex64;

use crate::numkit::{expm, kron, ComplexMatrix, DenseMatrix};
use crate::synth::ModalForm;

use super::{GraphFamily, Schedule, SimError};

/// Modal states `x̂` (n x m, row i = block `xⁱ`) at the schedule's switch times
/// and at the horizon.
#[derive(Clone, Debug)]
pub struct ModalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
}

impl ModalTrajectory {
    /// Agent coordinates `z` (m x n) at every stored time.
    pub fn agent_states(&self, mf: &ModalForm) -> Vec<DenseMatrix> {
        self.states.iter().map(|x| mf.from_modal(x)).collect()
    }

    pub fn last(&self) -> &ComplexMatrix {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn factorial(q: usize) -> f64 {
    (1..=q).map(|v| v as f64).product()
}

fn real_matvec(p: &DenseMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..p.rows())
        .map(|i| p.row(i).iter().zip(x).map(|(a, b)| b * a).sum())
        .collect()
}

/// Exact propagation of `ẋ̂ = (S ⊗ I_m − Γ ⊗ L_σ(t)) x̂` at switch times.
///
/// Within a block of S sharing one gain, `λI + N` commutes with `γ L`, so over
/// a dwell interval of length h with `W = exp(−γ L h)` a Jordan block of order
/// s moves as `x^{p} ← e^{λh} Σ_q h^q/q! W x^{p+q}` (a diagonal mode is s = 1).
/// Composing intervals gives the cumulative form `e^{λT} Σ_q T^q/q! W(k)…W(0)`;
/// stepping interval by interval keeps full relative precision on the
/// disagreement even when it is far smaller than the consensus component.
/// A Jordan block carrying unequal gains has no such factorization and is
/// stepped with the exponential of its own Kronecker block instead.
pub fn propagate_modal_closed_form(
    mf: &ModalForm,
    gammas: &[f64],
    family: &GraphFamily,
    schedule: &Schedule,
    x0: &ComplexMatrix,
) -> Result<ModalTrajectory, SimError> {
    let n = mf.order();
    let m = family.agent_count();
    if gammas.len() != n {
        return Err(SimError::Dimension(format!("{} gains for {n} modes", gammas.len())));
    }
    if x0.rows() != n || x0.cols() != m {
        return Err(SimError::Dimension(format!(
            "initial modal state must be {n}x{m}, got {}x{}",
            x0.rows(),
            x0.cols()
        )));
    }
    schedule.check_modes(family.len())?;
    let intervals = schedule.intervals();
    let t0 = schedule.start();
    let mut times = vec![t0];
    times.extend(intervals.iter().map(|iv| iv.end));
    let mut states = vec![x0.clone(); times.len()];

    for (st, sz) in mf.block_partition() {
        let lambda = mf.eigenvalues()[st];
        let g = &gammas[st..st + sz];
        if g.iter().all(|v| *v == g[0]) {
            let gamma = g[0];
            for (k, iv) in intervals.iter().enumerate() {
                let h = iv.length();
                let w = expm(family.member(iv.mode).matrix(), -gamma * h)?;
                let growth = (lambda * h).exp();
                let moved: Vec<Vec<Complex64>> =
                    (st..st + sz).map(|i| real_matvec(&w, states[k].row(i))).collect();
                for pi in 0..sz {
                    let row = states[k + 1].row_mut(st + pi);
                    row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                    for q in 0..sz - pi {
                        let c = growth * (h.powi(q as i32) / factorial(q));
                        for (r, mv) in row.iter_mut().zip(&moved[pi + q]) {
                            *r += c * mv;
                        }
                    }
                }
            }
        } else {
            // unequal gains inside a Jordan block: exponentiate the block system
            if lambda.im != 0.0 {
                return Err(SimError::NotAvailable(
                    "unequal gains on a complex Jordan block".into(),
                ));
            }
            let mut j = DenseMatrix::from_diag(&vec![lambda.re; sz]);
            for k in 0..sz - 1 {
                j[(k, k + 1)] = 1.0;
            }
            let gmat = DenseMatrix::from_diag(g);
            let mut x: Vec<f64> = (st..st + sz).flat_map(|i| x0.row(i).iter().map(|v| v.re)).collect();
            for (k, iv) in intervals.iter().enumerate() {
                let gen = &kron(&j, &DenseMatrix::identity(m))? - &kron(&gmat, family.member(iv.mode).matrix())?;
                x = expm(&gen, iv.length())?.matvec(&x);
                for pi in 0..sz {
                    let row = states[k + 1].row_mut(st + pi);
                    for (c, r) in row.iter_mut().enumerate() {
                        *r = Complex64::new(x[pi * m + c], 0.0);
                    }
                }
            }
        }
    }
    if states.iter().any(|s| s.as_slice().iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        let time = times
            .iter()
            .zip(&states)
            .find(|(_, s)| s.as_slice().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()))
            .map_or(f64::NAN, |(t, _)| *t);
        return Err(SimError::Divergence { time });
    }
    Ok(ModalTrajectory { times, states })
}
