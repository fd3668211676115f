use num_complex::Complex64;

use crate::numkit::{eig, expm, vec_norm, ComplexMatrix, DenseMatrix};
use crate::switchsim::{propagate_modal_closed_form, GraphFamily, Schedule};

use super::{scalar_modal, VerifyError};

/// Contraction data for one dwell interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalFactor {
    pub start: f64,
    pub h: f64,
    pub mode: usize,
    /// Spectral norm of `B(k) = W(k) − 1̂ξ_kᵀ` (equal to `D(k)` when undirected).
    pub norm: f64,
    pub frobenius: f64,
    /// `e^{λ_A h}‖B(k)‖`.
    pub scaled: f64,
    /// `e^{−γλ²h}`, the exact value of `‖D(k)‖` for an undirected graph.
    pub predicted: Option<f64>,
    /// `Σ_{i≥2} ‖qᵢpᵢᵀ‖ e^{−(γ Re λⁱ − λ_A)h}`; `None` when L is near-defective.
    pub eigen_bound: Option<f64>,
}

/// Least-squares fit `δ(t) ≈ δ₀ e^{−μt}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub prefactor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub per_interval: Vec<IntervalFactor>,
    /// Running products `Π e^{λ_A h_j}‖B(j)‖` after each interval.
    pub product_bound: Vec<f64>,
    /// `e^{−(γ¹λ²_Ω − λ_A)(t_{k+1} − t_0)}` after each interval (undirected only).
    pub omega_bound: Option<Vec<f64>>,
    /// Interval end times.
    pub times: Vec<f64>,
    /// `‖x¹(t_{k+1}) − e^{λ_A T} 1̂ ξ̄_kᵀ x¹(t_0)‖`.
    pub observed: Vec<f64>,
    /// Resolution of `observed`: a few ulps of the propagated state's magnitude.
    pub rounding_floor: Vec<f64>,
    pub initial_norm: f64,
    /// Worst residual of the product identities `ΠW = ΠB + 1̂ξ̄ᵀ` and, when
    /// undirected, `(D' + 1̂1̂ᵀ)(D + 1̂1̂ᵀ) = D'D + 1̂1̂ᵀ`.
    pub telescoping_residual: f64,
    /// ξ̄_k after each interval.
    pub consensus_direction: Vec<Vec<f64>>,
    pub fit: Option<ExpFit>,
    /// False when some graph was too close to defective for the eigen bound.
    pub bound_available: bool,
}

impl ContractionReport {
    /// True when every observed deviation lies under the running product bound
    /// (and the λ²_Ω bound, when present), up to a relative slack plus the
    /// rounding floor.
    pub fn bound_satisfied(&self, rel_tol: f64) -> bool {
        let scale = self.initial_norm * (1.0 + rel_tol);
        let under = |bounds: &[f64]| {
            self.observed
                .iter()
                .zip(bounds)
                .zip(&self.rounding_floor)
                .all(|((o, b), f)| *o <= b * scale + f)
        };
        under(&self.product_bound) && self.omega_bound.as_deref().map_or(true, under)
    }
}

/// Fits `ln δ = ln δ₀ − μt` over the strictly positive samples.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Option<ExpFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(ExpFit {
        rate: -slope,
        prefactor: (my - slope * mt).exp(),
    })
}

fn outer(u: &[f64], v: &[f64]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(u.len(), v.len());
    for (i, a) in u.iter().enumerate() {
        for (j, b) in v.iter().enumerate() {
            out[(i, j)] = a * b;
        }
    }
    out
}

fn eigen_bound(l: &DenseMatrix, gamma: f64, lambda_a: f64, h: f64) -> Option<f64> {
    let e = eig(l).ok()?;
    if e.is_defective() {
        return None;
    }
    let zero = (0..e.order()).min_by(|&a, &b| e.values[a].norm().total_cmp(&e.values[b].norm()))?;
    let norm = |v: Vec<Complex64>| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    Some(
        (0..e.order())
            .filter(|&i| i != zero)
            .map(|i| {
                norm(e.right_vector(i))
                    * norm(e.left_vector(i))
                    * (-(gamma * e.values[i].re - lambda_a) * h).exp()
            })
            .sum(),
    )
}

fn contraction(
    family: &GraphFamily,
    schedule: &Schedule,
    gamma1: f64,
    lambda_a1: f64,
    x0: &[f64],
    undirected: bool,
) -> Result<ContractionReport, VerifyError> {
    let m = family.agent_count();
    if x0.len() != m {
        return Err(VerifyError::Dimension(format!(
            "x¹(t₀) has {} entries for {m} agents",
            x0.len()
        )));
    }
    let mf = scalar_modal(lambda_a1)?;
    let x0m = ComplexMatrix::from_real(&DenseMatrix::from_row_slice(1, m, x0)?);
    let traj = propagate_modal_closed_form(&mf, &[gamma1], family, schedule, &x0m)?;

    let one_hat = vec![1.0 / (m as f64).sqrt(); m];
    let xi_of = |mode: usize| -> Vec<f64> {
        if undirected {
            one_hat.clone()
        } else {
            let s = (m as f64).sqrt();
            family.summary(mode).left1.iter().map(|v| v * s).collect()
        }
    };
    let t0 = schedule.start();
    let mut per_interval = Vec::new();
    let mut product_bound = Vec::new();
    let mut omega = Vec::new();
    let mut times = Vec::new();
    let mut observed = Vec::new();
    let mut rounding_floor = Vec::new();
    let mut directions = Vec::new();
    let mut residual: f64 = 0.0;
    let mut bound_available = true;

    let mut w_prod = DenseMatrix::identity(m);
    let mut b_prod = DenseMatrix::identity(m);
    let mut xi_bar = vec![0.0; m];
    let mut running = 1.0;
    let mut prev_b: Option<DenseMatrix> = None;
    let proj = outer(&one_hat, &one_hat);

    for (k, iv) in schedule.intervals().iter().enumerate() {
        let l = family.member(iv.mode);
        let h = iv.length();
        let w = expm(l.matrix(), -gamma1 * h)?;
        let xi = xi_of(iv.mode);
        let b = &w - &outer(&one_hat, &xi);

        // ξ̄_k = ξ̄_{k−1} + ξ_kᵀ B(k−1)…B(0)
        for (acc, v) in xi_bar.iter_mut().zip(b_prod.vecmat(&xi)) {
            *acc += v;
        }
        b_prod = b.matmul(&b_prod);
        w_prod = w.matmul(&w_prod);
        let split = &b_prod + &outer(&one_hat, &xi_bar);
        residual = residual.max(w_prod.max_abs_diff(&split));
        if undirected {
            if let Some(pb) = &prev_b {
                let lhs = (&b + &proj).matmul(&(pb + &proj));
                let rhs = &b.matmul(pb) + &proj;
                residual = residual.max(lhs.max_abs_diff(&rhs));
            }
        }

        let norm = b.norm_two();
        let scaled = (lambda_a1 * h).exp() * norm;
        running *= scaled;
        let eb = eigen_bound(l.matrix(), gamma1, lambda_a1, h);
        bound_available &= eb.is_some();
        per_interval.push(IntervalFactor {
            start: iv.start,
            h,
            mode: iv.mode,
            norm,
            frobenius: b.norm_frobenius(),
            scaled,
            predicted: undirected.then(|| (-gamma1 * family.lambda2(iv.mode) * h).exp()),
            eigen_bound: eb,
        });
        product_bound.push(running);

        let t = iv.end - t0;
        times.push(iv.end);
        omega.push((-(gamma1 * family.lambda2_min() - lambda_a1) * t).exp());
        let target = (lambda_a1 * t).exp() * xi_bar.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>();
        let x = traj.states[k + 1].row(0);
        let dev: Vec<f64> = x.iter().zip(&one_hat).map(|(xv, u)| xv.re - target * u).collect();
        observed.push(vec_norm(&dev));
        let size = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        rounding_floor.push(64.0 * f64::EPSILON * size * (m as f64).sqrt() * (k + 1) as f64);
        directions.push(xi_bar.clone());
        prev_b = Some(b);
    }
    Ok(ContractionReport {
        fit: fit_exponential(&times, &observed),
        per_interval,
        product_bound,
        omega_bound: undirected.then_some(omega),
        times,
        observed,
        rounding_floor,
        initial_norm: vec_norm(x0),
        telescoping_residual: residual,
        consensus_direction: directions,
        bound_available,
    })
}

/// Certificate for a switching family of undirected graphs.
pub fn contraction_undirected(
    family: &GraphFamily,
    schedule: &Schedule,
    gamma1: f64,
    lambda_a1: f64,
    x0: &[f64],
) -> Result<ContractionReport, VerifyError> {
    if !family.all_undirected() {
        return Err(VerifyError::NotApplicable("family has directed members".into()));
    }
    contraction(family, schedule, gamma1, lambda_a1, x0, true)
}

/// Certificate for a switching family of directed graphs.
pub fn contraction_directed(
    family: &GraphFamily,
    schedule: &Schedule,
    gamma1: f64,
    lambda_a1: f64,
    x0: &[f64],
) -> Result<ContractionReport, VerifyError> {
    contraction(family, schedule, gamma1, lambda_a1, x0, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{laplacian_of, Digraph, DEFAULT_ALPHA_FLOOR};
    use crate::switchsim::generate_schedule;

    fn undirected(m: usize, e: &[(usize, usize, f64)]) -> crate::netgraph::LaplacianMatrix {
        laplacian_of(&Digraph::undirected(m, e, DEFAULT_ALPHA_FLOOR).unwrap())
    }

    fn cycle3() -> crate::netgraph::LaplacianMatrix {
        laplacian_of(&Digraph::directed(3, &[(0, 1, 1.0), (1, 2, 0.5), (2, 0, 2.0)], DEFAULT_ALPHA_FLOOR).unwrap())
    }

    #[test]
    fn two_node_single_interval() {
        let (alpha, gamma, h) = (0.3, 1.2, 0.9);
        let fam = GraphFamily::new(vec![undirected(2, &[(0, 1, alpha)])]).unwrap();
        let sched = Schedule::constant(0, h).unwrap();
        let r = contraction_undirected(&fam, &sched, gamma, 0.0, &[1.0, -0.5]).unwrap();
        let want = (-2.0 * gamma * alpha * h).exp();
        assert!((r.per_interval[0].norm - want).abs() < 1e-12);
        assert!((r.per_interval[0].predicted.unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn repeated_graph_multiplies_factors() {
        let l = undirected(3, &[(0, 1, 1.0), (1, 2, 0.6)]);
        let fam = GraphFamily::new(vec![l]).unwrap();
        let sched = Schedule::new(vec![0.0, 0.5, 1.2, 2.0], vec![0; 4], None, 2.6).unwrap();
        let r = contraction_undirected(&fam, &sched, 1.5, 0.0, &[1.0, 0.0, -2.0]).unwrap();
        let want = (-1.5 * fam.lambda2(0) * 2.6).exp();
        assert!((r.product_bound.last().unwrap() - want).abs() < 1e-12);
        for f in &r.per_interval {
            assert!((f.norm - f.predicted.unwrap()).abs() < 1e-9);
        }
        assert!(r.telescoping_residual < 1e-12);
    }

    #[test]
    fn switching_run_respects_bounds() {
        let fam = GraphFamily::new(vec![
            undirected(4, &[(0, 1, 0.1892), (1, 2, 0.7206), (2, 3, 1.1249)]),
            undirected(4, &[(3, 0, 0.1293), (1, 2, 1.0800), (2, 3, 0.6605)]),
            undirected(4, &[(3, 0, 0.1849), (0, 1, 0.5128), (2, 3, 0.2971)]),
            undirected(4, &[(3, 0, 0.6394), (0, 1, 0.5368), (1, 2, 0.4256)]),
        ])
        .unwrap();
        let sched = generate_schedule(11, 4, 0.5, 1.0, 30.0).unwrap();
        let r = contraction_undirected(&fam, &sched, 2.5, 0.1, &[6.0, -12.0, -17.0, 18.0]).unwrap();
        assert!(r.bound_satisfied(1e-9));
        assert!(r.telescoping_residual < 1e-10);
        let fit = r.fit.unwrap();
        assert!(fit.rate >= 0.9 * (2.5 * fam.lambda2_min() - 0.1));
    }

    #[test]
    fn undirected_input_to_directed_certificate() {
        let fam = GraphFamily::new(vec![undirected(3, &[(0, 1, 1.0), (1, 2, 0.5)])]).unwrap();
        let sched = Schedule::constant(0, 1.0).unwrap();
        let x0 = [1.0, 2.0, 0.0];
        let d = contraction_directed(&fam, &sched, 1.0, 0.0, &x0).unwrap();
        let u = contraction_undirected(&fam, &sched, 1.0, 0.0, &x0).unwrap();
        assert!((d.per_interval[0].norm - u.per_interval[0].norm).abs() < 1e-10);
        let s = 1.0 / 3f64.sqrt();
        for v in &d.consensus_direction[0] {
            assert!((v - s).abs() < 1e-10);
        }
    }

    #[test]
    fn directed_norms_shrink_with_gain() {
        let fam = GraphFamily::new(vec![cycle3()]).unwrap();
        let sched = Schedule::constant(0, 0.5).unwrap();
        let norms: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|g| contraction_directed(&fam, &sched, *g, 0.0, &[1.0, 0.0, 0.0]).unwrap().per_interval[0].norm)
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn directed_switching_deviation_under_product() {
        let other = laplacian_of(&Digraph::directed(3, &[(0, 2, 1.0), (2, 1, 1.0), (1, 0, 0.7)], DEFAULT_ALPHA_FLOOR).unwrap());
        let fam = GraphFamily::new(vec![cycle3(), other]).unwrap();
        let sched = generate_schedule(5, 2, 0.5, 1.0, 8.0).unwrap();
        let r = contraction_directed(&fam, &sched, 3.0, 0.2, &[1.0, -2.0, 0.5]).unwrap();
        assert!(r.bound_available);
        assert!(r.telescoping_residual < 1e-10);
        assert!(r.bound_satisfied(1e-9));
        for f in &r.per_interval {
            assert!(f.scaled <= f.eigen_bound.unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * (-0.7 * x).exp()).collect();
        let f = fit_exponential(&t, &v).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-10);
    }
}
