use std::path::{Path, PathBuf};

use crate::numkit::{vec_norm, DenseMatrix};
use crate::switchsim::{
    propagate_modal_closed_form, simulate_compensator_loop, simulate_observer_loop,
    simulate_z_loop, GraphFamily, SimError, Trajectory,
};
use crate::synth::{
    check_condition_fixed, check_condition_switching, check_condition_switching_modes,
    lambda2_omega, static_gain_controller, validate_h, validate_k, JordanPolicy,
};
use crate::verify::{
    boundary_counterexample, check_doubly_stochastic, contraction_directed,
    contraction_undirected, fit_exponential, oracle_full_kronecker, ContractionReport,
    ORACLE_MAX_ORDER,
};

use super::config::{Engine, Experiment, ExperimentConfig};
use super::output::{
    ensure_dir, fmt_matrix, fmt_vec, write_error_csv, write_sigma_csv, write_states_csv,
    write_table, write_trajectory_csv, Summary,
};
use super::CliError;

/// Built-in four-agent switching example.
pub const EXAMPLE_CONFIG: &str = include_str!("../../configs/switching_example.toml");

/// Φ the example's Q and Γ must produce.
const EXAMPLE_PHI: [[f64; 2]; 2] = [[6.5, -5.0], [4.0, -2.5]];

pub fn builtin_example() -> ExperimentConfig {
    ExperimentConfig::from_toml(EXAMPLE_CONFIG).expect("built-in example config parses")
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    /// Process exit code (0, or 3 when a synthesized condition fails).
    pub code: i32,
}

fn policy_name(p: JordanPolicy) -> &'static str {
    match p {
        JordanPolicy::Strict => "strict",
        JordanPolicy::Permissive => "permissive",
    }
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Modal => "modal",
        Engine::Ode => "ode",
        Engine::Both => "both",
    }
}

fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::Divergence { .. } => CliError::Divergence(e.to_string()),
        SimError::StepTooLarge { .. } | SimError::Schedule(_) | SimError::Dimension(_) => {
            CliError::Config(format!("run: {e}"))
        }
        other => CliError::Failure(other.to_string()),
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn check_connected(family: &GraphFamily) -> Result<(), CliError> {
    for (idx, l) in family.members().iter().enumerate() {
        if !l.source().is_connected() {
            return Err(CliError::Infeasible(format!(
                "network.graphs[{}] is not connected",
                idx + 1
            )));
        }
    }
    Ok(())
}

/// Modal structure, gains and condition verdicts.
pub fn cmd_synth(exp: &Experiment, out: Option<&Path>) -> Result<Outcome, CliError> {
    check_connected(&exp.family)?;
    let mf = &exp.modal;
    let gamma = &exp.design.gamma;
    let mut s = Summary::default();
    s.push("command", "synth");
    s.push("n", mf.order());
    s.push("agents", exp.family.agent_count());
    s.push("graphs", exp.family.len());
    let re: Vec<f64> = mf.eigenvalues().iter().map(|v| v.re).collect();
    let im: Vec<f64> = mf.eigenvalues().iter().map(|v| v.im).collect();
    s.push("eigenvalues_re", fmt_vec(&re));
    s.push("eigenvalues_im", fmt_vec(&im));
    s.push("unstable_modes", mf.unstable_count());
    s.push("reduction_residual", mf.reduction_residual());
    let blocks: Vec<String> = mf
        .jordan_blocks()
        .into_iter()
        .flatten()
        .map(|b| format!("{}x{}@{}", b.size, b.size, b.eigenvalue))
        .collect();
    s.push("jordan_blocks", format!("[{}]", blocks.join(";")));
    if let Some(q) = mf.real_q() {
        s.push("q", fmt_matrix(&q));
    }

    let lambda2: Vec<f64> = (0..exp.family.len()).map(|j| exp.family.lambda2(j)).collect();
    s.push("lambda2", fmt_vec(&lambda2));
    let l2o = lambda2_omega(exp.family.members()).map_err(fail)?;
    s.push("lambda2_omega", l2o);
    s.push("policy", policy_name(exp.policy));
    s.push("gamma", fmt_vec(gamma));
    s.push("margin", exp.design.margin);
    s.push("phi", fmt_matrix(&exp.design.phi));

    let modes = check_condition_switching_modes(gamma, mf, exp.family.members(), exp.policy).map_err(fail)?;
    let thresholds: Vec<f64> = modes.modes.iter().map(|m| m.threshold).collect();
    let slacks: Vec<f64> = modes.modes.iter().map(|m| m.slack).collect();
    s.push("thresholds", fmt_vec(&thresholds));
    s.push("mode_slack", fmt_vec(&slacks));
    s.push("jordan_uniform", modes.jordan_uniform);
    s.push("modes_passed", modes.passed);

    for (j, l) in exp.family.members().iter().enumerate() {
        let fixed = check_condition_fixed(gamma, mf, l, exp.policy).map_err(fail)?;
        s.push(&format!("fixed_graph{}_passed", j + 1), fixed.passed);
    }
    let sw = check_condition_switching(gamma[0], mf, exp.family.members()).map_err(fail)?;
    s.push("switching_slack", sw.slack);
    s.push("switching_vacuous", sw.vacuous);
    s.push("switching_passed", sw.passed);
    s.push("all_undirected", exp.family.all_undirected());
    s.push("all_strongly_connected", exp.family.all_strongly_connected());

    let k = validate_k(&exp.model, &exp.design.k).map_err(fail)?;
    s.push("k_hurwitz", k.hurwitz);
    s.push("k_abscissa", k.abscissa);
    if let Some(h) = &exp.design.h {
        let v = validate_h(&exp.model, h).map_err(fail)?;
        s.push("h_hurwitz", v.hurwitz);
        s.push("h_abscissa", v.abscissa);
    }
    match static_gain_controller(&exp.model, &exp.design.phi) {
        Ok(m) => s.push("static_controller", fmt_matrix(&m)),
        Err(_) => s.push("static_controller", "not_applicable"),
    }
    let passed = modes.passed && sw.passed;
    s.push("passed", passed);

    let mut files = Vec::new();
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join("synth.txt");
        s.write(&path)?;
        files.push(path);
    }
    Ok(Outcome {
        summary: s,
        files,
        code: if passed { 0 } else { 3 },
    })
}

fn z0_of(exp: &Experiment) -> Result<DenseMatrix, CliError> {
    let (w, eta, _) = exp.initial()?;
    Ok(w - eta)
}

fn run_ode(exp: &Experiment) -> Result<Trajectory, CliError> {
    let (w0, eta0, wt0) = exp.initial()?;
    let step = exp.config.run.step;
    if exp.model.c().is_some() && exp.design.h.is_some() {
        simulate_observer_loop(&exp.model, &exp.design, &exp.family, &exp.schedule, w0, wt0, eta0, step)
    } else {
        simulate_compensator_loop(&exp.model, &exp.design, &exp.family, &exp.schedule, w0, eta0, step)
    }
    .map_err(sim_err)
}

/// z = w − η at every stored time of the modal engine.
fn run_modal(exp: &Experiment) -> Result<(Vec<f64>, Vec<DenseMatrix>), CliError> {
    let z0 = z0_of(exp)?;
    let x0 = exp.modal.to_modal(&z0);
    let tr = propagate_modal_closed_form(&exp.modal, &exp.design.gamma, &exp.family, &exp.schedule, &x0)
        .map_err(sim_err)?;
    let z = tr.agent_states(&exp.modal);
    Ok((tr.times, z))
}

fn push_error_stats(s: &mut Summary, times: &[f64], e: &[f64]) {
    let e0 = e[0];
    let ef = *e.last().unwrap();
    s.push("e0", e0);
    s.push("e_final", ef);
    s.push("e_ratio", if e0 > 0.0 { ef / e0 } else { 0.0 });
    let below = times.iter().zip(e).find(|(_, v)| **v < 0.01 * e0).map(|(t, _)| *t);
    s.push("t_below_1pct", below.map_or("none".to_owned(), |t| t.to_string()));
    let rate = fit_exponential(times, e).map_or(0.0, |f| f.rate);
    s.push("fitted_rate", rate);
    // judged on the second half so an early transient cannot pass for decay
    let half = times.partition_point(|t| *t < 0.5 * (times[0] + times[times.len() - 1]));
    let tail = fit_exponential(&times[half..], &e[half..]).map_or(0.0, |f| f.rate);
    s.push("tail_rate", tail);
    s.push("error_decaying", e0 > 0.0 && tail > 1e-3 && ef < e0);
}

fn push_run_header(s: &mut Summary, exp: &Experiment, command: &str, engine: Engine) {
    s.push("command", command);
    s.push("seed", exp.seed);
    s.push("engine", engine_name(engine));
    s.push("agents", exp.family.agent_count());
    s.push("graphs", exp.family.len());
    s.push("intervals", exp.schedule.len());
    s.push("horizon", exp.schedule.horizon());
    s.push("dwell_floor", exp.schedule.dwell_floor());
    s.push("switch_times", fmt_vec(exp.schedule.switch_times()));
    let modes: Vec<String> = exp.schedule.modes().iter().map(|m| (m + 1).to_string()).collect();
    s.push("sigma", format!("[{}]", modes.join(";")));
    s.push("gamma", fmt_vec(&exp.design.gamma));
    s.push("policy", policy_name(exp.policy));
}

/// Runs the selected engine(s) and writes CSV outputs plus `summary.txt`.
pub fn cmd_simulate(exp: &Experiment, engine: Engine, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let mut s = Summary::default();
    push_run_header(&mut s, exp, "simulate", engine);
    let mut files = Vec::new();
    let ode = match engine {
        Engine::Ode | Engine::Both => {
            let tr = run_ode(exp)?;
            s.push("step", tr.times[1] - tr.times[0]);
            files.push(write_trajectory_csv(&out.join("trajectory.csv"), &tr)?);
            files.push(write_error_csv(&out.join("error.csv"), &tr.times, &tr.error_series)?);
            push_error_stats(&mut s, &tr.times, &tr.error_series);
            Some(tr)
        }
        Engine::Modal => None,
    };
    if matches!(engine, Engine::Modal | Engine::Both) {
        let (times, z) = run_modal(exp)?;
        files.push(write_states_csv(&out.join("modal.csv"), "z", &times, &z)?);
        let ez: Vec<f64> = z.iter().map(crate::switchsim::spread).collect();
        if ode.is_none() {
            files.push(write_error_csv(&out.join("error.csv"), &times, &ez)?);
            push_error_stats(&mut s, &times, &ez);
        }
        if let Some(tr) = &ode {
            let eta = tr.compensator_states.as_ref().expect("compensator loop");
            let gap = tr
                .switch_sample_indices
                .iter()
                .zip(&z)
                .map(|(&i, zm)| {
                    let zo = &tr.agent_states[i] - &eta[i];
                    zo.max_abs_diff(zm) / zm.max_abs().max(1.0)
                })
                .fold(0.0, f64::max);
            s.push("engine_gap", gap);
        }
    }
    files.push(write_sigma_csv(&out.join("sigma.csv"), &exp.schedule)?);
    let path = out.join("summary.txt");
    s.write(&path)?;
    files.push(path);
    Ok(Outcome {
        summary: s,
        files,
        code: 0,
    })
}

fn contraction_rows(r: &ContractionReport) -> Vec<Vec<String>> {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    r.per_interval
        .iter()
        .enumerate()
        .map(|(k, f)| {
            vec![
                (k + 1).to_string(),
                f.start.to_string(),
                f.h.to_string(),
                (f.mode + 1).to_string(),
                f.norm.to_string(),
                f.frobenius.to_string(),
                f.scaled.to_string(),
                opt(f.predicted),
                opt(f.eigen_bound),
                r.product_bound[k].to_string(),
                opt(r.omega_bound.as_ref().map(|o| o[k])),
                r.observed[k].to_string(),
            ]
        })
        .collect()
}

/// Certificates for the configured family and schedule.
pub fn cmd_verify(exp: &Experiment, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let mut s = Summary::default();
    s.push("command", "verify");
    s.push("seed", exp.seed);
    s.push("intervals", exp.schedule.len());
    let mut files = Vec::new();
    let fam = &exp.family;
    let gamma1 = exp.design.gamma[0];
    let lead = exp.modal.eigenvalues()[0];
    let m = fam.agent_count();

    if fam.all_undirected() {
        let mut worst: f64 = 0.0;
        let mut all = true;
        let rows: Vec<Vec<String>> = exp
            .schedule
            .intervals()
            .iter()
            .enumerate()
            .map(|(k, iv)| {
                let r = check_doubly_stochastic(fam.member(iv.mode), gamma1, iv.length())?;
                worst = worst
                    .max(r.symmetry_residual)
                    .max(r.row_sum_residual)
                    .max(r.col_sum_residual);
                all &= r.passed;
                Ok(vec![
                    (k + 1).to_string(),
                    (iv.mode + 1).to_string(),
                    iv.length().to_string(),
                    r.symmetry_residual.to_string(),
                    r.min_entry.to_string(),
                    r.row_sum_residual.to_string(),
                    r.col_sum_residual.to_string(),
                    r.second_eigenvalue.to_string(),
                    r.passed.to_string(),
                ])
            })
            .collect::<Result<_, crate::verify::VerifyError>>()
            .map_err(fail)?;
        files.push(write_table(
            &out.join("doubly_stochastic.csv"),
            &["k", "mode", "h", "symmetry", "min_entry", "row_sum", "col_sum", "second_eigenvalue", "passed"],
            rows,
        )?);
        s.push("ds_max_residual", worst);
        s.push("ds_passed", all);
    }

    // leading-mode certificate, needs a real leading eigenvalue
    if lead.im == 0.0 {
        let x1: Vec<f64> = match exp.initial() {
            Ok(_) => exp.modal.to_modal(&z0_of(exp)?).row(0).iter().map(|v| v.re).collect(),
            Err(_) => (0..m).map(|j| j as f64 - (m as f64 - 1.0) / 2.0).collect(),
        };
        let report = if fam.all_undirected() {
            contraction_undirected(fam, &exp.schedule, gamma1, lead.re, &x1)
        } else {
            contraction_directed(fam, &exp.schedule, gamma1, lead.re, &x1)
        }
        .map_err(fail)?;
        files.push(write_table(
            &out.join("contraction.csv"),
            &[
                "k", "start", "h", "mode", "norm", "frobenius", "scaled", "predicted", "eigen_bound",
                "product_bound", "omega_bound", "observed",
            ],
            contraction_rows(&report),
        )?);
        s.push("initial_norm", report.initial_norm);
        s.push("contraction_bound_satisfied", report.bound_satisfied(1e-9));
        s.push("telescoping_residual", report.telescoping_residual);
        s.push("eigen_bound_available", report.bound_available);
        if let Some(f) = report.fit {
            s.push("fitted_rate", f.rate);
            s.push("fitted_prefactor", f.prefactor);
        }
        s.push("predicted_rate", gamma1 * fam.lambda2_min() - lead.re);
        if fam.all_undirected() {
            let d = contraction_directed(fam, &exp.schedule, gamma1, lead.re, &x1).map_err(fail)?;
            let gap = d
                .per_interval
                .iter()
                .zip(&report.per_interval)
                .map(|(a, b)| (a.norm - b.norm).abs())
                .fold(0.0, f64::max);
            s.push("d_equals_b_gap", gap);
            let demo = boundary_counterexample(fam, lead.re, exp.schedule.horizon(), None).map_err(fail)?;
            s.push("boundary_gamma", demo.gamma1);
            s.push("boundary_relative_change", demo.max_relative_change);
        } else {
            let rows: Vec<Vec<String>> = [1.0, 2.0, 4.0, 8.0, 16.0]
                .iter()
                .map(|mult| {
                    let r = contraction_directed(fam, &exp.schedule, gamma1 * mult, lead.re, &x1)?;
                    let worst = r.per_interval.iter().map(|f| f.scaled).fold(0.0, f64::max);
                    let last = r.observed.last().copied().unwrap_or(0.0);
                    Ok(vec![
                        (gamma1 * mult).to_string(),
                        worst.to_string(),
                        (last / r.initial_norm).to_string(),
                    ])
                })
                .collect::<Result<_, crate::verify::VerifyError>>()
                .map_err(fail)?;
            files.push(write_table(
                &out.join("gamma_sweep.csv"),
                &["gamma", "max_scaled_factor", "final_relative_deviation"],
                rows,
            )?);
        }
    } else {
        s.push("contraction", "skipped_complex_leading_mode");
    }

    // engine cross-checks
    if let Ok(z0) = z0_of(exp) {
        let x0 = exp.modal.to_modal(&z0);
        let modal = propagate_modal_closed_form(&exp.modal, &exp.design.gamma, fam, &exp.schedule, &x0)
            .map_err(sim_err)?;
        let n = exp.modal.order();
        match exp.modal.real_s() {
            Some(sm) if n * m <= ORACLE_MAX_ORDER && x0.max_imag() == 0.0 => {
                let gm = DenseMatrix::from_diag(&exp.design.gamma);
                let flat: Vec<f64> = x0.as_slice().iter().map(|v| v.re).collect();
                let oracle = oracle_full_kronecker(&sm, &gm, fam, &exp.schedule, &flat).map_err(fail)?;
                let gap = modal
                    .states
                    .iter()
                    .enumerate()
                    .map(|(k, st)| {
                        let o = oracle.modal_matrix(k, n);
                        st.real_part().max_abs_diff(&o) / o.max_abs().max(1.0)
                    })
                    .fold(0.0, f64::max);
                s.push("oracle_gap", gap);
            }
            _ => s.push("oracle_gap", "skipped"),
        }
        let zl = simulate_z_loop(exp.model.a(), &exp.design.phi, fam, &exp.schedule, &z0, exp.config.run.step)
            .map_err(sim_err)?;
        let zs = modal.agent_states(&exp.modal);
        let gap = zl
            .switch_sample_indices
            .iter()
            .zip(&zs)
            .map(|(&i, zm)| zl.agent_states[i].max_abs_diff(zm) / zm.max_abs().max(1.0))
            .fold(0.0, f64::max);
        s.push("ode_gap", gap);
    }
    let path = out.join("summary.txt");
    s.write(&path)?;
    files.push(path);
    Ok(Outcome {
        summary: s,
        files,
        code: 0,
    })
}

/// The built-in example end to end: simulation files plus the Φ check.
pub fn cmd_reproduce_example(exp: &Experiment, engine: Engine, out: &Path) -> Result<Outcome, CliError> {
    let mut outcome = cmd_simulate(exp, engine, out)?;
    let s = &mut outcome.summary;
    s.set("command", "reproduce-example");
    s.push("phi", fmt_matrix(&exp.design.phi));
    let want = DenseMatrix::from_rows(&EXAMPLE_PHI).expect("static matrix");
    let q = exp.modal.real_q().ok_or_else(|| fail("example Q is complex"))?;
    let phi = crate::synth::phi_from_gamma(&q, &exp.design.gamma).map_err(fail)?;
    let err = phi.max_abs_diff(&want);
    s.push("phi_max_error", err);
    s.push("phi_consistent", err < 1e-6);
    let z0 = z0_of(exp)?;
    s.push("z0_norm", vec_norm(z0.as_slice()));
    let path = out.join("summary.txt");
    s.write(&path)?;
    let cfg_path = out.join("config.toml");
    let mut cfg = exp.config.clone();
    cfg.schedule.seed = exp.seed;
    std::fs::write(&cfg_path, cfg.to_toml()?).map_err(|e| super::output::io_err(&cfg_path, e))?;
    outcome.files.push(cfg_path);
    Ok(outcome)
}
