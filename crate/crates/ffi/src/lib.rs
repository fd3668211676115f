//! C ABI over `linsync`.
//!
//! Every entry point returns an [`LcStatus`]; on failure the message is kept
//! per thread and read back with [`lc_last_error`]. Matrices cross the
//! boundary as row-major `double` buffers. Handles are opaque and must be
//! released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linsync::cli::{CliError, Experiment, ExperimentConfig};
use linsync::netgraph::{laplacian_of, spectral_summary, Digraph, LaplacianMatrix};
use linsync::numkit::{expm, DenseMatrix};
use linsync::switchsim::{
    consensus_error, propagate_modal_closed_form, simulate_compensator_loop,
    simulate_observer_loop, SimError,
};
use linsync::synth::phi_from_gamma;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Infeasible = 4,
    Divergence = 5,
    Numeric = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Integration engine for [`lc_experiment_simulate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcEngine {
    /// RK4 on the full agent/compensator (or observer) loop.
    Ode = 0,
    /// Closed-form modal propagation of `z = w − η`, sampled at switch times.
    Modal = 1,
}

/// Communication graph with its Laplacian.
pub struct LcGraph {
    laplacian: LaplacianMatrix,
}

/// Validated experiment (model, gains, graph family, schedule).
pub struct LcExperiment {
    config: ExperimentConfig,
    inner: Experiment,
}

/// Sampled run: times, consensus error and agent states.
pub struct LcTrajectory {
    times: Vec<f64>,
    error: Vec<f64>,
    states: Vec<DenseMatrix>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(LcStatus, String);

impl Failure {
    fn new(status: LcStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Config(_) | CliError::Io(_) => LcStatus::Config,
            CliError::Infeasible(_) => LcStatus::Infeasible,
            CliError::Divergence(_) => LcStatus::Divergence,
            CliError::Failure(_) => LcStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::Divergence { .. } => LcStatus::Divergence,
            SimError::Numeric(_) => LcStatus::Numeric,
            _ => LcStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LcStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(LcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize, what: &str) -> Result<DenseMatrix, Failure> {
    non_null(data, what)?;
    if rows == 0 || cols == 0 {
        return Err(Failure::new(LcStatus::InvalidArgument, format!("{what} has a zero dimension")));
    }
    let slice = std::slice::from_raw_parts(data, rows * cols);
    DenseMatrix::from_row_slice(rows, cols, slice).map_err(|e| Failure::new(LcStatus::InvalidArgument, e.to_string()))
}

unsafe fn write_out(values: &[f64], out: *mut f64, capacity: usize) -> Result<(), Failure> {
    non_null(out, "output buffer")?;
    if capacity < values.len() {
        return Err(Failure::new(
            LcStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(s, what)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::new(LcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `out = exp(t·M)` for an `n x n` row-major matrix.
///
/// # Safety
/// `m` and `out` must each point to `n*n` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_expm(n: usize, m: *const f64, t: f64, out: *mut f64) -> LcStatus {
    guard(|| {
        let mat = read_matrix(m, n, n, "m")?;
        let e = expm(&mat, t).map_err(|e| Failure::new(LcStatus::Numeric, e.to_string()))?;
        write_out(e.as_slice(), out, n * n)
    })
}

/// `out = Q diag(gammas) Q⁻¹` for an `n x n` row-major `Q`.
///
/// # Safety
/// `q` and `out` must point to `n*n` doubles, `gammas` to `n`.
#[no_mangle]
pub unsafe extern "C" fn lc_phi_from_gamma(n: usize, q: *const f64, gammas: *const f64, out: *mut f64) -> LcStatus {
    guard(|| {
        let qm = read_matrix(q, n, n, "q")?;
        non_null(gammas, "gammas")?;
        let g = std::slice::from_raw_parts(gammas, n);
        let phi = phi_from_gamma(&qm, g).map_err(|e| Failure::new(LcStatus::Numeric, e.to_string()))?;
        write_out(phi.as_slice(), out, n * n)
    })
}

/// Builds a graph from an `m x m` row-major weight matrix; `weights[i*m+j] > 0`
/// means agent `i` listens to agent `j`.
///
/// # Safety
/// `weights` must point to `m*m` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lc_graph_new(
    m: usize,
    weights: *const f64,
    alpha_floor: f64,
    out: *mut *mut LcGraph,
) -> LcStatus {
    guard(|| {
        non_null(out, "out")?;
        let w = read_matrix(weights, m, m, "weights")?;
        let g = Digraph::from_weights(w, alpha_floor).map_err(|e| Failure::new(LcStatus::InvalidArgument, e.to_string()))?;
        let handle = Box::new(LcGraph {
            laplacian: laplacian_of(&g),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from [`lc_graph_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_graph_free(g: *mut LcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Second Laplacian eigenvalue (ascending real part).
///
/// # Safety
/// `g` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn lc_graph_lambda2(g: *const LcGraph, re: *mut f64, im: *mut f64) -> LcStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let s = spectral_summary(&(*g).laplacian).map_err(|e| Failure::new(LcStatus::Numeric, e.to_string()))?;
        *re = s.lambda2.re;
        *im = s.lambda2.im;
        Ok(())
    })
}

/// Writes the Laplacian (`m*m` doubles, row-major).
///
/// # Safety
/// `g` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_graph_laplacian(g: *const LcGraph, out: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        non_null(g, "graph")?;
        write_out((*g).laplacian.matrix().as_slice(), out, capacity)
    })
}

/// `connected` receives 1 when some node reaches every other, `strongly` when
/// every ordered pair is joined by a directed path.
///
/// # Safety
/// `g` must be a live handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn lc_graph_connectivity(g: *const LcGraph, connected: *mut i32, strongly: *mut i32) -> LcStatus {
    guard(|| {
        non_null(g, "graph")?;
        non_null(connected, "connected")?;
        non_null(strongly, "strongly")?;
        let src = (*g).laplacian.source();
        *connected = i32::from(src.is_connected());
        *strongly = i32::from(src.is_strongly_connected());
        Ok(())
    })
}

fn new_experiment(config: ExperimentConfig, seed: Option<u64>) -> Result<*mut LcExperiment, Failure> {
    let inner = Experiment::build(&config, seed, None)?;
    Ok(Box::into_raw(Box::new(LcExperiment { config, inner })))
}

/// Parses and validates a TOML experiment (same format as the CLI).
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_from_toml(toml: *const c_char, out: *mut *mut LcExperiment) -> LcStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_str(toml, "toml")?;
        *out = new_experiment(ExperimentConfig::from_toml(text)?, None)?;
        Ok(())
    })
}

/// The built-in four-agent switching example.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_builtin(out: *mut *mut LcExperiment) -> LcStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = new_experiment(linsync::cli::builtin_example(), None)?;
        Ok(())
    })
}

/// Copy of `exp` with its random schedule redrawn from `seed`.
///
/// # Safety
/// `exp` must be a live handle; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_with_seed(
    exp: *const LcExperiment,
    seed: u64,
    out: *mut *mut LcExperiment,
) -> LcStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        non_null(out, "out")?;
        *out = new_experiment((*exp).config.clone(), Some(seed))?;
        Ok(())
    })
}

/// # Safety
/// `exp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_free(exp: *mut LcExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Agent count `m`, state dimension `n` and number of dwell intervals.
///
/// # Safety
/// `exp` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_dims(
    exp: *const LcExperiment,
    agents: *mut usize,
    state_dim: *mut usize,
    intervals: *mut usize,
) -> LcStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        let e = &(*exp).inner;
        if !agents.is_null() {
            *agents = e.family.agent_count();
        }
        if !state_dim.is_null() {
            *state_dim = e.model.n();
        }
        if !intervals.is_null() {
            *intervals = e.schedule.len();
        }
        Ok(())
    })
}

/// Per-mode gains γ (`n` doubles).
///
/// # Safety
/// `exp` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_gamma(exp: *const LcExperiment, out: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        write_out(&(*exp).inner.design.gamma, out, capacity)
    })
}

/// Coupling gain Φ (`n*n` doubles, row-major).
///
/// # Safety
/// `exp` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_phi(exp: *const LcExperiment, out: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        write_out((*exp).inner.design.phi.as_slice(), out, capacity)
    })
}

fn simulate(exp: &Experiment, engine: LcEngine) -> Result<LcTrajectory, Failure> {
    let (w0, eta0, wt0) = exp.initial()?;
    let step = exp.config.run.step;
    match engine {
        LcEngine::Ode => {
            let tr = if exp.model.c().is_some() && exp.design.h.is_some() {
                simulate_observer_loop(&exp.model, &exp.design, &exp.family, &exp.schedule, w0, wt0, eta0, step)?
            } else {
                simulate_compensator_loop(&exp.model, &exp.design, &exp.family, &exp.schedule, w0, eta0, step)?
            };
            Ok(LcTrajectory {
                times: tr.times,
                error: tr.error_series,
                states: tr.agent_states,
            })
        }
        LcEngine::Modal => {
            let z0 = w0 - eta0;
            let x0 = exp.modal.to_modal(&z0);
            let run = propagate_modal_closed_form(&exp.modal, &exp.design.gamma, &exp.family, &exp.schedule, &x0)?;
            let states = run.agent_states(&exp.modal);
            Ok(LcTrajectory {
                times: run.times,
                error: consensus_error(&states),
                states,
            })
        }
    }
}

/// Runs the experiment. The ODE engine samples every RK4 step and stores the
/// agent states `w`; the modal engine samples switch times and stores `z = w − η`.
///
/// # Safety
/// `exp` must be a live handle; `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lc_experiment_simulate(
    exp: *const LcExperiment,
    engine: LcEngine,
    out: *mut *mut LcTrajectory,
) -> LcStatus {
    guard(|| {
        non_null(exp, "experiment")?;
        non_null(out, "out")?;
        let tr = simulate(&(*exp).inner, engine)?;
        *out = Box::into_raw(Box::new(tr));
        Ok(())
    })
}

/// # Safety
/// `tr` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_free(tr: *mut LcTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// Number of samples (0 for a null handle).
///
/// # Safety
/// `tr` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_len(tr: *const LcTrajectory) -> usize {
    if tr.is_null() {
        0
    } else {
        (*tr).times.len()
    }
}

/// Sample times.
///
/// # Safety
/// `tr` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_times(tr: *const LcTrajectory, out: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        non_null(tr, "trajectory")?;
        write_out(&(*tr).times, out, capacity)
    })
}

/// Consensus error (max pairwise ∞-norm disagreement) per sample.
///
/// # Safety
/// `tr` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_error(tr: *const LcTrajectory, out: *mut f64, capacity: usize) -> LcStatus {
    guard(|| {
        non_null(tr, "trajectory")?;
        write_out(&(*tr).error, out, capacity)
    })
}

/// Agent states at sample `k` as an `m x n` row-major block (one row per agent).
///
/// # Safety
/// `tr` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn lc_trajectory_state(
    tr: *const LcTrajectory,
    k: usize,
    out: *mut f64,
    capacity: usize,
) -> LcStatus {
    guard(|| {
        non_null(tr, "trajectory")?;
        let tr = &*tr;
        let st = tr
            .states
            .get(k)
            .ok_or_else(|| Failure::new(LcStatus::InvalidArgument, format!("sample {k} out of range")))?;
        write_out(st.as_slice(), out, capacity)
    })
}
