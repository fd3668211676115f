use serde::{Deserialize, Serialize};

use crate::netgraph::{laplacian_of, Digraph, DEFAULT_ALPHA_FLOOR};
use crate::numkit::DenseMatrix;
use crate::switchsim::{generate_schedule, GraphFamily, Schedule};
use crate::synth::{
    design_gamma_fixed, design_gamma_uniform, modal_decompose, AgentModel, GainDesign,
    JordanPolicy, ModalForm, SynthError, DEFAULT_MARGIN,
};

use super::CliError;

pub type Matrix = Vec<Vec<f64>>;

/// One experiment, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub gains: GainsConfig,
    pub network: NetworkConfig,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a: Matrix,
    pub b: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Matrix>,
    /// Transformation to diagonal/Jordan form; required when A is defective.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Matrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaDesignRule {
    /// One gain on all unstable modes, from the family minimum λ².
    Uniform,
    /// Per-mode gains against the first graph.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JordanMode {
    Strict,
    Permissive,
}

impl From<JordanMode> for JordanPolicy {
    fn from(m: JordanMode) -> Self {
        match m {
            JordanMode::Strict => JordanPolicy::Strict,
            JordanMode::Permissive => JordanPolicy::Permissive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub k: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Matrix>,
    /// Explicit per-mode gains; when absent they are designed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<GammaDesignRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan: Option<JordanMode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub agents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_floor: Option<f64>,
    pub graphs: Vec<GraphConfig>,
}

/// A graph as 1-based `[i, j, w]` edges (agent i listens to agent j) or a full
/// weight matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Matrix>,
    /// Edges set both directions unless this is true.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub directed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    /// `[low, high]` bounds of the uniform dwell time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_times: Option<Vec<f64>>,
    /// 1-based graph index per interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// One row per agent.
    pub w: Matrix,
    /// Explicit compensator states; overrides `eta_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Matrix>,
    /// η_i(0) = eta_scale · w_i(0); zero when both are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_scale: Option<f64>,
    /// Observer start; defaults to w.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wtilde: Option<Matrix>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Modal,
    #[default]
    Ode,
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Validated, ready-to-run experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: AgentModel,
    pub modal: ModalForm,
    pub family: GraphFamily,
    pub schedule: Schedule,
    pub seed: u64,
    pub design: GainDesign,
    pub policy: JordanPolicy,
    pub w0: Option<DenseMatrix>,
    pub eta0: Option<DenseMatrix>,
    pub wtilde0: Option<DenseMatrix>,
}

fn matrix(field: &str, rows: &Matrix) -> Result<DenseMatrix, CliError> {
    if rows.is_empty() {
        return Err(CliError::Config(format!("{field}: matrix is empty")));
    }
    DenseMatrix::from_rows(rows).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn shape(field: &str, m: &DenseMatrix, rows: usize, cols: usize) -> Result<(), CliError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(CliError::Config(format!(
            "{field}: expected {rows}x{cols}, found {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn synth_err(field: &str, e: SynthError) -> CliError {
    match e {
        SynthError::DisconnectedMember { index } => {
            CliError::Infeasible(format!("network.graphs[{}] is not connected", index + 1))
        }
        SynthError::NoFeasibleGain(_)
        | SynthError::EmptyFamily => CliError::Infeasible(format!("{field}: {e}")),
        other => CliError::Config(format!("{field}: {other}")),
    }
}

impl Experiment {
    /// Validates every field and resolves designed gains and the schedule.
    /// `seed` and `policy` override the config when given.
    pub fn build(
        config: &ExperimentConfig,
        seed: Option<u64>,
        policy: Option<JordanPolicy>,
    ) -> Result<Self, CliError> {
        let a = matrix("model.a", &config.model.a)?;
        let n = a.rows();
        shape("model.a", &a, n, n)?;
        let b = matrix("model.b", &config.model.b)?;
        if b.rows() != n {
            return Err(CliError::Config(format!("model.b: expected {n} rows, found {}", b.rows())));
        }
        let c = config.model.c.as_ref().map(|c| matrix("model.c", c)).transpose()?;
        if let Some(c) = &c {
            if c.cols() != n {
                return Err(CliError::Config(format!("model.c: expected {n} columns, found {}", c.cols())));
            }
        }
        let model = AgentModel::new(a, b, c).map_err(|e| CliError::Config(format!("model: {e}")))?;
        let q = config.model.q.as_ref().map(|q| matrix("model.q", q)).transpose()?;
        let modal = modal_decompose(&model, q.as_ref()).map_err(|e| CliError::Config(format!("model.q: {e}")))?;

        let net = &config.network;
        let m = net.agents;
        if m == 0 {
            return Err(CliError::Config("network.agents: must be positive".into()));
        }
        if net.graphs.is_empty() {
            return Err(CliError::Config("network.graphs: at least one graph is required".into()));
        }
        let floor = net.alpha_floor.unwrap_or(DEFAULT_ALPHA_FLOOR);
        let mut members = Vec::new();
        for (idx, g) in net.graphs.iter().enumerate() {
            let field = format!("network.graphs[{}]", idx + 1);
            let graph = match (&g.edges, &g.weights) {
                (Some(edges), None) => {
                    let mut zero_based = Vec::with_capacity(edges.len());
                    for &(i, j, w) in edges {
                        if i == 0 || j == 0 || i > m || j > m {
                            return Err(CliError::Config(format!(
                                "{field}.edges: ({i}, {j}) is outside agents 1..={m}"
                            )));
                        }
                        zero_based.push((i - 1, j - 1, w));
                    }
                    if g.directed {
                        Digraph::directed(m, &zero_based, floor)
                    } else {
                        Digraph::undirected(m, &zero_based, floor)
                    }
                }
                (None, Some(w)) => {
                    let w = matrix(&format!("{field}.weights"), w)?;
                    shape(&format!("{field}.weights"), &w, m, m)?;
                    Digraph::from_weights(w, floor)
                }
                _ => {
                    return Err(CliError::Config(format!(
                        "{field}: give exactly one of `edges` or `weights`"
                    )))
                }
            }
            .map_err(|e| CliError::Config(format!("{field}: {e}")))?;
            members.push(laplacian_of(&graph));
        }
        let family = GraphFamily::new(members).map_err(|e| CliError::Config(format!("network: {e}")))?;

        let seed = seed.unwrap_or(config.schedule.seed);
        let schedule = schedule_from(&config.schedule, seed, family.len())?;

        let gains = &config.gains;
        let k = matrix("gains.k", &gains.k)?;
        shape("gains.k", &k, model.n_b(), n)?;
        let h = gains.h.as_ref().map(|h| matrix("gains.h", h)).transpose()?;
        let margin = gains.margin.unwrap_or(DEFAULT_MARGIN);
        let gamma = match &gains.gamma {
            Some(g) => {
                if g.len() != n {
                    return Err(CliError::Config(format!(
                        "gains.gamma: expected {n} entries, found {}",
                        g.len()
                    )));
                }
                g.clone()
            }
            None => {
                let d = match gains.design.unwrap_or(GammaDesignRule::Uniform) {
                    GammaDesignRule::Uniform => design_gamma_uniform(&modal, family.members(), margin),
                    GammaDesignRule::Fixed => design_gamma_fixed(&modal, family.member(0), margin),
                };
                d.map_err(|e| synth_err("gains.design", e))?.gammas
            }
        };
        let design = GainDesign::assemble(&model, &modal, gamma, k, h, margin)
            .map_err(|e| CliError::Config(format!("gains: {e}")))?;
        let policy = policy
            .or(gains.jordan.map(Into::into))
            .unwrap_or_default();

        let (w0, eta0, wtilde0) = match &config.initial {
            None => (None, None, None),
            Some(init) => {
                let w0 = matrix("initial.w", &init.w)?;
                shape("initial.w", &w0, m, n)?;
                let eta0 = match (&init.eta, init.eta_scale) {
                    (Some(e), _) => {
                        let e = matrix("initial.eta", e)?;
                        shape("initial.eta", &e, m, n)?;
                        e
                    }
                    (None, Some(s)) => w0.scale(s),
                    (None, None) => DenseMatrix::zeros(m, n),
                };
                let wt = match &init.wtilde {
                    Some(v) => {
                        let v = matrix("initial.wtilde", v)?;
                        shape("initial.wtilde", &v, m, n)?;
                        v
                    }
                    None => w0.clone(),
                };
                (Some(w0), Some(eta0), Some(wt))
            }
        };
        Ok(Self {
            config: config.clone(),
            model,
            modal,
            family,
            schedule,
            seed,
            design,
            policy,
            w0,
            eta0,
            wtilde0,
        })
    }

    /// Initial conditions, or a config error naming the missing section.
    pub fn initial(&self) -> Result<(&DenseMatrix, &DenseMatrix, &DenseMatrix), CliError> {
        match (&self.w0, &self.eta0, &self.wtilde0) {
            (Some(w), Some(e), Some(t)) => Ok((w, e, t)),
            _ => Err(CliError::Config("initial: section is required for this command".into())),
        }
    }
}

fn schedule_from(cfg: &ScheduleConfig, seed: u64, v: usize) -> Result<Schedule, CliError> {
    let bad = |e: crate::switchsim::SimError| CliError::Config(format!("schedule: {e}"));
    match (&cfg.switch_times, &cfg.modes) {
        (Some(times), Some(modes)) => {
            if let Some(&bad_mode) = modes.iter().find(|&&k| k == 0 || k > v) {
                return Err(CliError::Config(format!(
                    "schedule.modes: {bad_mode} is outside graphs 1..={v}"
                )));
            }
            let floor = cfg.dwell.map(|d| d[0]);
            Schedule::new(times.clone(), modes.iter().map(|k| k - 1).collect(), floor, cfg.horizon)
                .map_err(bad)
        }
        (None, None) => {
            let [low, high] = cfg.dwell.ok_or_else(|| {
                CliError::Config("schedule: give `dwell` or both `switch_times` and `modes`".into())
            })?;
            generate_schedule(seed, v, low, high, cfg.horizon).map_err(bad)
        }
        _ => Err(CliError::Config(
            "schedule: `switch_times` and `modes` must be given together".into(),
        )),
    }
}
