//! Switching schedules, the closed-form modal engine and the RK4 closed-loop engine.

mod family;
mod modal;
mod ode;
mod schedule;
mod trajectory;

pub use family::GraphFamily;
pub use modal::{propagate_modal_closed_form, ModalTrajectory};
pub use ode::{
    compensator_loop_matrix, default_step, integrate_linear, observer_loop_matrix,
    simulate_compensator_loop, simulate_observer_loop, simulate_z_loop, z_loop_matrix,
    LinearRun,
};
pub use schedule::{generate_schedule, Interval, Schedule};
pub use trajectory::{asymptotic_consensus_value, consensus_error, spread, Trajectory};

use thiserror::Error;

use crate::netgraph::GraphError;
use crate::numkit::NumError;
use crate::synth::SynthError;

/// States whose magnitude exceeds this are reported as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid dwell bounds [{low}, {high}]")]
    InvalidDwell { low: f64, high: f64 },
    #[error("schedule uses mode {mode} but the family has {family_size} graphs")]
    IndexMismatch { mode: usize, family_size: usize },
    #[error("step {step} exceeds the limit {limit} (a tenth of the dwell floor)")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("state diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("not available: {0}")]
    NotAvailable(String),
    #[error("graph family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}
