//! Modal decomposition of the agent model and design/checking of the gains Γ, Φ, K, H.

mod feedback;
mod gains;
mod modal;

pub use feedback::{
    observer_gain_single_output, place_poles_single_input, static_gain_controller, validate_h,
    validate_k, GainDesign,
};
pub use gains::{
    check_condition_fixed, check_condition_switching, check_condition_switching_modes,
    design_gamma_fixed, design_gamma_uniform, lambda2_omega, lambda2_re, phi_from_gamma,
    FixedConditionReport, GammaDesign, JordanPolicy, ModeVerdict, SwitchingConditionReport,
    DEFAULT_MARGIN,
};
pub use modal::{
    modal_decompose, AgentModel, JordanBlock, ModalForm, REDUCTION_TOL, UNSTABLE_RE_THRESHOLD,
};

use thiserror::Error;

use crate::netgraph::GraphError;
use crate::numkit::NumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("A is not diagonalizable (eigenvector condition {condition:e}); supply a Jordan transformation Q")]
    DefectiveWithoutTransformation { condition: f64 },
    #[error("Q does not reduce A to diagonal or Jordan form (residual {residual:e})")]
    BadTransformation { residual: f64 },
    #[error("no feasible gain: {0}")]
    NoFeasibleGain(String),
    #[error("graph family is empty")]
    EmptyFamily,
    #[error("graph {index} of the family is not connected")]
    DisconnectedMember { index: usize },
    #[error("margin must be positive and finite, got {0}")]
    InvalidMargin(f64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("{which} is not Hurwitz (spectral abscissa {abscissa})")]
    NotHurwitz { which: &'static str, abscissa: f64 },
    #[error("gains produce a complex Φ; conjugate modes need equal gains")]
    NonRealGain,
    #[error("observer design needs an output matrix C")]
    MissingOutputMatrix,
}
