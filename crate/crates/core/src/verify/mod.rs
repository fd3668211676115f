//! Numerical certificates for the consensus conditions and brute-force oracles.

mod boundary;
mod contraction;
mod oracle;
mod stochastic;

pub use boundary::{boundary_counterexample, BoundaryDemo};
pub use contraction::{
    contraction_directed, contraction_undirected, fit_exponential, ContractionReport, ExpFit,
    IntervalFactor,
};
pub use oracle::{
    kronecker_generator, jordan_reduction_check, oracle_full_kronecker, KroneckerRun,
    JordanReductionReport, ORACLE_MAX_ORDER,
};
pub use stochastic::{check_doubly_stochastic, DoublyStochasticReport, STOCHASTIC_TOL};

use thiserror::Error;

use crate::netgraph::GraphError;
use crate::numkit::{DenseMatrix, NumError};
use crate::switchsim::SimError;
use crate::synth::{modal_decompose, AgentModel, ModalForm, SynthError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("system order {order} exceeds the oracle limit {limit}")]
    TooLarge { order: usize, limit: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Modal form of a scalar agent `ẋ = λx`.
pub(crate) fn scalar_modal(lambda: f64) -> Result<ModalForm, VerifyError> {
    let model = AgentModel::new(
        DenseMatrix::from_diag(&[lambda]),
        DenseMatrix::identity(1),
        None,
    )?;
    Ok(modal_decompose(&model, Some(&DenseMatrix::identity(1)))?)
}
