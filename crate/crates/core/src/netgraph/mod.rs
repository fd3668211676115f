//! Communication graphs, their Laplacians and spectral summaries.

mod graph;
mod laplacian;

pub use graph::{Digraph, DEFAULT_ALPHA_FLOOR};
pub use laplacian::{
    laplacian_of, spectral_summary, validate_laplacian_properties, LaplacianMatrix,
    LaplacianReport, PropertyCheck, SpectralSummary,
};

use thiserror::Error;

use crate::numkit::NumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("alpha floor must be positive and finite, got {0}")]
    InvalidFloor(f64),
    #[error("graph dimension error: {0}")]
    Dimension(String),
    #[error("edge ({i}, {j}) has non-finite weight")]
    NonFinite { i: usize, j: usize },
    #[error("node {i} has a self-loop weight {weight}")]
    SelfLoop { i: usize, weight: f64 },
    #[error("edge ({i}, {j}) has negative weight {weight}")]
    NegativeWeight { i: usize, j: usize, weight: f64 },
    #[error("edge ({i}, {j}) weight {weight} is below the floor {floor}")]
    BelowFloor {
        i: usize,
        j: usize,
        weight: f64,
        floor: f64,
    },
    #[error("edge ({i}, {j}) is out of range for {m} agents")]
    IndexOutOfRange { i: usize, j: usize, m: usize },
    #[error(transparent)]
    Numeric(#[from] NumError),
}
