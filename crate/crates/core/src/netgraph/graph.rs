use std::collections::VecDeque;

use crate::numkit::DenseMatrix;

use super::GraphError;

/// Floor used when a caller does not pick one; nonzero weights below it are rejected.
pub const DEFAULT_ALPHA_FLOOR: f64 = 1e-6;

/// Weighted communication graph over `m` agents.
///
/// `weight(i, j) = α_ij > 0` means agent `i` receives information from agent
/// `j` (`j` is an in-neighbor of `i`). Undirected graphs are the symmetric case.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    weights: DenseMatrix,
    alpha_floor: f64,
}

impl Digraph {
    /// Validates and wraps an `m x m` weight matrix.
    pub fn from_weights(weights: DenseMatrix, alpha_floor: f64) -> Result<Self, GraphError> {
        if !(alpha_floor > 0.0 && alpha_floor.is_finite()) {
            return Err(GraphError::InvalidFloor(alpha_floor));
        }
        if !weights.is_square() {
            return Err(GraphError::Dimension(format!(
                "weight matrix must be square, got {}x{}",
                weights.rows(),
                weights.cols()
            )));
        }
        let m = weights.rows();
        for i in 0..m {
            for j in 0..m {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(GraphError::NonFinite { i, j });
                }
                if i == j {
                    if w != 0.0 {
                        return Err(GraphError::SelfLoop { i, weight: w });
                    }
                    continue;
                }
                if w < 0.0 {
                    return Err(GraphError::NegativeWeight { i, j, weight: w });
                }
                if w != 0.0 && w < alpha_floor {
                    return Err(GraphError::BelowFloor {
                        i,
                        j,
                        weight: w,
                        floor: alpha_floor,
                    });
                }
            }
        }
        Ok(Self {
            weights,
            alpha_floor,
        })
    }

    /// Graph with no edges.
    pub fn empty(m: usize) -> Self {
        Self {
            weights: DenseMatrix::zeros(m, m),
            alpha_floor: DEFAULT_ALPHA_FLOOR,
        }
    }

    /// Directed graph from `(i, j, α_ij)` triples (0-based): `i` listens to `j`.
    pub fn directed(
        m: usize,
        edges: &[(usize, usize, f64)],
        alpha_floor: f64,
    ) -> Result<Self, GraphError> {
        Self::build(m, edges, alpha_floor, false)
    }

    /// Undirected graph from `(i, j, α)` triples (0-based); sets both directions.
    pub fn undirected(
        m: usize,
        edges: &[(usize, usize, f64)],
        alpha_floor: f64,
    ) -> Result<Self, GraphError> {
        Self::build(m, edges, alpha_floor, true)
    }

    fn build(
        m: usize,
        edges: &[(usize, usize, f64)],
        alpha_floor: f64,
        symmetric: bool,
    ) -> Result<Self, GraphError> {
        if m == 0 {
            return Err(GraphError::Dimension("graph needs at least one agent".into()));
        }
        let mut w = DenseMatrix::zeros(m, m);
        for &(i, j, a) in edges {
            if i >= m || j >= m {
                return Err(GraphError::IndexOutOfRange { i, j, m });
            }
            w[(i, j)] = a;
            if symmetric {
                w[(j, i)] = a;
            }
        }
        Self::from_weights(w, alpha_floor)
    }

    pub fn agent_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn alpha_floor(&self) -> f64 {
        self.alpha_floor
    }

    pub fn is_undirected(&self) -> bool {
        self.weights.is_symmetric(0.0)
    }

    /// Nonzero `(i, j, α_ij)` entries in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let m = self.agent_count();
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Nodes reached from `start` when information flows from `j` to `i`
    /// along every `α_ij ≠ 0` (or the reverse direction when `reverse`).
    fn reach(&self, start: usize, reverse: bool) -> Vec<bool> {
        let m = self.agent_count();
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                let w = if reverse {
                    self.weights[(u, v)]
                } else {
                    self.weights[(v, u)]
                };
                if w != 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// True iff some base node reaches every other node.
    pub fn is_connected(&self) -> bool {
        (0..self.agent_count()).any(|b| self.reach(b, false).into_iter().all(|s| s))
    }

    /// True iff every ordered pair of nodes is joined by a directed path.
    pub fn is_strongly_connected(&self) -> bool {
        self.reach(0, false).into_iter().all(|s| s) && self.reach(0, true).into_iter().all(|s| s)
    }
}
