use crate::netgraph::{spectral_summary, LaplacianMatrix, SpectralSummary};

use super::SimError;

/// The set of graphs the network switches among.
#[derive(Clone, Debug)]
pub struct GraphFamily {
    members: Vec<LaplacianMatrix>,
    summaries: Vec<SpectralSummary>,
    lambda2_min: f64,
    all_undirected: bool,
    all_strongly_connected: bool,
    all_connected: bool,
}

impl GraphFamily {
    pub fn new(members: Vec<LaplacianMatrix>) -> Result<Self, SimError> {
        let first = members.first().ok_or(SimError::EmptyFamily)?;
        let m = first.order();
        if let Some(bad) = members.iter().position(|l| l.order() != m) {
            return Err(SimError::Dimension(format!(
                "graph {bad} has {} agents, graph 0 has {m}",
                members[bad].order()
            )));
        }
        let summaries = members
            .iter()
            .map(spectral_summary)
            .collect::<Result<Vec<_>, _>>()?;
        let lambda2_min = summaries
            .iter()
            .map(|s| s.lambda2.re)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            all_undirected: members.iter().all(|l| l.is_undirected()),
            all_strongly_connected: members.iter().all(|l| l.source().is_strongly_connected()),
            all_connected: members.iter().all(|l| l.source().is_connected()),
            members,
            summaries,
            lambda2_min,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn agent_count(&self) -> usize {
        self.members[0].order()
    }

    pub fn members(&self) -> &[LaplacianMatrix] {
        &self.members
    }

    pub fn member(&self, j: usize) -> &LaplacianMatrix {
        &self.members[j]
    }

    pub fn summary(&self, j: usize) -> &SpectralSummary {
        &self.summaries[j]
    }

    /// `Re(λ²)` of member `j`.
    pub fn lambda2(&self, j: usize) -> f64 {
        self.summaries[j].lambda2.re
    }

    /// `λ²_Ω = min_j Re(λ²(L_j))`.
    pub fn lambda2_min(&self) -> f64 {
        self.lambda2_min
    }

    pub fn all_undirected(&self) -> bool {
        self.all_undirected
    }

    pub fn all_strongly_connected(&self) -> bool {
        self.all_strongly_connected
    }

    pub fn all_connected(&self) -> bool {
        self.all_connected
    }
}
