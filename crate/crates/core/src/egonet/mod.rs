//! The relationship graph and per-ego weight vectors.

mod graph;
mod snapshot;

pub use graph::{assemble_graph, Edge, InteractionGraph, NodeId};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::MonthConvention;

/// Which side of a relationship plays the ego.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Reviewer as ego; alters are the authors it reviews.
    Outgoing,
    /// Author as ego; alters are its reviewers.
    Incoming,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Outgoing => "outgoing",
            Direction::Incoming => "incoming",
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::Outgoing => Direction::Incoming,
            Direction::Incoming => Direction::Outgoing,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outgoing" | "reviewer" => Ok(Direction::Outgoing),
            "incoming" | "author" => Ok(Direction::Incoming),
            other => Err(Error::Usage(format!("unknown direction `{other}`"))),
        }
    }
}

/// Activity and degree thresholds an ego must meet to be analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InclusionCriteria {
    /// Events per month, given or received depending on direction.
    pub min_monthly_rate: f64,
    /// Qualifying relationships in that direction.
    pub min_connections: usize,
}

impl Default for InclusionCriteria {
    fn default() -> Self {
        InclusionCriteria {
            min_monthly_rate: 10.0,
            min_connections: 25,
        }
    }
}

impl InclusionCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_monthly_rate.is_finite() && self.min_monthly_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "min_monthly_rate must be positive, got {}",
                self.min_monthly_rate
            )));
        }
        if self.min_connections == 0 {
            return Err(Error::InvalidArgument("min_connections must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alter {
    pub alter_id: String,
    pub frequency: f64,
}

/// One ego's alters with their contact frequencies, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoNetwork {
    pub ego_id: String,
    pub direction: Direction,
    pub alters: Vec<Alter>,
}

impl EgoNetwork {
    /// Builds a network and puts the alters in canonical order: descending
    /// frequency, ties by ascending alter id.
    pub fn new(ego_id: String, direction: Direction, mut alters: Vec<Alter>) -> Self {
        sort_alters(&mut alters);
        EgoNetwork {
            ego_id,
            direction,
            alters,
        }
    }

    pub fn degree(&self) -> usize {
        self.alters.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.alters.iter().map(|a| a.frequency).collect()
    }
}

pub(crate) fn sort_alters(alters: &mut [Alter]) {
    alters.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then_with(|| a.alter_id.cmp(&b.alter_id))
    });
}

/// Per-ego activity in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoActivity {
    pub degree: usize,
    pub events: u64,
    /// Months between the earliest first event and the latest last event,
    /// floored at one month.
    pub span_months: f64,
}

impl EgoActivity {
    pub fn monthly_rate(&self) -> f64 {
        self.events as f64 / self.span_months
    }
}

pub fn ego_activity(
    graph: &InteractionGraph,
    ego: NodeId,
    direction: Direction,
    months: MonthConvention,
) -> EgoActivity {
    let mut degree = 0;
    let mut events = 0;
    let mut first = i64::MAX;
    let mut last = i64::MIN;
    for e in graph.incident(ego, direction) {
        degree += 1;
        events += e.event_count;
        first = first.min(e.first_ts);
        last = last.max(e.last_ts);
    }
    let span_months = if degree == 0 {
        1.0
    } else {
        months.months_between(first, last).max(1.0)
    };
    EgoActivity {
        degree,
        events,
        span_months,
    }
}

/// Egos meeting both thresholds in `direction`, in node-name order.
pub fn select_active_egos(
    graph: &InteractionGraph,
    direction: Direction,
    criteria: &InclusionCriteria,
    months: MonthConvention,
) -> Vec<NodeId> {
    graph
        .node_ids()
        .filter(|&n| {
            let a = ego_activity(graph, n, direction, months);
            a.degree >= criteria.min_connections && a.monthly_rate() >= criteria.min_monthly_rate
        })
        .collect()
}

pub fn extract_ego_network(graph: &InteractionGraph, ego_id: &str, direction: Direction) -> Result<EgoNetwork> {
    let node = graph
        .node_id(ego_id)
        .ok_or_else(|| Error::EgoNotFound(ego_id.to_string()))?;
    Ok(extract_ego_network_by_id(graph, node, direction))
}

pub fn extract_ego_network_by_id(graph: &InteractionGraph, ego: NodeId, direction: Direction) -> EgoNetwork {
    let alters = graph
        .incident(ego, direction)
        .map(|e| Alter {
            alter_id: graph.node_name(e.alter(direction)).to_string(),
            frequency: e.frequency,
        })
        .collect();
    EgoNetwork::new(graph.node_name(ego).to_string(), direction, alters)
}
