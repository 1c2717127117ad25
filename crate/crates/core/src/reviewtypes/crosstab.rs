use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReviewLabel;
use crate::egonet::Direction;
use crate::error::{Error, Result};
use crate::ingest::InteractionEvent;
use crate::layers::LayerAssignment;

/// How events without a label enter the per-layer totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnlabeledPolicy {
    /// Left out of numerator and denominator; reported as a separate count.
    #[default]
    Exclude,
    /// Counted in the per-layer total as a review with neither flag.
    Denominator,
}

/// (ego, alter) → layer lookup for one direction.
#[derive(Debug, Clone, Default)]
pub struct LayerIndex {
    k: usize,
    direction: Option<Direction>,
    by_ego: HashMap<String, HashMap<String, usize>>,
}

impl LayerIndex {
    pub fn new(assignments: &[LayerAssignment]) -> Result<Self> {
        let mut index = LayerIndex::default();
        for a in assignments {
            if index.by_ego.is_empty() {
                index.k = a.k;
                index.direction = Some(a.direction);
            } else if a.k != index.k || Some(a.direction) != index.direction {
                return Err(Error::InvalidArgument(format!(
                    "assignments mix k = {} / {} with k = {} / {}",
                    index.k,
                    index.direction.map_or("?", Direction::as_str),
                    a.k,
                    a.direction.as_str()
                )));
            }
            let alters = index.by_ego.entry(a.ego_id.clone()).or_default();
            for (l, layer) in a.layers.iter().enumerate() {
                for alter in &layer.alters {
                    alters.insert(alter.clone(), l);
                }
            }
        }
        Ok(index)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn direction(&self) -> Option<Direction> {
        self.direction
    }

    pub fn layer(&self, ego: &str, alter: &str) -> Option<usize> {
        self.by_ego.get(ego)?.get(alter).copied()
    }

    pub fn has_ego(&self, ego: &str) -> bool {
        self.by_ego.contains_key(ego)
    }

    pub fn layer_of_event(&self, event: &InteractionEvent, direction: Direction) -> Option<usize> {
        match direction {
            Direction::Outgoing => self.layer(&event.source_id, &event.target_id),
            Direction::Incoming => self.layer(&event.target_id, &event.source_id),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    labeled: u64,
    unlabeled: u64,
    update: u64,
    targeted: u64,
}

/// Mergeable fold over (possibly sharded) event streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosstabAccumulator {
    direction: Direction,
    policy: UnlabeledPolicy,
    layers: Vec<Counts>,
    unassigned: u64,
}

impl CrosstabAccumulator {
    pub fn new(k: usize, direction: Direction, policy: UnlabeledPolicy) -> Self {
        CrosstabAccumulator {
            direction,
            policy,
            layers: vec![Counts::default(); k],
            unassigned: 0,
        }
    }

    pub fn push(&mut self, layer: Option<usize>, label: Option<ReviewLabel>) {
        let Some(c) = layer.and_then(|l| self.layers.get_mut(l)) else {
            self.unassigned += 1;
            return;
        };
        match label {
            Some(l) => {
                c.labeled += 1;
                c.update += u64::from(l.update_encouragement);
                c.targeted += u64::from(l.targeted);
            }
            None => c.unlabeled += 1,
        }
    }

    pub fn merge(&mut self, other: &CrosstabAccumulator) -> Result<()> {
        if other.layers.len() != self.layers.len() || other.direction != self.direction || other.policy != self.policy {
            return Err(Error::InvalidArgument("merging incompatible crosstab accumulators".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.labeled += b.labeled;
            a.unlabeled += b.unlabeled;
            a.update += b.update;
            a.targeted += b.targeted;
        }
        self.unassigned += other.unassigned;
        Ok(())
    }

    pub fn finish(&self) -> LayerCrosstab {
        let share = |n: u64, d: u64| (d > 0).then(|| n as f64 / d as f64);
        let layers: Vec<LayerRow> = self
            .layers
            .iter()
            .enumerate()
            .map(|(layer, c)| {
                let total = match self.policy {
                    UnlabeledPolicy::Exclude => c.labeled,
                    UnlabeledPolicy::Denominator => c.labeled + c.unlabeled,
                };
                LayerRow {
                    layer,
                    total,
                    unlabeled: c.unlabeled,
                    update_count: c.update,
                    update_share: share(c.update, total),
                    targeted_count: c.targeted,
                    targeted_share: share(c.targeted, total),
                }
            })
            .collect();
        LayerCrosstab {
            direction: self.direction,
            k: self.layers.len(),
            policy: self.policy,
            unlabeled: self.layers.iter().map(|c| c.unlabeled).sum(),
            unassigned: self.unassigned,
            layers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub layer: usize,
    /// Denominator for both shares.
    pub total: u64,
    pub unlabeled: u64,
    pub update_count: u64,
    /// `update_count / total`; `None` when `total` is zero.
    pub update_share: Option<f64>,
    pub targeted_count: u64,
    pub targeted_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCrosstab {
    pub direction: Direction,
    pub k: usize,
    pub policy: UnlabeledPolicy,
    /// Events in an assigned layer but without a label.
    pub unlabeled: u64,
    /// Events whose (ego, alter) pair has no layer.
    pub unassigned: u64,
    pub layers: Vec<LayerRow>,
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn cell(count: u64, share: Option<f64>) -> String {
    match share {
        Some(s) => format!("{} ({:.1}%)", thousands(count), 100.0 * s),
        None => "n/a".into(),
    }
}

impl LayerCrosstab {
    /// Aligned text table: one column per layer, rows for each review type
    /// and the totals.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("Count (Percentage) of Reviews".to_string())
            .chain(self.layers.iter().map(|r| format!("Layer {}", r.layer)))
            .collect()];
        rows.push(
            std::iter::once("Update Encouragement".to_string())
                .chain(self.layers.iter().map(|r| cell(r.update_count, r.update_share)))
                .collect(),
        );
        rows.push(
            std::iter::once("Targeted".to_string())
                .chain(self.layers.iter().map(|r| cell(r.targeted_count, r.targeted_share)))
                .collect(),
        );
        rows.push(
            std::iter::once("Total".to_string())
                .chain(self.layers.iter().map(|r| thousands(r.total)))
                .collect(),
        );
        let columns = rows[0].len();
        let widths: Vec<usize> = (0..columns)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!(
            "direction: {}  k: {}  unlabeled: {}  unassigned: {}\n",
            self.direction,
            self.k,
            thousands(self.unlabeled),
            thousands(self.unassigned)
        );
        for row in &rows {
            let mut line = String::new();
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                let _ = write!(line, "{v:<w$}", w = widths[c]);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Attributes each event to the layer its (ego, alter) pair occupies.
///
/// A label from `labels` takes precedence over one carried inline by the
/// event.
pub fn layer_review_crosstab(
    events: &[InteractionEvent],
    labels: &HashMap<String, ReviewLabel>,
    assignments: &[LayerAssignment],
    direction: Direction,
    policy: UnlabeledPolicy,
) -> Result<LayerCrosstab> {
    let index = LayerIndex::new(assignments)?;
    if let Some(d) = index.direction() {
        if d != direction {
            return Err(Error::InvalidArgument(format!(
                "assignments are {d}, crosstab requested for {direction}"
            )));
        }
    }
    let mut acc = CrosstabAccumulator::new(index.k(), direction, policy);
    for ev in events {
        let label = labels.get(&ev.event_id).copied().or(ev.label);
        acc.push(index.layer_of_event(ev, direction), label);
    }
    Ok(acc.finish())
}
