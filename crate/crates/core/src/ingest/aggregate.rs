use std::collections::HashMap;
use std::hash::{BuildHasher, Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InteractionEvent;
use crate::time::MonthConvention;

/// A directed reviewer→author pair aggregated over all its events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relationship {
    pub source_id: String,
    pub target_id: String,
    pub event_count: u64,
    pub first_ts: i64,
    pub last_ts: i64,
    pub duration_months: f64,
    /// Events per month; `None` while the span is zero.
    pub contact_frequency: Option<f64>,
}

impl Relationship {
    pub fn new(
        source_id: String,
        target_id: String,
        event_count: u64,
        first_ts: i64,
        last_ts: i64,
        months: MonthConvention,
    ) -> Self {
        let duration_months = months.months_between(first_ts, last_ts);
        let contact_frequency = (duration_months > 0.0).then(|| event_count as f64 / duration_months);
        Relationship {
            source_id,
            target_id,
            event_count,
            first_ts,
            last_ts,
            duration_months,
            contact_frequency,
        }
    }

    pub fn span_seconds(&self) -> i64 {
        self.last_ts - self.first_ts
    }
}

#[derive(Debug, Clone, Copy)]
struct PairAccumulator {
    count: u64,
    first: i64,
    last: i64,
}

impl PairAccumulator {
    fn add(&mut self, ts: i64) {
        self.count += 1;
        self.first = self.first.min(ts);
        self.last = self.last.max(ts);
    }

    fn merge(&mut self, other: &PairAccumulator) {
        self.count += other.count;
        self.first = self.first.min(other.first);
        self.last = self.last.max(other.last);
    }
}

/// Order-independent fold of events into per-pair counts and spans.
///
/// Keys are nested (source, then target) so the hot path looks up borrowed
/// strings and allocates only when a new pair appears.
#[derive(Debug, Default, Clone)]
pub struct RelationshipBuilder {
    pairs: HashMap<String, HashMap<String, PairAccumulator>>,
}

impl RelationshipBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, event: &InteractionEvent) {
        self.add_raw(&event.source_id, &event.target_id, event.timestamp);
    }

    pub fn add_raw(&mut self, source: &str, target: &str, ts: i64) {
        let targets = match self.pairs.get_mut(source) {
            Some(t) => t,
            None => self.pairs.entry(source.to_string()).or_default(),
        };
        match targets.get_mut(target) {
            Some(acc) => acc.add(ts),
            None => {
                targets.insert(
                    target.to_string(),
                    PairAccumulator {
                        count: 1,
                        first: ts,
                        last: ts,
                    },
                );
            }
        }
    }

    pub fn merge(&mut self, other: RelationshipBuilder) {
        for (source, targets) in other.pairs {
            let mine = self.pairs.entry(source).or_default();
            for (target, acc) in targets {
                mine.entry(target)
                    .and_modify(|m| m.merge(&acc))
                    .or_insert(acc);
            }
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.values().map(HashMap::len).sum()
    }

    /// Relationships sorted by (source, target).
    pub fn finish(self, months: MonthConvention) -> Vec<Relationship> {
        let mut out: Vec<Relationship> = self
            .pairs
            .into_iter()
            .flat_map(|(source, targets)| {
                targets.into_iter().map(move |(target, acc)| {
                    Relationship::new(source.clone(), target, acc.count, acc.first, acc.last, months)
                })
            })
            .collect();
        out.sort_unstable_by(|a, b| {
            (a.source_id.as_str(), a.target_id.as_str()).cmp(&(b.source_id.as_str(), b.target_id.as_str()))
        });
        out
    }
}

pub fn build_relationships(events: &[InteractionEvent], months: MonthConvention) -> Vec<Relationship> {
    let mut builder = RelationshipBuilder::new();
    for e in events {
        builder.add(e);
    }
    builder.finish(months)
}

/// Same result as [`build_relationships`], aggregated in `shards` hash
/// partitions of the (source, target) key and merged.
pub fn build_relationships_sharded(
    events: &[InteractionEvent],
    shards: usize,
    months: MonthConvention,
) -> Vec<Relationship> {
    let shards = shards.max(1);
    // Fixed keys so shard membership does not vary between runs.
    let hasher = std::hash::BuildHasherDefault::<std::collections::hash_map::DefaultHasher>::default();
    let shard_of = |e: &InteractionEvent| {
        let mut h = hasher.build_hasher();
        (&e.source_id, &e.target_id).hash(&mut h);
        (h.finish() % shards as u64) as usize
    };
    let partials: Vec<RelationshipBuilder> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut b = RelationshipBuilder::new();
            for e in events.iter().filter(|e| shard_of(e) == shard) {
                b.add(e);
            }
            b
        })
        .collect();
    let mut merged = RelationshipBuilder::new();
    for p in partials {
        merged.merge(p);
    }
    merged.finish(months)
}

/// Qualification rule for a relationship.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelationshipFilter {
    pub min_events: u64,
    /// Inclusive.
    pub min_months: f64,
}

impl Default for RelationshipFilter {
    fn default() -> Self {
        RelationshipFilter {
            min_events: 2,
            min_months: 1.0,
        }
    }
}

impl RelationshipFilter {
    pub fn qualifies(&self, rel: &Relationship, months: MonthConvention) -> bool {
        rel.event_count >= self.min_events && rel.span_seconds() >= months.min_span_seconds(self.min_months)
    }

    pub fn apply(&self, relationships: Vec<Relationship>, months: MonthConvention) -> Vec<Relationship> {
        relationships
            .into_iter()
            .filter(|r| self.qualifies(r, months))
            .map(|r| Relationship::new(r.source_id, r.target_id, r.event_count, r.first_ts, r.last_ts, months))
            .collect()
    }
}

/// Keeps relationships with at least two events spanning at least one month.
pub fn filter_relationships(relationships: Vec<Relationship>, months: MonthConvention) -> Vec<Relationship> {
    RelationshipFilter::default().apply(relationships, months)
}
