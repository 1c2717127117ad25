use std::collections::HashMap;

use super::Direction;
use crate::error::{Error, Result};
use crate::ingest::Relationship;
use crate::time::MonthConvention;

/// Dense node index; ids follow the lexicographic order of node names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub event_count: u64,
    pub first_ts: i64,
    pub last_ts: i64,
    pub frequency: f64,
}

impl Edge {
    /// The non-ego endpoint when the edge is viewed from `direction`.
    pub fn alter(&self, direction: Direction) -> NodeId {
        match direction {
            Direction::Outgoing => self.target,
            Direction::Incoming => self.source,
        }
    }
}

/// Immutable directed graph of qualifying relationships, indexed both ways.
///
/// Edges are stored once, sorted by (source, target); `out_offsets` slices
/// them per source and `in_order`/`in_offsets` give each target's incoming
/// edges sorted by source.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    nodes: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    in_order: Vec<u32>,
    in_offsets: Vec<usize>,
    self_edges_dropped: u64,
}

/// Builds the graph from filtered relationships. Self-edges are dropped and
/// counted; a repeated (source, target) pair is an error.
pub fn assemble_graph(relationships: &[Relationship]) -> Result<InteractionGraph> {
    let mut names: Vec<&str> = Vec::with_capacity(relationships.len());
    let mut self_edges = 0u64;
    for r in relationships {
        if r.source_id == r.target_id {
            self_edges += 1;
            continue;
        }
        names.push(&r.source_id);
        names.push(&r.target_id);
    }
    names.sort_unstable();
    names.dedup();
    let nodes: Vec<String> = names.into_iter().map(str::to_string).collect();
    let index: HashMap<String, NodeId> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), NodeId(i as u32)))
        .collect();

    let mut edges = Vec::with_capacity(relationships.len());
    for r in relationships.iter().filter(|r| r.source_id != r.target_id) {
        let frequency = r.contact_frequency.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "relationship {}->{} has zero duration; filter before assembling",
                r.source_id, r.target_id
            ))
        })?;
        edges.push(Edge {
            source: index[&r.source_id],
            target: index[&r.target_id],
            event_count: r.event_count,
            first_ts: r.first_ts,
            last_ts: r.last_ts,
            frequency,
        });
    }
    InteractionGraph::from_parts(nodes, edges, self_edges)
}

impl InteractionGraph {
    pub(crate) fn from_parts(nodes: Vec<String>, mut edges: Vec<Edge>, self_edges_dropped: u64) -> Result<Self> {
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("node table must be strictly sorted".into()));
        }
        let n = nodes.len();
        if edges
            .iter()
            .any(|e| e.source.index() >= n || e.target.index() >= n || e.source == e.target)
        {
            return Err(Error::InvalidArgument("edge endpoint out of range or self-edge".into()));
        }
        edges.sort_unstable_by_key(|e| (e.source, e.target));
        if let Some(w) = edges.windows(2).find(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate relationship {}->{}",
                nodes[w[0].source.index()],
                nodes[w[0].target.index()]
            )));
        }

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.source.index() + 1] += 1;
            in_offsets[e.target.index() + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        // Edges are already in source order, so a stable bucket fill leaves
        // each target's incoming list sorted by source.
        let mut cursor = in_offsets.clone();
        let mut in_order = vec![0u32; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            let slot = &mut cursor[e.target.index()];
            in_order[*slot] = i as u32;
            *slot += 1;
        }

        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), NodeId(i as u32)))
            .collect();
        Ok(InteractionGraph {
            nodes,
            index,
            edges,
            out_offsets,
            in_order,
            in_offsets,
            self_edges_dropped,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn self_edges_dropped(&self) -> u64 {
        self.self_edges_dropped
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// All edges, sorted by (source, target).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, node: NodeId) -> &[Edge] {
        &self.edges[self.out_offsets[node.index()]..self.out_offsets[node.index() + 1]]
    }

    pub fn in_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_order[self.in_offsets[node.index()]..self.in_offsets[node.index() + 1]]
            .iter()
            .map(|&i| &self.edges[i as usize])
    }

    pub fn incident(&self, node: NodeId, direction: Direction) -> Incident<'_> {
        match direction {
            Direction::Outgoing => Incident::Out(self.out_edges(node).iter()),
            Direction::Incoming => Incident::In {
                order: self.in_order[self.in_offsets[node.index()]..self.in_offsets[node.index() + 1]].iter(),
                edges: &self.edges,
            },
        }
    }

    pub fn degree(&self, node: NodeId, direction: Direction) -> usize {
        let offsets = match direction {
            Direction::Outgoing => &self.out_offsets,
            Direction::Incoming => &self.in_offsets,
        };
        offsets[node.index() + 1] - offsets[node.index()]
    }

    /// Relationships for the plain edge-list export, in (source, target) order.
    pub fn to_relationships(&self, months: MonthConvention) -> Vec<Relationship> {
        self.edges
            .iter()
            .map(|e| {
                Relationship::new(
                    self.node_name(e.source).to_string(),
                    self.node_name(e.target).to_string(),
                    e.event_count,
                    e.first_ts,
                    e.last_ts,
                    months,
                )
            })
            .collect()
    }

    /// Every edge flipped; used to check direction symmetry.
    pub fn reversed(&self) -> InteractionGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                source: e.target,
                target: e.source,
                ..*e
            })
            .collect();
        InteractionGraph::from_parts(self.nodes.clone(), edges, self.self_edges_dropped)
            .expect("reversing a valid graph keeps it valid")
    }
}

pub enum Incident<'a> {
    Out(std::slice::Iter<'a, Edge>),
    In {
        order: std::slice::Iter<'a, u32>,
        edges: &'a [Edge],
    },
}

impl<'a> Iterator for Incident<'a> {
    type Item = &'a Edge;

    fn next(&mut self) -> Option<&'a Edge> {
        match self {
            Incident::Out(it) => it.next(),
            Incident::In { order, edges } => order.next().map(|&i| &edges[i as usize]),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            Incident::Out(it) => it.size_hint(),
            Incident::In { order, .. } => order.size_hint(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(s: &str, t: &str) -> Relationship {
        Relationship::new(s.into(), t.into(), 3, 0, 3_000_000, MonthConvention::default())
    }

    #[test]
    fn counts_and_self_edges() {
        let g = assemble_graph(&[rel("a", "b"), rel("b", "c"), rel("c", "d")]).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);

        let g = assemble_graph(&[rel("a", "a"), rel("a", "b")]).unwrap();
        assert_eq!(g.self_edges_dropped(), 1);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn every_edge_indexed_once_each_way() {
        let rels: Vec<_> = [("a", "b"), ("a", "c"), ("b", "c"), ("c", "a"), ("d", "c")]
            .iter()
            .map(|(s, t)| rel(s, t))
            .collect();
        let g = assemble_graph(&rels).unwrap();
        let out_total: usize = g.node_ids().map(|n| g.out_edges(n).len()).sum();
        let in_total: usize = g.node_ids().map(|n| g.in_edges(n).count()).sum();
        assert_eq!(out_total, g.edge_count());
        assert_eq!(in_total, g.edge_count());
        let c = g.node_id("c").unwrap();
        let sources: Vec<_> = g.in_edges(c).map(|e| g.node_name(e.source)).collect();
        assert_eq!(sources, ["a", "b", "d"]);
        assert_eq!(g.degree(c, Direction::Incoming), 3);
    }

    #[test]
    fn duplicate_pair_rejected() {
        assert!(assemble_graph(&[rel("a", "b"), rel("a", "b")]).is_err());
    }

    #[test]
    fn zero_duration_rejected() {
        let r = Relationship::new("a".into(), "b".into(), 1, 5, 5, MonthConvention::default());
        assert!(assemble_graph(&[r]).is_err());
    }
}
