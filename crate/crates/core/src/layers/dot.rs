//! Graphviz rendering of one ego network, shaded by layer.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::LayerAssignment;
use crate::egonet::{Direction, EgoNetwork};
use crate::error::{Error, Result};

const MAX_PEN_WIDTH: f64 = 6.0;
const LIGHTEST_GRAY: usize = 80;

fn quote(id: &str) -> String {
    let mut out = String::with_capacity(id.len() + 2);
    out.push('"');
    for ch in id.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

/// Layer 0 is black; outer layers get lighter, up to gray80.
fn layer_color(layer: usize, k: usize) -> String {
    let level = if k <= 1 { 0 } else { layer * LIGHTEST_GRAY / (k - 1) };
    format!("gray{level}")
}

/// DOT text with the ego in red at the centre, alters filled by layer and
/// edge pen width proportional to contact frequency.
pub fn export_ego_dot(assignment: &LayerAssignment, ego: &EgoNetwork) -> Result<String> {
    if assignment.ego_id != ego.ego_id {
        return Err(Error::InvalidArgument(format!(
            "assignment is for `{}`, ego is `{}`",
            assignment.ego_id, ego.ego_id
        )));
    }
    let layer_of: HashMap<&str, usize> = assignment
        .layers
        .iter()
        .enumerate()
        .flat_map(|(l, layer)| layer.alters.iter().map(move |a| (a.as_str(), l)))
        .collect();
    let max_freq = ego.alters.iter().map(|a| a.frequency).fold(0.0, f64::max);

    let mut out = String::new();
    let _ = writeln!(out, "digraph ego {{");
    let _ = writeln!(out, "  layout=neato;");
    let _ = writeln!(out, "  node [shape=circle, style=filled, label=\"\"];");
    let _ = writeln!(out, "  {} [fillcolor=red, width=0.4];", quote(&ego.ego_id));
    for alter in &ego.alters {
        let layer = *layer_of.get(alter.alter_id.as_str()).ok_or_else(|| {
            Error::InvalidArgument(format!("alter `{}` has no layer", alter.alter_id))
        })?;
        let _ = writeln!(
            out,
            "  {} [fillcolor={}, layer_index={layer}];",
            quote(&alter.alter_id),
            layer_color(layer, assignment.k)
        );
    }
    for alter in &ego.alters {
        let (from, to) = match ego.direction {
            Direction::Outgoing => (&ego.ego_id, &alter.alter_id),
            Direction::Incoming => (&alter.alter_id, &ego.ego_id),
        };
        let width = MAX_PEN_WIDTH * alter.frequency / max_freq;
        let _ = writeln!(
            out,
            "  {} -> {} [penwidth={width:.4}, weight={:.6}];",
            quote(from),
            quote(to),
            alter.frequency
        );
    }
    out.push_str("}\n");
    Ok(out)
}
