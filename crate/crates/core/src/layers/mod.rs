//! Ordered layers per ego and population-level layer statistics.

mod dot;
mod summary;

pub use dot::export_ego_dot;
pub use summary::{
    select_k_star, LayerStats, LayerTable, LayerTablePopulation, PopulationAccumulator, PopulationSummary,
    K_STAR_MASS,
};

use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::egonet::{Direction, EgoNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub alters: Vec<String>,
    pub size: usize,
    pub mean_frequency: f64,
}

/// An ego's alters split into layers; layer 0 is the closest (highest mean
/// contact frequency).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerAssignment {
    pub ego_id: String,
    pub direction: Direction,
    pub k: usize,
    pub layers: Vec<Layer>,
}

impl LayerAssignment {
    pub fn layer_of(&self, alter_id: &str) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| l.alters.iter().any(|a| a == alter_id))
    }
}

/// Orders `clustering`'s clusters by descending mean frequency.
///
/// Only the partition matters: the clusterer's own numbering is ignored and
/// the means are recomputed from the ego's weights.
pub fn assign_layers(clustering: &Clustering, ego: &EgoNetwork) -> Result<LayerAssignment> {
    if clustering.assignments.len() != ego.degree() {
        return Err(Error::InvalidArgument(format!(
            "clustering covers {} points but ego `{}` has {} alters",
            clustering.assignments.len(),
            ego.ego_id,
            ego.degree()
        )));
    }
    let k = clustering.k;
    let mut sums = vec![0.0; k];
    let mut members: Vec<Vec<String>> = vec![Vec::new(); k];
    for (alter, &c) in ego.alters.iter().zip(&clustering.assignments) {
        let slot = members
            .get_mut(c)
            .ok_or_else(|| Error::InvalidArgument(format!("cluster index {c} >= k = {k}")))?;
        slot.push(alter.alter_id.clone());
        sums[c] += alter.frequency;
    }
    if members.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("clustering has an empty cluster".into()));
    }
    let mut layers: Vec<Layer> = members
        .into_iter()
        .zip(sums)
        .map(|(alters, sum)| Layer {
            size: alters.len(),
            mean_frequency: sum / alters.len() as f64,
            alters,
        })
        .collect();
    layers.sort_by(|a, b| b.mean_frequency.total_cmp(&a.mean_frequency));
    if let Some(w) = layers.windows(2).find(|w| w[0].mean_frequency <= w[1].mean_frequency) {
        return Err(Error::Invariant(format!(
            "ego `{}`: two layers share mean frequency {}",
            ego.ego_id, w[0].mean_frequency
        )));
    }
    Ok(LayerAssignment {
        ego_id: ego.ego_id.clone(),
        direction: ego.direction,
        k,
        layers,
    })
}
