//! Per-ego layer discovery: exact 1-D k-means over contact frequencies,
//! elbow selection of the ego's optimal k, and silhouette validation.

mod elbow;
mod exact;
mod lloyd;
mod silhouette;

pub use elbow::{elbow_optimal_k, ElbowParams};
pub use exact::{kmeans_1d_exact, wcss_curve, KMeans1d};
pub use lloyd::lloyd_1d;
pub use silhouette::{silhouette, silhouette_samples};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::egonet::{Direction, EgoNetwork};
use crate::error::{Error, Result};

/// A partition of one weight vector into `k` nonempty clusters.
///
/// Cluster 0 has the highest centroid; centroids strictly decrease with the
/// cluster index. `assignments[i]` is the cluster of input point `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<f64>,
    pub sizes: Vec<usize>,
    pub wcss: f64,
}

impl Clustering {
    /// Builds a clustering from any labelling, renumbering clusters by
    /// descending centroid. `None` if some label in `0..k` is unused.
    pub fn from_assignments(weights: &[f64], assignments: &[usize], k: usize) -> Option<Clustering> {
        let mut sums = vec![0.0; k];
        let mut sizes = vec![0usize; k];
        for (&w, &c) in weights.iter().zip(assignments) {
            sums[c] += w;
            sizes[c] += 1;
        }
        if sizes.contains(&0) {
            return None;
        }
        let means: Vec<f64> = sums.iter().zip(&sizes).map(|(s, &n)| s / n as f64).collect();
        let mut rank: Vec<usize> = (0..k).collect();
        rank.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
        let mut relabel = vec![0; k];
        for (new, &old) in rank.iter().enumerate() {
            relabel[old] = new;
        }
        let assignments: Vec<usize> = assignments.iter().map(|&c| relabel[c]).collect();
        let centroids: Vec<f64> = rank.iter().map(|&c| means[c]).collect();
        let wcss = weights
            .iter()
            .zip(&assignments)
            .map(|(&w, &c)| (w - centroids[c]).powi(2))
            .sum();
        Some(Clustering {
            k,
            assignments,
            centroids,
            sizes: rank.iter().map(|&c| sizes[c]).collect(),
            wcss,
        })
    }

    /// Whether every cluster is a contiguous run of the weights in sorted
    /// order (higher clusters hold higher values).
    pub fn is_contiguous(&self, weights: &[f64]) -> bool {
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        order
            .windows(2)
            .all(|w| self.assignments[w[0]] <= self.assignments[w[1]] || weights[w[0]] == weights[w[1]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    pub k_max: usize,
    pub elbow: ElbowParams,
    /// Extra k values clustered for every ego regardless of its optimum.
    pub fixed_ks: Vec<usize>,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            k_max: 20,
            elbow: ElbowParams::default(),
            fixed_ks: vec![2, 3],
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if self.fixed_ks.contains(&0) {
            return Err(Error::InvalidArgument("fixed k values must be at least 1".into()));
        }
        self.elbow.validate()
    }
}

/// Everything computed for one ego.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub ego_id: String,
    pub direction: Direction,
    pub degree: usize,
    /// WCSS at k = 1..=min(k_max, degree).
    pub wcss_curve: Vec<f64>,
    pub optimal_k: usize,
    pub clustering: Clustering,
    /// `None` when the optimum is a single cluster.
    pub silhouette: Option<f64>,
    /// Clusterings at the requested fixed k values that the ego can support.
    pub fixed: BTreeMap<usize, Clustering>,
}

/// Stable line-JSON form of a [`ClusteringResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub ego_id: String,
    pub direction: Direction,
    pub degree: usize,
    pub wcss_curve: Vec<f64>,
    pub optimal_k: usize,
    pub centroids: Vec<f64>,
    pub layer_sizes: Vec<usize>,
    pub silhouette: Option<f64>,
}

impl ClusteringResult {
    pub fn record(&self) -> ResultRecord {
        ResultRecord {
            ego_id: self.ego_id.clone(),
            direction: self.direction,
            degree: self.degree,
            wcss_curve: self.wcss_curve.clone(),
            optimal_k: self.optimal_k,
            centroids: self.clustering.centroids.clone(),
            layer_sizes: self.clustering.sizes.clone(),
            silhouette: self.silhouette,
        }
    }
}

/// Curve, elbow, clustering at the optimum, silhouette, and fixed-k
/// clusterings for one ego. Egos with fewer than two alters are rejected
/// with [`Error::DegenerateEgo`].
pub fn analyze_ego(ego: &EgoNetwork, params: &AnalysisParams) -> Result<ClusteringResult> {
    let degree = ego.degree();
    if degree < 2 {
        return Err(Error::DegenerateEgo {
            ego_id: ego.ego_id.clone(),
            degree,
        });
    }
    let weights = ego.frequencies();
    let k_max = params.k_max.min(degree);
    let deepest = params.fixed_ks.iter().copied().max().unwrap_or(0).max(k_max);
    let solver = KMeans1d::new(&weights, deepest)?;

    let wcss_curve = solver.curve(k_max);
    let optimal_k = elbow_optimal_k(&wcss_curve, &params.elbow)?;
    let clustering = solver.clustering(optimal_k)?;
    let silhouette = if optimal_k >= 2 {
        Some(silhouette(&weights, &clustering)?)
    } else {
        None
    };
    let fixed = params
        .fixed_ks
        .iter()
        .filter(|&&k| k <= solver.distinct_count())
        .map(|&k| Ok((k, solver.clustering(k)?)))
        .collect::<Result<_>>()?;

    Ok(ClusteringResult {
        ego_id: ego.ego_id.clone(),
        direction: ego.direction,
        degree,
        wcss_curve,
        optimal_k,
        clustering,
        silhouette,
        fixed,
    })
}
