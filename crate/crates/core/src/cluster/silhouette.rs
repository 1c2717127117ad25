//! Rousseeuw silhouette on the frequency axis.
//!
//! Distances are absolute differences. Each cluster's members are sorted
//! with prefix sums, so the summed distance from a point to a whole
//! cluster costs one binary search.

use super::Clustering;
use crate::error::{Error, Result};

struct SortedCluster {
    values: Vec<f64>,
    prefix: Vec<f64>,
}

impl SortedCluster {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        for v in &values {
            prefix.push(prefix.last().unwrap() + v);
        }
        SortedCluster { values, prefix }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    /// Σ |x - y| over members y.
    fn distance_sum(&self, x: f64) -> f64 {
        let n = self.values.len();
        let below = self.values.partition_point(|&v| v < x);
        let sum_below = self.prefix[below];
        let sum_above = self.prefix[n] - sum_below;
        (x * below as f64 - sum_below) + (sum_above - x * (n - below) as f64)
    }
}

/// Per-point silhouette values for an arbitrary assignment into `k` clusters.
pub fn silhouette_samples(weights: &[f64], assignments: &[usize], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::SilhouetteUndefinedForK1);
    }
    if weights.len() != assignments.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights but {} assignments",
            weights.len(),
            assignments.len()
        )));
    }
    let mut members = vec![Vec::new(); k];
    for (&w, &c) in weights.iter().zip(assignments) {
        members
            .get_mut(c)
            .ok_or_else(|| Error::InvalidArgument(format!("cluster index {c} >= k = {k}")))?
            .push(w);
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("cluster {c} is empty")));
    }
    let clusters: Vec<SortedCluster> = members.into_iter().map(SortedCluster::new).collect();

    Ok(weights
        .iter()
        .zip(assignments)
        .map(|(&x, &own)| {
            let home = &clusters[own];
            if home.len() == 1 {
                return 0.0;
            }
            let a = home.distance_sum(x) / (home.len() - 1) as f64;
            let b = clusters
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != own)
                .map(|(_, other)| other.distance_sum(x) / other.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect())
}

/// Mean silhouette of a clustering.
pub fn silhouette(weights: &[f64], clustering: &Clustering) -> Result<f64> {
    let s = silhouette_samples(weights, &clustering.assignments, clustering.k)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::kmeans_1d_exact;

    #[test]
    fn zero_intra_distance_gives_one() {
        let w = [1.0, 1.0, 8.0, 8.0];
        let c = kmeans_1d_exact(&w, 2).unwrap();
        assert_eq!(silhouette(&w, &c).unwrap(), 1.0);
    }

    #[test]
    fn hand_evaluated_pairs() {
        // s(1) = s(9) = (7.5 - 1) / 7.5, s(2) = s(8) = (6.5 - 1) / 6.5
        let w = [1.0, 2.0, 8.0, 9.0];
        let c = kmeans_1d_exact(&w, 2).unwrap();
        let expected = ((6.5 / 7.5) + (5.5 / 6.5)) / 2.0;
        let got = silhouette(&w, &c).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.8564).abs() < 1e-4);
    }

    #[test]
    fn singleton_cluster_scores_zero() {
        let s = silhouette_samples(&[5.0, 1.0, 1.0], &[0, 1, 1], 2).unwrap();
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], 1.0);
    }

    #[test]
    fn errors() {
        let c = kmeans_1d_exact(&[1.0, 2.0], 1).unwrap();
        assert!(matches!(silhouette(&[1.0, 2.0], &c), Err(Error::SilhouetteUndefinedForK1)));
        assert!(silhouette_samples(&[1.0, 2.0], &[0, 0], 2).is_err());
        assert!(silhouette_samples(&[1.0, 2.0], &[0, 2], 2).is_err());
        assert!(silhouette_samples(&[1.0, 2.0], &[0], 2).is_err());
    }
}
