//! Globally optimal 1-D k-means.
//!
//! Optimal 1-D clusters are contiguous runs of the sorted values, so the
//! minimum-WCSS partition into k clusters satisfies
//!
//! ```text
//! D[k][j] = min_{k-1 <= i < j} D[k-1][i] + cost(i, j)
//! ```
//!
//! where `cost(i, j)` is the sum of squared deviations of sorted groups
//! `i..j`. The argmin is monotone in `j`, so each row is filled by divide and
//! conquer in O(d log d), giving O(k·d·log d) overall for `d` distinct values.
//!
//! Equal values are merged into weighted groups before the DP, so a
//! partition never splits a run of equal weights and every cluster of the
//! result has a distinct centroid.

use super::Clustering;
use crate::error::{Error, Result};

pub(crate) fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("weights must not be empty".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidArgument(format!("weights must be finite and positive, got {w}")));
    }
    Ok(())
}

/// DP tables for one weight vector, solved up to some maximum k.
#[derive(Debug, Clone)]
pub struct KMeans1d<'a> {
    weights: &'a [f64],
    /// Point indices in ascending weight order.
    order: Vec<usize>,
    /// `group_end[g]` is one past the last position (in `order`) of group g.
    group_end: Vec<usize>,
    prefix_count: Vec<f64>,
    prefix_sum: Vec<f64>,
    prefix_sq: Vec<f64>,
    /// `cost[k-1][j]`: optimal WCSS of the first j groups in k clusters.
    cost: Vec<Vec<f64>>,
    /// `split[k-1][j]`: start group of the last cluster in that optimum.
    split: Vec<Vec<usize>>,
}

impl<'a> KMeans1d<'a> {
    /// Solves the DP for every k up to `min(k_max, distinct values)`.
    pub fn new(weights: &'a [f64], k_max: usize) -> Result<Self> {
        validate_weights(weights)?;
        if k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));

        let mut group_end = Vec::new();
        for pos in 1..=order.len() {
            if pos == order.len() || weights[order[pos]] != weights[order[pos - 1]] {
                group_end.push(pos);
            }
        }
        let d = group_end.len();

        // Centering on the mean keeps the prefix-sum cost well conditioned.
        let shift = weights.iter().sum::<f64>() / weights.len() as f64;
        let mut prefix_count = vec![0.0; d + 1];
        let mut prefix_sum = vec![0.0; d + 1];
        let mut prefix_sq = vec![0.0; d + 1];
        let mut start = 0;
        for (g, &end) in group_end.iter().enumerate() {
            let n = (end - start) as f64;
            let v = weights[order[start]] - shift;
            prefix_count[g + 1] = prefix_count[g] + n;
            prefix_sum[g + 1] = prefix_sum[g] + n * v;
            prefix_sq[g + 1] = prefix_sq[g] + n * v * v;
            start = end;
        }

        let mut solver = KMeans1d {
            weights,
            order,
            group_end,
            prefix_count,
            prefix_sum,
            prefix_sq,
            cost: Vec::new(),
            split: Vec::new(),
        };
        solver.solve(k_max.min(d));
        Ok(solver)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn distinct_count(&self) -> usize {
        self.group_end.len()
    }

    /// Largest k with a solved table.
    pub fn solved_k(&self) -> usize {
        self.cost.len()
    }

    fn segment_cost(&self, i: usize, j: usize) -> f64 {
        let n = self.prefix_count[j] - self.prefix_count[i];
        let s = self.prefix_sum[j] - self.prefix_sum[i];
        let q = self.prefix_sq[j] - self.prefix_sq[i];
        (q - s * s / n).max(0.0)
    }

    fn solve(&mut self, k_max: usize) {
        let d = self.distinct_count();
        let first: Vec<f64> = (0..=d)
            .map(|j| if j == 0 { 0.0 } else { self.segment_cost(0, j) })
            .collect();
        self.cost.push(first);
        self.split.push(vec![0; d + 1]);
        for k in 2..=k_max {
            let mut row = vec![f64::INFINITY; d + 1];
            let mut arg = vec![0usize; d + 1];
            self.fill_row(k, k, d, k - 1, d - 1, &mut row, &mut arg);
            self.cost.push(row);
            self.split.push(arg);
        }
    }

    /// Fills `row[lo..=hi]` for k clusters knowing the optimal split for
    /// those columns lies in `opt_lo..=opt_hi`.
    #[allow(clippy::too_many_arguments)]
    fn fill_row(
        &self,
        k: usize,
        lo: usize,
        hi: usize,
        opt_lo: usize,
        opt_hi: usize,
        row: &mut [f64],
        arg: &mut [usize],
    ) {
        if lo > hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let prev = &self.cost[k - 2];
        let mut best = f64::INFINITY;
        let mut best_i = opt_lo.max(k - 1);
        for i in opt_lo.max(k - 1)..=opt_hi.min(mid - 1) {
            let c = prev[i] + self.segment_cost(i, mid);
            if c < best {
                best = c;
                best_i = i;
            }
        }
        row[mid] = best;
        arg[mid] = best_i;
        if mid > lo {
            self.fill_row(k, lo, mid - 1, opt_lo, best_i, row, arg);
        }
        self.fill_row(k, mid + 1, hi, best_i, opt_hi, row, arg);
    }

    /// Optimal WCSS for k = 1..=min(k_max, n). Past the number of distinct
    /// values the optimum is exactly zero.
    pub fn curve(&self, k_max: usize) -> Vec<f64> {
        let d = self.distinct_count();
        (1..=k_max.min(self.len()))
            .map(|k| if k <= self.solved_k() { self.cost[k - 1][d] } else { 0.0 })
            .collect()
    }

    /// The optimal clustering at `k`; cluster 0 has the highest centroid.
    pub fn clustering(&self, k: usize) -> Result<Clustering> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} outside 1..={} points",
                self.len()
            )));
        }
        if k > self.distinct_count() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} exceeds the {} distinct weights",
                self.distinct_count()
            )));
        }
        if k > self.solved_k() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} beyond the solved maximum {}",
                self.solved_k()
            )));
        }
        // Group boundaries, innermost (highest) cluster last.
        let mut bounds = Vec::with_capacity(k + 1);
        let mut j = self.distinct_count();
        bounds.push(j);
        for kk in (1..=k).rev() {
            j = self.split[kk - 1][j];
            bounds.push(j);
        }
        bounds.reverse();

        let mut assignments = vec![0usize; self.len()];
        let mut centroids = Vec::with_capacity(k);
        let mut sizes = Vec::with_capacity(k);
        let mut wcss = 0.0;
        for (c, w) in bounds.windows(2).rev().enumerate() {
            let start = if w[0] == 0 { 0 } else { self.group_end[w[0] - 1] };
            let end = self.group_end[w[1] - 1];
            let members = &self.order[start..end];
            let mean = members.iter().map(|&p| self.weights[p]).sum::<f64>() / members.len() as f64;
            for &p in members {
                assignments[p] = c;
                let dev = self.weights[p] - mean;
                wcss += dev * dev;
            }
            centroids.push(mean);
            sizes.push(members.len());
        }
        Ok(Clustering {
            k,
            assignments,
            centroids,
            sizes,
            wcss,
        })
    }
}

/// Optimal k-means partition of scalar weights.
pub fn kmeans_1d_exact(weights: &[f64], k: usize) -> Result<Clustering> {
    if k == 0 || k > weights.len() {
        validate_weights(weights)?;
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={} points",
            weights.len()
        )));
    }
    KMeans1d::new(weights, k)?.clustering(k)
}

/// Optimal WCSS at each k = 1..=min(k_max, n), from one DP pass.
pub fn wcss_curve(weights: &[f64], k_max: usize) -> Result<Vec<f64>> {
    Ok(KMeans1d::new(weights, k_max)?.curve(k_max))
}
