//! Lloyd's iterative k-means with seeded k-means++ restarts.
//!
//! Only used to cross-check the exact solver; it can stop in a local optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::validate_weights;
use super::Clustering;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;

pub fn lloyd_1d(weights: &[f64], k: usize, restarts: usize, seed: u64) -> Result<Clustering> {
    validate_weights(weights)?;
    if k == 0 || k > weights.len() {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={}", weights.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts.max(1) {
        let Some(c) = run_once(weights, k, &mut rng) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| c.wcss < b.wcss) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("could not form {k} nonempty clusters")))
}

fn seed_centroids(weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = vec![weights[rng.random_range(0..weights.len())]];
    while centroids.len() < k {
        let d2: Vec<f64> = weights
            .iter()
            .map(|&w| centroids.iter().map(|&c| (w - c) * (w - c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (i, d) in d2.iter().enumerate() {
            if target < *d {
                pick = i;
                break;
            }
            target -= d;
        }
        centroids.push(weights[pick]);
    }
    centroids
}

fn nearest(w: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    for (c, &m) in centroids.iter().enumerate() {
        if (w - m).abs() < (w - centroids[best]).abs() {
            best = c;
        }
    }
    best
}

fn run_once(weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Option<Clustering> {
    let mut centroids = seed_centroids(weights, k, rng);
    if centroids.len() < k {
        return None;
    }
    let mut assignments = vec![usize::MAX; weights.len()];
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<usize> = weights.iter().map(|&w| nearest(w, &centroids)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&w, &c) in weights.iter().zip(&assignments) {
            sums[c] += w;
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c] / counts[c] as f64;
            }
        }
    }
    Clustering::from_assignments(weights, &assignments, k)
}
