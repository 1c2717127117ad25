use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusteringResult;
use crate::egonet::Direction;
use crate::error::{Error, Result};

/// Probability mass the population-level k* window must capture.
pub const K_STAR_MASS: f64 = 0.66;

/// Which egos contribute to a fixed-k layer table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerTablePopulation {
    /// Every analyzed ego, reclustered at the fixed k.
    #[default]
    All,
    /// Only egos whose own optimal k equals the fixed k.
    Matching,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Population standard deviation (divides by n).
    fn sd(&self) -> f64 {
        let m = self.mean();
        (self.sum_sq / self.n as f64 - m * m).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct FixedKAccumulator {
    egos: u64,
    sizes: Vec<Moments>,
    frequencies: Vec<Moments>,
}

/// Mergeable partial aggregate over clustering results.
///
/// Merging is associative and commutative up to floating-point summation
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationAccumulator {
    population: LayerTablePopulation,
    fixed_ks: Vec<usize>,
    direction: Option<Direction>,
    ego_count: u64,
    optimal_k_counts: BTreeMap<usize, u64>,
    optimal_k_sum: u64,
    silhouette: Moments,
    fixed: BTreeMap<usize, FixedKAccumulator>,
}

impl PopulationAccumulator {
    pub fn new(fixed_ks: &[usize], population: LayerTablePopulation) -> Self {
        let mut ks = fixed_ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        PopulationAccumulator {
            population,
            fixed: ks
                .iter()
                .map(|&k| {
                    (
                        k,
                        FixedKAccumulator {
                            egos: 0,
                            sizes: vec![Moments::default(); k],
                            frequencies: vec![Moments::default(); k],
                        },
                    )
                })
                .collect(),
            fixed_ks: ks,
            direction: None,
            ego_count: 0,
            optimal_k_counts: BTreeMap::new(),
            optimal_k_sum: 0,
            silhouette: Moments::default(),
        }
    }

    fn check_direction(&mut self, d: Direction) -> Result<()> {
        match self.direction {
            None => {
                self.direction = Some(d);
                Ok(())
            }
            Some(mine) if mine == d => Ok(()),
            Some(mine) => Err(Error::InvalidArgument(format!(
                "population mixes {mine} and {d} results"
            ))),
        }
    }

    pub fn push(&mut self, result: &ClusteringResult) -> Result<()> {
        self.check_direction(result.direction)?;
        self.ego_count += 1;
        *self.optimal_k_counts.entry(result.optimal_k).or_default() += 1;
        self.optimal_k_sum += result.optimal_k as u64;
        if let Some(s) = result.silhouette {
            self.silhouette.push(s);
        }
        for (&k, acc) in self.fixed.iter_mut() {
            if self.population == LayerTablePopulation::Matching && result.optimal_k != k {
                continue;
            }
            let Some(c) = result.fixed.get(&k) else {
                continue;
            };
            acc.egos += 1;
            for layer in 0..k {
                acc.sizes[layer].push(c.sizes[layer] as f64);
                acc.frequencies[layer].push(c.centroids[layer]);
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &PopulationAccumulator) -> Result<()> {
        if self.fixed_ks != other.fixed_ks || self.population != other.population {
            return Err(Error::InvalidArgument("merging accumulators with different settings".into()));
        }
        if let Some(d) = other.direction {
            self.check_direction(d)?;
        }
        self.ego_count += other.ego_count;
        for (&k, &n) in &other.optimal_k_counts {
            *self.optimal_k_counts.entry(k).or_default() += n;
        }
        self.optimal_k_sum += other.optimal_k_sum;
        self.silhouette.merge(&other.silhouette);
        for (k, acc) in self.fixed.iter_mut() {
            let o = &other.fixed[k];
            acc.egos += o.egos;
            for (m, om) in acc.sizes.iter_mut().zip(&o.sizes) {
                m.merge(om);
            }
            for (m, om) in acc.frequencies.iter_mut().zip(&o.frequencies) {
                m.merge(om);
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<PopulationSummary> {
        let direction = self.direction.ok_or(Error::EmptyPopulation)?;
        let n = self.ego_count as f64;
        let max_k = *self.optimal_k_counts.keys().next_back().ok_or(Error::EmptyPopulation)?;
        let p_of_x: BTreeMap<usize, f64> = (1..=max_k)
            .map(|k| (k, self.optimal_k_counts.get(&k).copied().unwrap_or(0) as f64 / n))
            .collect();
        let k_star = select_k_star(&p_of_x, K_STAR_MASS);
        let layer_tables = self
            .fixed
            .iter()
            .map(|(&k, acc)| {
                let layers = (0..k)
                    .map(|l| {
                        let (s, f) = (&acc.sizes[l], &acc.frequencies[l]);
                        (acc.egos > 0).then(|| LayerStats {
                            layer: l,
                            alters_mean: s.mean(),
                            alters_sd: s.sd(),
                            frequency_mean: f.mean(),
                            frequency_sd: f.sd(),
                        })
                    })
                    .collect::<Option<Vec<_>>>()
                    .unwrap_or_default();
                (
                    k,
                    LayerTable {
                        k,
                        egos: acc.egos,
                        layers,
                    },
                )
            })
            .collect();
        let k_star_coverage = k_star.iter().map(|k| p_of_x[k]).sum();
        Ok(PopulationSummary {
            k_star_coverage,
            direction,
            ego_count: self.ego_count,
            p_of_x,
            mean_optimal_k: self.optimal_k_sum as f64 / n,
            k_star,
            k_star_min_mass: K_STAR_MASS,
            mean_silhouette: (self.silhouette.n > 0).then(|| self.silhouette.mean()),
            silhouette_egos: self.silhouette.n,
            layer_table_population: self.population,
            layer_tables,
        })
    }
}

/// Smallest run of consecutive k capturing at least `mass` of p(x); among
/// runs of equal length the one with more mass wins, then the smaller k.
pub fn select_k_star(p_of_x: &BTreeMap<usize, f64>, mass: f64) -> Vec<usize> {
    let ks: Vec<usize> = p_of_x.keys().copied().collect();
    let ps: Vec<f64> = p_of_x.values().copied().collect();
    for width in 1..=ks.len() {
        let mut best: Option<(f64, usize)> = None;
        for start in 0..=ks.len() - width {
            let window = &ks[start..start + width];
            if window.windows(2).any(|w| w[1] != w[0] + 1) {
                continue;
            }
            let m: f64 = ps[start..start + width].iter().sum();
            if m + 1e-12 >= mass && best.is_none_or(|(bm, _)| m > bm) {
                best = Some((m, start));
            }
        }
        if let Some((_, start)) = best {
            return ks[start..start + width].to_vec();
        }
    }
    ks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer: usize,
    pub alters_mean: f64,
    pub alters_sd: f64,
    pub frequency_mean: f64,
    pub frequency_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTable {
    pub k: usize,
    pub egos: u64,
    pub layers: Vec<LayerStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub direction: Direction,
    pub ego_count: u64,
    pub p_of_x: BTreeMap<usize, f64>,
    pub mean_optimal_k: f64,
    pub k_star: Vec<usize>,
    /// Required share of egos inside the k* window.
    pub k_star_min_mass: f64,
    /// Share actually covered by k*.
    pub k_star_coverage: f64,
    /// Mean over egos whose optimal k is at least 2.
    pub mean_silhouette: Option<f64>,
    pub silhouette_egos: u64,
    pub layer_table_population: LayerTablePopulation,
    pub layer_tables: BTreeMap<usize, LayerTable>,
}

impl PopulationSummary {
    pub fn from_results<'a, I>(results: I, fixed_ks: &[usize], population: LayerTablePopulation) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ClusteringResult>,
    {
        let mut acc = PopulationAccumulator::new(fixed_ks, population);
        for r in results {
            acc.push(r)?;
        }
        acc.finish()
    }

    /// `k,proportion` rows for plotting the p(x) distribution.
    pub fn p_of_x_csv(&self) -> String {
        let mut out = String::from("k,proportion\n");
        for (k, p) in &self.p_of_x {
            let _ = writeln!(out, "{k},{p:.6}");
        }
        out
    }

    /// Aligned text table: mean ± sd of alters and contact frequency per
    /// layer, one block per fixed k.
    pub fn layer_table_text(&self) -> String {
        let columns = self.layer_tables.keys().copied().max().unwrap_or(0);
        let cell = |s: String| format!("{s:<18}");
        let mut out = String::new();
        let sil = self
            .mean_silhouette
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            out,
            "direction: {}  egos: {}  mean optimal k: {:.2}  k*: {:?}  mean silhouette: {}",
            self.direction, self.ego_count, self.mean_optimal_k, self.k_star, sil
        );
        let mut header = format!("{:<10}{:<20}", "", "");
        for l in 0..columns {
            header.push_str(&cell(format!("Layer {l}")));
        }
        let _ = writeln!(out, "{}", header.trim_end());
        for (k, table) in &self.layer_tables {
            let rows: [(&str, fn(&LayerStats) -> (f64, f64)); 2] = [
                ("Number of Alters", |s| (s.alters_mean, s.alters_sd)),
                ("Contact Frequency", |s| (s.frequency_mean, s.frequency_sd)),
            ];
            for (i, (name, get)) in rows.iter().enumerate() {
                let lead = if i == 0 { format!("k={k}") } else { String::new() };
                let mut line = format!("{lead:<10}{name:<20}");
                for l in 0..columns {
                    let text = match table.layers.get(l) {
                        Some(s) => {
                            let (m, sd) = get(s);
                            format!("{m:.2} ± {sd:.2}")
                        }
                        None => "-".into(),
                    };
                    line.push_str(&cell(text));
                }
                let _ = writeln!(out, "{}", line.trim_end());
            }
        }
        out
    }
}
