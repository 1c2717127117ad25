//! Synthetic ego networks and event logs with planted layer structure.
//!
//! Every ego draws from its own ChaCha8 stream (`seed`, stream = ego index),
//! so generation parallelises without changing a single output byte.

mod presets;

pub use presets::{preset_layers, LAYER_TARGETED_SHARE, LAYER_UPDATE_SHARE};

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::egonet::{Alter, Direction, EgoNetwork};
use crate::error::{Error, Result};
use crate::reviewtypes::ReviewLabel;
use crate::time::{format_iso8601, MonthConvention};

/// 2010-01-01T00:00:00Z
pub const SYNTH_EPOCH: i64 = 1_262_304_000;
pub const SPAN_MONTHS: f64 = 12.0;
pub const MIN_FREQUENCY: f64 = 0.05;
pub const EVENT_LOG_HEADER: [&str; 4] = ["event_id", "source", "target", "timestamp"];

const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub alter_count_mean: f64,
    #[serde(default)]
    pub alter_count_dispersion: f64,
    pub frequency_mean: f64,
    #[serde(default)]
    pub frequency_sd: f64,
    #[serde(default)]
    pub update_prob: f64,
    #[serde(default)]
    pub targeted_prob: f64,
}

impl LayerSpec {
    pub fn new(alter_count_mean: f64, alter_count_dispersion: f64, frequency_mean: f64, frequency_sd: f64) -> Self {
        LayerSpec {
            alter_count_mean,
            alter_count_dispersion,
            frequency_mean,
            frequency_sd,
            update_prob: 0.0,
            targeted_prob: 0.0,
        }
    }

    pub fn with_labels(mut self, update_prob: f64, targeted_prob: f64) -> Self {
        self.update_prob = update_prob;
        self.targeted_prob = targeted_prob;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        let finite = [
            self.alter_count_mean,
            self.alter_count_dispersion,
            self.frequency_mean,
            self.frequency_sd,
            self.update_prob,
            self.targeted_prob,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("layer spec has a non-finite parameter".into());
        }
        if self.alter_count_mean <= 0.0 || self.alter_count_dispersion < 0.0 {
            return bad(format!(
                "alter count needs mean > 0 and dispersion >= 0, got {} / {}",
                self.alter_count_mean, self.alter_count_dispersion
            ));
        }
        if self.frequency_sd < 0.0 || self.frequency_mean <= MIN_FREQUENCY {
            return bad(format!(
                "frequency needs mean > {MIN_FREQUENCY} and sd >= 0, got {} / {}",
                self.frequency_mean, self.frequency_sd
            ));
        }
        if self.frequency_mean - 3.0 * self.frequency_sd <= 0.0 {
            return bad(format!(
                "frequency mean {} is within 3 sd ({}) of zero",
                self.frequency_mean, self.frequency_sd
            ));
        }
        if !(0.0..=1.0).contains(&self.update_prob) || !(0.0..=1.0).contains(&self.targeted_prob) {
            return bad("label probabilities must lie in [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyModel {
    /// Normal, resampled until above [`MIN_FREQUENCY`].
    #[default]
    Gaussian,
    /// Log-normal with the layer's mean and sd; heavier right tail.
    LogNormal,
}

enum Sampler {
    Normal(Normal<f64>),
    LogNormal(LogNormal<f64>),
}

impl Sampler {
    fn new(spec: &LayerSpec, model: FrequencyModel) -> Result<Self> {
        let err = |e: rand_distr::NormalError| Error::InvalidArgument(format!("frequency distribution: {e}"));
        Ok(match model {
            FrequencyModel::Gaussian => Sampler::Normal(Normal::new(spec.frequency_mean, spec.frequency_sd).map_err(err)?),
            FrequencyModel::LogNormal => {
                let cv2 = (spec.frequency_sd / spec.frequency_mean).powi(2);
                let sigma2 = cv2.ln_1p();
                let mu = spec.frequency_mean.ln() - sigma2 / 2.0;
                Sampler::LogNormal(LogNormal::new(mu, sigma2.sqrt()).map_err(err)?)
            }
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let f = match self {
                Sampler::Normal(d) => d.sample(rng),
                Sampler::LogNormal(d) => d.sample(rng),
            };
            if f > MIN_FREQUENCY {
                return f;
            }
        }
    }
}

fn draw_count(spec: &LayerSpec, rng: &mut ChaCha8Rng) -> usize {
    let n = if spec.alter_count_dispersion == 0.0 {
        spec.alter_count_mean
    } else {
        Normal::new(spec.alter_count_mean, spec.alter_count_dispersion)
            .expect("validated dispersion")
            .sample(rng)
    };
    n.round().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedAlter {
    pub alter_id: String,
    pub layer: usize,
    /// Drawn frequency, before rounding to whole events.
    pub frequency: f64,
    /// Events emitted for this relationship in an event log.
    pub event_count: u64,
}

impl PlantedAlter {
    /// The frequency ingest reports for this relationship.
    pub fn log_frequency(&self) -> f64 {
        self.event_count as f64 / SPAN_MONTHS
    }
}

/// Ground truth for one ego.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEgo {
    pub index: u64,
    pub ego_id: String,
    pub component: usize,
    pub true_k: usize,
    pub alters: Vec<PlantedAlter>,
}

impl PlantedEgo {
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.true_k];
        for a in &self.alters {
            sizes[a.layer] += 1;
        }
        sizes
    }

    pub fn network(&self, direction: Direction) -> EgoNetwork {
        self.to_network(direction, |a| a.frequency)
    }

    /// The network as it reads back from the generated event log.
    pub fn log_network(&self, direction: Direction) -> EgoNetwork {
        self.to_network(direction, PlantedAlter::log_frequency)
    }

    fn to_network(&self, direction: Direction, f: impl Fn(&PlantedAlter) -> f64) -> EgoNetwork {
        let alters = self
            .alters
            .iter()
            .map(|a| Alter {
                alter_id: a.alter_id.clone(),
                frequency: f(a),
            })
            .collect();
        EgoNetwork::new(self.ego_id.clone(), direction, alters)
    }
}

pub fn ego_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn validate_layers(layers: &[LayerSpec]) -> Result<()> {
    if layers.is_empty() {
        return Err(Error::InvalidArgument("at least one layer is required".into()));
    }
    layers.iter().try_for_each(LayerSpec::validate)
}

fn draw_ego(index: u64, component: usize, layers: &[LayerSpec], model: FrequencyModel, rng: &mut ChaCha8Rng) -> Result<PlantedEgo> {
    let mut alters = Vec::new();
    for (layer, spec) in layers.iter().enumerate() {
        let sampler = Sampler::new(spec, model)?;
        let n = draw_count(spec, rng);
        for _ in 0..n {
            let frequency = sampler.draw(rng);
            alters.push(PlantedAlter {
                alter_id: format!("e{index}.{}", alters.len()),
                layer,
                frequency,
                event_count: ((frequency * SPAN_MONTHS).round() as u64).max(2),
            });
        }
    }
    Ok(PlantedEgo {
        index,
        ego_id: format!("e{index}"),
        component,
        true_k: layers.len(),
        alters,
    })
}

/// One ego with the given layers, drawn from stream `index` of `seed`.
pub fn generate_ego(index: u64, layers: &[LayerSpec], model: FrequencyModel, seed: u64) -> Result<(EgoNetwork, PlantedEgo)> {
    validate_layers(layers)?;
    let planted = draw_ego(index, 0, layers, model, &mut ego_rng(seed, index))?;
    Ok((planted.network(Direction::Outgoing), planted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub layers: Vec<LayerSpec>,
}

/// A population of egos drawn from a weighted mixture of layer plans.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub egos: u64,
    pub components: Vec<MixtureComponent>,
    pub model: FrequencyModel,
    /// `Outgoing`: the ego is the event source. `Incoming`: the target.
    pub direction: Direction,
    pub months: MonthConvention,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidArgument("mixture has no components".into()));
        }
        let mut total = 0.0;
        for c in &self.components {
            if !c.weight.is_finite() || c.weight < 0.0 {
                return Err(Error::InvalidArgument(format!("bad mixture weight {}", c.weight)));
            }
            total += c.weight;
            validate_layers(&c.layers)?;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }

    fn pick_component(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        self.components.iter().rposition(|c| c.weight > 0.0).unwrap_or(0)
    }

    fn span_seconds(&self) -> i64 {
        (SPAN_MONTHS * self.months.seconds_per_month()).round() as i64
    }

    fn ego(&self, index: u64, with_events: bool) -> Result<(PlantedEgo, Vec<SynthEvent>)> {
        let mut rng = ego_rng(self.seed, index);
        let component = self.pick_component(&mut rng);
        let layers = &self.components[component].layers;
        let planted = draw_ego(index, component, layers, self.model, &mut rng)?;
        let events = if with_events {
            self.events_for(&planted, layers, &mut rng)
        } else {
            Vec::new()
        };
        Ok((planted, events))
    }

    fn events_for(&self, ego: &PlantedEgo, layers: &[LayerSpec], rng: &mut ChaCha8Rng) -> Vec<SynthEvent> {
        let span = self.span_seconds();
        let mut out = Vec::with_capacity(ego.alters.iter().map(|a| a.event_count as usize).sum());
        for (j, alter) in ego.alters.iter().enumerate() {
            let n = alter.event_count as usize;
            let mut ts: Vec<i64> = Vec::with_capacity(n);
            ts.push(SYNTH_EPOCH);
            ts.push(SYNTH_EPOCH + span);
            ts.extend((2..n).map(|_| SYNTH_EPOCH + rng.random_range(0..=span)));
            ts.sort_unstable();
            let spec = &layers[alter.layer];
            for (m, timestamp) in ts.into_iter().enumerate() {
                let label = ReviewLabel {
                    update_encouragement: rng.random_bool(spec.update_prob),
                    targeted: rng.random_bool(spec.targeted_prob),
                };
                let (source, target) = match self.direction {
                    Direction::Outgoing => (ego.ego_id.clone(), alter.alter_id.clone()),
                    Direction::Incoming => (alter.alter_id.clone(), ego.ego_id.clone()),
                };
                out.push(SynthEvent {
                    event_id: format!("{}.{j}.{m}", ego.ego_id),
                    source,
                    target,
                    timestamp,
                    label,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthEvent {
    pub event_id: String,
    pub source: String,
    pub target: String,
    pub timestamp: i64,
    pub label: ReviewLabel,
}

/// Ground truth for every ego, in index order. No events are drawn.
pub fn generate_population(spec: &SynthSpec) -> Result<Vec<PlantedEgo>> {
    spec.validate()?;
    (0..spec.egos)
        .into_par_iter()
        .map(|i| spec.ego(i, false).map(|(p, _)| p))
        .collect()
}

/// One ego plus its events, exactly as [`write_event_log`] emits them.
pub fn generate_ego_events(spec: &SynthSpec, index: u64) -> Result<(PlantedEgo, Vec<SynthEvent>)> {
    spec.validate()?;
    spec.ego(index, true)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    pub egos: u64,
    pub alters: u64,
    pub events: u64,
}

/// Streams the event log, the per-event label file and the line-JSON
/// ledger in canonical order (ego index, alter index, event index).
pub fn write_event_log<E: Write, L: Write, G: Write>(
    spec: &SynthSpec,
    events: E,
    labels: L,
    ledger: G,
) -> Result<SynthStats> {
    spec.validate()?;
    let mut ev = csv::Writer::from_writer(events);
    let mut lab = csv::Writer::from_writer(labels);
    let mut led = ledger;
    ev.write_record(EVENT_LOG_HEADER)?;
    lab.write_record(crate::reviewtypes::LABEL_HEADER)?;
    let mut stats = SynthStats::default();
    let mut start = 0u64;
    while start < spec.egos {
        let end = (start + CHUNK as u64).min(spec.egos);
        let chunk: Vec<(PlantedEgo, Vec<SynthEvent>)> =
            (start..end).into_par_iter().map(|i| spec.ego(i, true)).collect::<Result<_>>()?;
        for (planted, evs) in chunk {
            for e in &evs {
                ev.write_record([&e.event_id, &e.source, &e.target, &format_iso8601(e.timestamp)])?;
                let bit = |b: bool| if b { "1" } else { "0" };
                lab.write_record([e.event_id.as_str(), bit(e.label.update_encouragement), bit(e.label.targeted)])?;
            }
            serde_json::to_writer(&mut led, &planted)?;
            led.write_all(b"\n").map_err(|e| Error::io("ledger", e))?;
            stats.egos += 1;
            stats.alters += planted.alters.len() as u64;
            stats.events += evs.len() as u64;
        }
        start = end;
    }
    ev.flush().map_err(|e| Error::io("events", e))?;
    lab.flush().map_err(|e| Error::io("labels", e))?;
    led.flush().map_err(|e| Error::io("ledger", e))?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(components: Vec<MixtureComponent>) -> SynthSpec {
        SynthSpec {
            egos: 20,
            components,
            model: FrequencyModel::Gaussian,
            direction: Direction::Outgoing,
            months: MonthConvention::default(),
            seed: 7,
        }
    }

    #[test]
    fn zero_variance_layer() {
        let (net, planted) = generate_ego(0, &[LayerSpec::new(10.0, 0.0, 5.0, 0.0)], FrequencyModel::Gaussian, 1).unwrap();
        assert_eq!(net.degree(), 10);
        assert!(net.alters.iter().all(|a| a.frequency == 5.0));
        assert_eq!(planted.layer_sizes(), vec![10]);
    }

    #[test]
    fn frequency_two_gives_24_events() {
        let (_, planted) = generate_ego(3, &[LayerSpec::new(4.0, 0.0, 2.0, 0.0)], FrequencyModel::Gaussian, 1).unwrap();
        assert!(planted.alters.iter().all(|a| a.event_count == 24 && a.log_frequency() == 2.0));
    }

    #[test]
    fn invalid_specs() {
        let m = FrequencyModel::Gaussian;
        assert!(generate_ego(0, &[], m, 0).is_err());
        assert!(generate_ego(0, &[LayerSpec::new(5.0, 1.0, 1.0, 0.5)], m, 0).is_err());
        assert!(generate_ego(0, &[LayerSpec::new(0.0, 1.0, 5.0, 0.5)], m, 0).is_err());
        assert!(generate_ego(0, &[LayerSpec::new(5.0, 1.0, 5.0, 0.5).with_labels(1.5, 0.0)], m, 0).is_err());
        let s = spec(vec![MixtureComponent {
            weight: 0.5,
            layers: vec![LayerSpec::new(5.0, 0.0, 5.0, 0.0)],
        }]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let layers = preset_layers(Direction::Outgoing, 3, 0.2).unwrap();
        let a = generate_ego(5, &layers, FrequencyModel::Gaussian, 42).unwrap();
        let b = generate_ego(5, &layers, FrequencyModel::Gaussian, 42).unwrap();
        let c = generate_ego(5, &layers, FrequencyModel::Gaussian, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn lognormal_matches_moments() {
        let (_, p) = generate_ego(0, &[LayerSpec::new(20000.0, 0.0, 3.0, 0.9)], FrequencyModel::LogNormal, 9).unwrap();
        let f: Vec<f64> = p.alters.iter().map(|a| a.frequency).collect();
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let sd = (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / f.len() as f64).sqrt();
        assert!((mean - 3.0).abs() < 0.05, "{mean}");
        assert!((sd - 0.9).abs() < 0.05, "{sd}");
    }

    #[test]
    fn events_span_twelve_months() {
        let s = spec(vec![MixtureComponent {
            weight: 1.0,
            layers: vec![LayerSpec::new(3.0, 0.0, 1.0, 0.1)],
        }]);
        let (planted, events) = generate_ego_events(&s, 2).unwrap();
        let n: u64 = planted.alters.iter().map(|a| a.event_count).sum();
        assert_eq!(events.len() as u64, n);
        let span = events.iter().map(|e| e.timestamp).max().unwrap() - events.iter().map(|e| e.timestamp).min().unwrap();
        assert_eq!(span, 31_560_192);
        assert!(events.iter().all(|e| e.source == "e2"));
    }

    #[test]
    fn population_matches_event_generation() {
        let s = spec(vec![
            MixtureComponent {
                weight: 0.5,
                layers: preset_layers(Direction::Outgoing, 2, 0.2).unwrap(),
            },
            MixtureComponent {
                weight: 0.5,
                layers: preset_layers(Direction::Outgoing, 3, 0.2).unwrap(),
            },
        ]);
        let pop = generate_population(&s).unwrap();
        for p in &pop {
            assert_eq!(p, &generate_ego_events(&s, p.index).unwrap().0);
        }
        assert!(pop.iter().any(|p| p.true_k == 2) && pop.iter().any(|p| p.true_k == 3));
    }

    #[test]
    fn written_log_is_deterministic() {
        let s = spec(vec![MixtureComponent {
            weight: 1.0,
            layers: vec![LayerSpec::new(3.0, 1.0, 2.0, 0.3).with_labels(0.3, 0.6)],
        }]);
        let run = || {
            let (mut e, mut l, mut g) = (Vec::new(), Vec::new(), Vec::new());
            let stats = write_event_log(&s, &mut e, &mut l, &mut g).unwrap();
            (e, l, g, stats)
        };
        let a = run();
        assert_eq!(a, run());
        assert_eq!(String::from_utf8(a.2).unwrap().lines().count(), 20);
        assert_eq!(String::from_utf8(a.0).unwrap().lines().count() as u64, a.3.events + 1);
    }
}
