use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{AnalysisParams, ElbowParams};
use crate::egonet::{Direction, InclusionCriteria};
use crate::error::{Error, Result};
use crate::ingest::{IngestConfig, RelationshipFilter};
use crate::layers::LayerTablePopulation;
use crate::reviewtypes::{Lexicon, UnlabeledPolicy};
use crate::synth::{preset_layers, FrequencyModel, MixtureComponent, SynthSpec};
use crate::time::MonthConvention;

pub const MAX_K: usize = 100;
pub const MAX_PARALLELISM: usize = 1024;

/// Everything a run needs; read from one TOML file, then overridden by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Event logs, read by `ingest` and `crosstab`.
    pub inputs: Vec<PathBuf>,
    /// Edge list for `analyze`; defaults to the snapshot written by `ingest`.
    pub edges: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every core. Never affects output bytes, so it
    /// is left out of the manifest.
    #[serde(skip_serializing)]
    pub parallelism: usize,
    pub month_days: MonthConvention,
    pub directions: Vec<Direction>,
    pub ingest: IngestConfig,
    pub relationship: RelationshipFilter,
    pub inclusion: InclusionCriteria,
    pub analysis: AnalysisConfig,
    pub labels: LabelConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            edges: None,
            output_dir: PathBuf::from("out"),
            seed: 42,
            parallelism: 0,
            month_days: MonthConvention::default(),
            directions: vec![Direction::Outgoing, Direction::Incoming],
            ingest: IngestConfig::default(),
            relationship: RelationshipFilter::default(),
            inclusion: InclusionCriteria::default(),
            analysis: AnalysisConfig::default(),
            labels: LabelConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k_max: usize,
    pub fixed_ks: Vec<usize>,
    pub elbow: ElbowParams,
    pub layer_table_population: LayerTablePopulation,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let p = AnalysisParams::default();
        AnalysisConfig {
            k_max: p.k_max,
            fixed_ks: p.fixed_ks,
            elbow: p.elbow,
            layer_table_population: LayerTablePopulation::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    File,
    Heuristic,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub source: LabelSource,
    pub path: Option<PathBuf>,
    pub delimiter: char,
    pub crosstab_k: usize,
    pub unlabeled: UnlabeledPolicy,
    pub lexicon: Lexicon,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            source: LabelSource::None,
            path: None,
            delimiter: ',',
            crosstab_k: 3,
            unlabeled: UnlabeledPolicy::default(),
            lexicon: Lexicon::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub k: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub egos: u64,
    /// Preset layer counts; `Outgoing` uses the reviewer means, `Incoming`
    /// the author means.
    pub mixture: Vec<MixtureEntry>,
    pub cv: f64,
    /// Explicit layer plans; when non-empty, `mixture` and `cv` are ignored.
    pub components: Vec<MixtureComponent>,
    pub frequency_model: FrequencyModel,
    pub direction: Direction,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            egos: 1000,
            mixture: vec![MixtureEntry { k: 3, weight: 1.0 }],
            cv: 0.2,
            components: Vec::new(),
            frequency_model: FrequencyModel::Gaussian,
            direction: Direction::Outgoing,
        }
    }
}

fn range_error(what: &str, value: impl std::fmt::Display, range: &str) -> Error {
    Error::Config(format!("{what} = {value} is outside {range}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let days = self.month_days.days_per_month();
        if !(28.0..=31.0).contains(&days) {
            return Err(range_error("month_days", days, "[28, 31]"));
        }
        if self.parallelism > MAX_PARALLELISM {
            return Err(range_error("parallelism", self.parallelism, "[0, 1024]"));
        }
        if self.directions.is_empty() {
            return Err(Error::Config("directions must not be empty".into()));
        }
        if !self.ingest.delimiter.is_ascii() || !self.labels.delimiter.is_ascii() {
            return Err(Error::Config("delimiters must be single ASCII characters".into()));
        }
        if self.relationship.min_events < 1 {
            return Err(range_error("relationship.min_events", self.relationship.min_events, "[1, inf)"));
        }
        let m = self.relationship.min_months;
        if !(m.is_finite() && m >= 0.0) {
            return Err(range_error("relationship.min_months", m, "[0, inf)"));
        }
        let conf = |e: Error| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        };
        self.inclusion.validate().map_err(conf)?;
        let a = &self.analysis;
        if !(1..=MAX_K).contains(&a.k_max) {
            return Err(range_error("analysis.k_max", a.k_max, "[1, 100]"));
        }
        if let Some(&k) = a.fixed_ks.iter().find(|k| !(1..=MAX_K).contains(*k)) {
            return Err(range_error("analysis.fixed_ks entry", k, "[1, 100]"));
        }
        a.elbow.validate().map_err(conf)?;
        if !(1..=MAX_K).contains(&self.labels.crosstab_k) {
            return Err(range_error("labels.crosstab_k", self.labels.crosstab_k, "[1, 100]"));
        }
        let s = &self.synth;
        if !(0.0..1.0 / 3.0).contains(&s.cv) {
            return Err(range_error("synth.cv", s.cv, "[0, 1/3)"));
        }
        if s.egos == 0 {
            return Err(range_error("synth.egos", 0, "[1, inf)"));
        }
        Ok(())
    }

    pub fn months(&self) -> MonthConvention {
        self.month_days
    }

    /// Fixed ks clustered per ego: the table ks plus the crosstab k.
    pub fn analysis_params(&self) -> AnalysisParams {
        let mut ks = self.analysis.fixed_ks.clone();
        ks.push(self.labels.crosstab_k);
        ks.sort_unstable();
        ks.dedup();
        AnalysisParams {
            k_max: self.analysis.k_max,
            elbow: self.analysis.elbow,
            fixed_ks: ks,
        }
    }

    pub fn directions(&self) -> Vec<Direction> {
        let mut d = self.directions.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn synth_spec(&self) -> Result<SynthSpec> {
        let s = &self.synth;
        let components = if s.components.is_empty() {
            s.mixture
                .iter()
                .map(|m| {
                    Ok(MixtureComponent {
                        weight: m.weight,
                        layers: preset_layers(s.direction, m.k, s.cv).map_err(|e| Error::Config(e.to_string()))?,
                    })
                })
                .collect::<Result<_>>()?
        } else {
            s.components.clone()
        };
        let spec = SynthSpec {
            egos: s.egos,
            components,
            model: s.frequency_model,
            direction: s.direction,
            months: self.months(),
            seed: self.seed,
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn graph_snapshot_path(&self) -> PathBuf {
        self.output_dir.join("graph.bin")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("colour = 1"), Err(Error::Config(_))));
        assert!(RunConfig::from_toml("[analysis]\nkmax = 3").is_err());
        assert!(RunConfig::from_toml("[analysis.elbow]\nthreshold = 0.1").is_err());
    }

    #[test]
    fn nested_sections() {
        let c = RunConfig::from_toml(
            r#"
            inputs = ["a.csv"]
            directions = ["incoming"]
            month_days = 30.0
            [analysis]
            k_max = 5
            [analysis.elbow]
            marginal_gain_threshold = 0.05
            [labels]
            source = "heuristic"
            [synth]
            mixture = [{ k = 2, weight = 0.7 }, { k = 3, weight = 0.3 }]
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.analysis.k_max, 5);
        assert_eq!(c.directions, vec![Direction::Incoming]);
        assert_eq!(c.labels.source, LabelSource::Heuristic);
        assert_eq!(c.synth_spec().unwrap().components.len(), 2);
        assert_eq!(c.analysis_params().fixed_ks, vec![2, 3]);
    }

    #[test]
    fn ranges_enforced() {
        for text in [
            "month_days = 40.0",
            "[analysis]\nk_max = 0",
            "[analysis]\nfixed_ks = [0]",
            "[analysis.elbow]\nmarginal_gain_threshold = 1.5",
            "[inclusion]\nmin_connections = 0",
            "parallelism = 5000",
            "directions = []",
            "[synth]\ncv = 0.5",
        ] {
            let c = RunConfig::from_toml(text).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn manifest_echo_omits_parallelism() {
        let c = RunConfig {
            parallelism: 16,
            ..Default::default()
        };
        let json = serde_json::to_string(&c).unwrap();
        assert!(!json.contains("parallelism"));
    }
}
