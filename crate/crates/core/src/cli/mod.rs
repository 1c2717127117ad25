//! Command implementations behind the `egolayers` binary.
//!
//! Each command reads a validated [`RunConfig`], writes its outputs into
//! `output_dir`, and finishes with a `manifest_<command>.json` holding the
//! config echo and SHA-256 digests of every input and output.

mod config;

pub use config::{AnalysisConfig, LabelConfig, LabelSource, MixtureEntry, RunConfig, SynthConfig, MAX_K, MAX_PARALLELISM};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{analyze_ego, kmeans_1d_exact, AnalysisParams, ClusteringResult};
use crate::egonet::{
    assemble_graph, extract_ego_network, extract_ego_network_by_id, read_snapshot, select_active_egos, write_snapshot,
    Direction, EgoNetwork, InteractionGraph, NodeId,
};
use crate::error::{Error, Result};
use crate::ingest::{read_edge_list, write_edge_list, EventReader, IngestStats, RelationshipBuilder};
use crate::layers::{assign_layers, export_ego_dot, Layer, LayerAssignment, PopulationAccumulator};
use crate::reviewtypes::{load_labels, CrosstabAccumulator, HeuristicClassifier, LabelStats, LayerCrosstab, LayerIndex};
use crate::synth::{write_event_log, SynthStats};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    let mut bytes = 0u64;
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileDigest {
        path: path.display().to_string(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Output files of one command, recorded in write order.
struct Outputs<'a> {
    config: &'a RunConfig,
    command: &'static str,
    written: Vec<PathBuf>,
    inputs: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(config: &'a RunConfig, command: &'static str) -> Result<Self> {
        let dir = &config.output_dir;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            config,
            command,
            written: Vec::new(),
            inputs: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn stream<T>(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<T>) -> Result<T> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::with_capacity(1 << 20, file);
        let value = f(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(value)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    fn finish(self) -> Result<PathBuf> {
        let manifest = Manifest {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            config: self.config,
            inputs: self.inputs.iter().map(|p| digest_file(p)).collect::<Result<_>>()?,
            outputs: self.written.iter().map(|p| digest_file(p)).collect::<Result<_>>()?,
        };
        let path = self.path(&format!("manifest_{}.json", self.command));
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn pool(config: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::with_capacity(1 << 20, f))
}

fn require_inputs(config: &RunConfig) -> Result<()> {
    if config.inputs.is_empty() {
        return Err(Error::Usage("no input event logs given (set `inputs` or pass --input)".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub events: IngestStats,
    pub pairs: u64,
    pub dropped_few_events: u64,
    pub dropped_short_span: u64,
    pub self_edges_dropped: u64,
    pub relationships: u64,
    pub nodes: u64,
}

/// Event logs → `edges.csv`, `graph.bin` and `ingest_stats.json`.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestReport> {
    config.validate()?;
    require_inputs(config)?;
    let months = config.months();
    let mut out = Outputs::new(config, "ingest")?;
    let mut builder = RelationshipBuilder::new();
    let mut events = IngestStats::default();
    for path in &config.inputs {
        out.input(path);
        let mut reader = EventReader::new(open(path)?, &config.ingest).map_err(|e| locate(e, path))?;
        for ev in reader.by_ref() {
            let ev = ev.map_err(|e| locate(e, path))?;
            builder.add_raw(&ev.source_id, &ev.target_id, ev.timestamp);
        }
        events.merge(&reader.stats());
    }
    let all = builder.finish(months);
    let mut report = IngestReport {
        events,
        pairs: all.len() as u64,
        ..Default::default()
    };
    let filter = config.relationship;
    for r in &all {
        if r.event_count < filter.min_events {
            report.dropped_few_events += 1;
        } else if !filter.qualifies(r, months) {
            report.dropped_short_span += 1;
        }
    }
    let kept = filter.apply(all, months);
    let graph = assemble_graph(&kept)?;
    drop(kept);
    report.self_edges_dropped = graph.self_edges_dropped();
    report.relationships = graph.edge_count() as u64;
    report.nodes = graph.node_count() as u64;

    let rels = graph.to_relationships(months);
    out.stream("edges.csv", |w| write_edge_list(w, &rels))?;
    out.stream("graph.bin", |w| write_snapshot(&graph, w))?;
    out.put_json("ingest_stats.json", &report)?;
    out.finish()?;
    Ok(report)
}

fn locate(e: Error, path: &Path) -> Error {
    match e {
        Error::MalformedRecord { record, reason } => Error::Data(format!("{}: record {record}: {reason}", path.display())),
        Error::Csv(c) => Error::Data(format!("{}: {c}", path.display())),
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn load_graph(config: &RunConfig, out: &mut Outputs) -> Result<InteractionGraph> {
    match &config.edges {
        Some(path) => {
            out.input(path);
            let rels = read_edge_list(open(path)?, config.months()).map_err(|e| locate(e, path))?;
            assemble_graph(&rels)
        }
        None => {
            let path = config.graph_snapshot_path();
            if !path.exists() {
                return Err(Error::Usage(format!(
                    "{} not found; run `ingest` first or set `edges`",
                    path.display()
                )));
            }
            out.input(&path);
            read_snapshot(open(&path)?)
        }
    }
}

struct EgoOutcome {
    result: ClusteringResult,
    net: EgoNetwork,
    layers: BTreeMap<usize, LayerAssignment>,
}

fn analyze_one(graph: &InteractionGraph, node: NodeId, dir: Direction, params: &AnalysisParams) -> Result<Option<EgoOutcome>> {
    let net = extract_ego_network_by_id(graph, node, dir);
    let result = match analyze_ego(&net, params) {
        Ok(r) => r,
        Err(Error::DegenerateEgo { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let layers = result
        .fixed
        .iter()
        .map(|(&k, c)| Ok((k, assign_layers(c, &net)?)))
        .collect::<Result<_>>()?;
    Ok(Some(EgoOutcome { result, net, layers }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub direction: Direction,
    pub active_egos: u64,
    pub degenerate_skipped: u64,
    pub k_star: Vec<usize>,
}

fn layers_file(dir: Direction, k: usize) -> String {
    format!("layers_{dir}_k{k}.csv")
}

/// Graph → per-direction results, population summary, layer tables and
/// layer assignment files.
pub fn cmd_analyze(config: &RunConfig) -> Result<Vec<DirectionReport>> {
    config.validate()?;
    let mut out = Outputs::new(config, "analyze")?;
    let graph = load_graph(config, &mut out)?;
    let months = config.months();
    let pool = pool(config)?;
    let params = config.analysis_params();
    let mut reports = Vec::new();
    for dir in config.directions() {
        let active = select_active_egos(&graph, dir, &config.inclusion, months);
        if active.is_empty() {
            eprintln!(
                "{dir}: no ego meets the inclusion criteria (min_monthly_rate = {}, min_connections = {}) among {} nodes",
                config.inclusion.min_monthly_rate,
                config.inclusion.min_connections,
                graph.node_count()
            );
            continue;
        }
        let outcomes: Vec<Option<EgoOutcome>> = pool.install(|| {
            active
                .par_iter()
                .map(|&n| analyze_one(&graph, n, dir, &params))
                .collect::<Result<_>>()
        })?;
        let degenerate = outcomes.iter().filter(|o| o.is_none()).count() as u64;
        let outcomes: Vec<EgoOutcome> = outcomes.into_iter().flatten().collect();
        if outcomes.is_empty() {
            eprintln!("{dir}: every active ego has fewer than two alters");
            continue;
        }

        let mut acc = PopulationAccumulator::new(&config.analysis.fixed_ks, config.analysis.layer_table_population);
        let mut jsonl = Vec::new();
        for o in &outcomes {
            acc.push(&o.result)?;
            serde_json::to_writer(&mut jsonl, &o.result.record())?;
            jsonl.push(b'\n');
        }
        let summary = acc.finish()?;
        out.put(&format!("results_{dir}.jsonl"), &jsonl)?;
        out.put_json(&format!("summary_{dir}.json"), &summary)?;
        out.put(&format!("p_of_x_{dir}.csv"), summary.p_of_x_csv().as_bytes())?;
        out.put(&format!("layer_table_{dir}.txt"), summary.layer_table_text().as_bytes())?;
        for &k in &params.fixed_ks {
            out.put(&layers_file(dir, k), layers_csv(&outcomes, k).as_bytes())?;
        }
        reports.push(DirectionReport {
            direction: dir,
            active_egos: active.len() as u64,
            degenerate_skipped: degenerate,
            k_star: summary.k_star.clone(),
        });
    }
    if reports.is_empty() {
        return Err(Error::Data(format!(
            "no ego in any requested direction meets the inclusion criteria (min_monthly_rate = {}, min_connections = {})",
            config.inclusion.min_monthly_rate, config.inclusion.min_connections
        )));
    }
    out.put_json("analyze_report.json", &reports)?;
    out.finish()?;
    Ok(reports)
}

pub const LAYERS_HEADER: &str = "ego_id,alter_id,layer,frequency";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn layers_csv(outcomes: &[EgoOutcome], k: usize) -> String {
    let mut out = String::from(LAYERS_HEADER);
    out.push('\n');
    for o in outcomes {
        let Some(a) = o.layers.get(&k) else { continue };
        let freq: HashMap<&str, f64> = o.net.alters.iter().map(|x| (x.alter_id.as_str(), x.frequency)).collect();
        for (l, layer) in a.layers.iter().enumerate() {
            for alter in &layer.alters {
                let _ = writeln!(out, "{},{},{l},{}", csv_field(&a.ego_id), csv_field(alter), freq[alter.as_str()]);
            }
        }
    }
    out
}

/// Reads a `layers_<dir>_k<k>.csv` file back into per-ego assignments.
pub fn read_layer_assignments<R: Read>(input: R, direction: Direction, k: usize) -> Result<Vec<LayerAssignment>> {
    #[derive(Deserialize)]
    struct Row {
        ego_id: String,
        alter_id: String,
        layer: usize,
    }
    let mut reader = csv::Reader::from_reader(input);
    let mut out: Vec<LayerAssignment> = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row?;
        if row.layer >= k {
            return Err(Error::Data(format!("layer {} in a k = {k} assignment file", row.layer)));
        }
        if out.last().is_none_or(|a| a.ego_id != row.ego_id) {
            out.push(LayerAssignment {
                ego_id: row.ego_id.clone(),
                direction,
                k,
                layers: vec![
                    Layer {
                        alters: Vec::new(),
                        size: 0,
                        mean_frequency: 0.0,
                    };
                    k
                ],
            });
        }
        let layer = &mut out.last_mut().expect("pushed above").layers[row.layer];
        layer.alters.push(row.alter_id);
        layer.size += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstabReport {
    #[serde(flatten)]
    pub crosstab: LayerCrosstab,
    /// Events whose ego was not analyzed in this direction.
    pub events_outside_analyzed_egos: u64,
    pub label_file: Option<LabelStats>,
}

/// Re-reads the event logs and tabulates labels per layer at `crosstab_k`.
pub fn cmd_crosstab(config: &RunConfig) -> Result<Vec<CrosstabReport>> {
    config.validate()?;
    let lc = &config.labels;
    let mut out = Outputs::new(config, "crosstab")?;
    let (labels, label_stats) = match lc.source {
        LabelSource::None => {
            return Err(Error::Usage(
                "label source is `none`; set labels.source to `file` or `heuristic`".into(),
            ))
        }
        LabelSource::File => {
            let path = lc
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("labels.source = \"file\" needs labels.path".into()))?;
            out.input(path);
            let set = load_labels(open(path)?, lc.delimiter as u8, config.ingest.policy).map_err(|e| locate(e, path))?;
            (set.labels, Some(set.stats))
        }
        LabelSource::Heuristic => (HashMap::new(), None),
    };
    let classifier = match lc.source {
        LabelSource::Heuristic => Some(HeuristicClassifier::new(&lc.lexicon)?),
        _ => None,
    };
    require_inputs(config)?;

    let k = lc.crosstab_k;
    let mut tabs = Vec::new();
    for dir in config.directions() {
        let path = out.path(&layers_file(dir, k));
        if !path.exists() {
            eprintln!("{dir}: {} not found, skipping", path.display());
            continue;
        }
        out.input(&path);
        let index = LayerIndex::new(&read_layer_assignments(open(&path)?, dir, k)?)?;
        tabs.push((dir, index, CrosstabAccumulator::new(k, dir, lc.unlabeled), 0u64));
    }
    if tabs.is_empty() {
        return Err(Error::Usage(format!(
            "no layer assignments at k = {k} in {}; run `analyze` with this crosstab_k first",
            config.output_dir.display()
        )));
    }

    for path in &config.inputs {
        out.input(path);
        let reader = EventReader::new(open(path)?, &config.ingest).map_err(|e| locate(e, path))?;
        for ev in reader {
            let ev = ev.map_err(|e| locate(e, path))?;
            let label = match &classifier {
                Some(c) => ev.label.or_else(|| ev.text.as_deref().map(|t| c.classify(t))),
                None => labels.get(&ev.event_id).copied().or(ev.label),
            };
            for (dir, index, acc, outside) in tabs.iter_mut() {
                let ego = match dir {
                    Direction::Outgoing => &ev.source_id,
                    Direction::Incoming => &ev.target_id,
                };
                if index.has_ego(ego) {
                    acc.push(index.layer_of_event(&ev, *dir), label);
                } else {
                    *outside += 1;
                }
            }
        }
    }

    let mut reports = Vec::new();
    for (dir, _, acc, outside) in tabs {
        let report = CrosstabReport {
            crosstab: acc.finish(),
            events_outside_analyzed_egos: outside,
            label_file: label_stats,
        };
        out.put_json(&format!("crosstab_{dir}_k{k}.json"), &report)?;
        out.put(&format!("crosstab_{dir}_k{k}.txt"), report.crosstab.to_text().as_bytes())?;
        reports.push(report);
    }
    out.finish()?;
    Ok(reports)
}

/// Writes `events.csv`, `labels.csv`, `ledger.jsonl` and `synth_stats.json`.
pub fn cmd_synth(config: &RunConfig) -> Result<SynthStats> {
    config.validate()?;
    let spec = config.synth_spec()?;
    let pool = pool(config)?;
    let mut out = Outputs::new(config, "synth")?;
    let (ev, lab, led) = (out.path("events.csv"), out.path("labels.csv"), out.path("ledger.jsonl"));
    let create = |p: &Path| -> Result<BufWriter<File>> {
        Ok(BufWriter::with_capacity(1 << 20, File::create(p).map_err(|e| Error::io(p, e))?))
    };
    let stats = pool.install(|| write_event_log(&spec, create(&ev)?, create(&lab)?, create(&led)?))?;
    out.written.extend([ev, lab, led]);
    out.put_json("synth_stats.json", &stats)?;
    out.finish()?;
    Ok(stats)
}

/// DOT rendering of one ego's layers, at its optimal k unless `k` is given.
pub fn cmd_export_dot(config: &RunConfig, ego: &str, direction: Direction, k: Option<usize>) -> Result<String> {
    config.validate()?;
    let mut out = Outputs::new(config, "export-dot")?;
    let graph = load_graph(config, &mut out)?;
    let net: EgoNetwork = extract_ego_network(&graph, ego, direction)?;
    let params = config.analysis_params();
    let result = analyze_ego(&net, &params)?;
    let clustering = match k {
        None => result.clustering,
        Some(k) => kmeans_1d_exact(&net.frequencies(), k)?,
    };
    let layers = assign_layers(&clustering, &net)?;
    export_ego_dot(&layers, &net)
}
