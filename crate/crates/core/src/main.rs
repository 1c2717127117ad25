use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use egolayers::cli::{self, LabelSource, RunConfig};
use egolayers::egonet::Direction;
use egolayers::{Error, Result};

#[derive(Parser)]
#[command(name = "egolayers", version, about = "Layered ego-network analysis of interaction logs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override the config file.
#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[arg(long, short, global = true)]
    output_dir: Option<PathBuf>,
    /// Event log; repeat for several files
    #[arg(long = "input", short, global = true)]
    inputs: Vec<PathBuf>,
    /// Edge list to analyze instead of the ingest snapshot
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 = all cores
    #[arg(long, short = 'j', global = true)]
    parallelism: Option<usize>,
    /// outgoing (reviewer as ego) or incoming (author as ego); repeatable
    #[arg(long = "direction", short, global = true)]
    directions: Vec<Direction>,
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Label file; implies --label-source file
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// file, heuristic or none
    #[arg(long, global = true, value_parser = parse_label_source)]
    label_source: Option<LabelSource>,
    #[arg(long, global = true)]
    crosstab_k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate event logs into a relationship edge list and graph snapshot
    Ingest,
    /// Cluster every active ego and summarize the population
    Analyze,
    /// Tabulate review labels per layer
    Crosstab,
    /// Generate a synthetic event log with planted layers
    Synth {
        #[arg(long)]
        egos: Option<u64>,
    },
    /// Render one ego network as Graphviz DOT
    ExportDot {
        #[arg(long)]
        ego: String,
        /// Layer count; defaults to the ego's optimal k
        #[arg(long)]
        k: Option<usize>,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_label_source(s: &str) -> std::result::Result<LabelSource, String> {
    match s {
        "file" => Ok(LabelSource::File),
        "heuristic" => Ok(LabelSource::Heuristic),
        "none" => Ok(LabelSource::None),
        other => Err(format!("unknown label source `{other}`")),
    }
}

fn build_config(c: Common) -> Result<RunConfig> {
    let mut config = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = c.output_dir {
        config.output_dir = d;
    }
    if !c.inputs.is_empty() {
        config.inputs = c.inputs;
    }
    if c.edges.is_some() {
        config.edges = c.edges;
    }
    if let Some(s) = c.seed {
        config.seed = s;
    }
    if let Some(p) = c.parallelism {
        config.parallelism = p;
    }
    if !c.directions.is_empty() {
        config.directions = c.directions;
    }
    if let Some(k) = c.k_max {
        config.analysis.k_max = k;
    }
    if let Some(p) = c.labels {
        config.labels.path = Some(p);
        config.labels.source = LabelSource::File;
    }
    if let Some(s) = c.label_source {
        config.labels.source = s;
    }
    if let Some(k) = c.crosstab_k {
        config.labels.crosstab_k = k;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let mut config = build_config(cli.common)?;
    match cli.command {
        Command::Ingest => {
            let report = cli::cmd_ingest(&config)?;
            eprintln!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Analyze => {
            for r in cli::cmd_analyze(&config)? {
                eprintln!(
                    "{}: {} active egos, k* = {:?}",
                    r.direction, r.active_egos, r.k_star
                );
            }
        }
        Command::Crosstab => {
            for r in cli::cmd_crosstab(&config)? {
                eprint!("{}", r.crosstab.to_text());
            }
        }
        Command::Synth { egos } => {
            if let Some(n) = egos {
                config.synth.egos = n;
            }
            let s = cli::cmd_synth(&config)?;
            eprintln!("{} egos, {} alters, {} events", s.egos, s.alters, s.events);
        }
        Command::ExportDot { ego, k, out } => {
            let direction = config.directions.first().copied().unwrap_or(Direction::Outgoing);
            if config.directions.len() > 1 {
                eprintln!("export-dot uses the first direction: {direction}");
            }
            let dot = cli::cmd_export_dot(&config, &ego, direction, k)?;
            match out {
                Some(p) => std::fs::write(&p, dot).map_err(|e| Error::io(&p, e))?,
                None => print!("{dot}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
