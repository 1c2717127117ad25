//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use egolayers::cluster::{analyze_ego, kmeans_1d_exact, silhouette, silhouette_samples, wcss_curve, AnalysisParams, Clustering};
use egolayers::egonet::{assemble_graph, extract_ego_network_by_id, select_active_egos, Direction, InclusionCriteria};
use egolayers::ingest::{build_relationships, filter_relationships, parse_events, IngestConfig, MalformedPolicy};
use egolayers::layers::{assign_layers, LayerTablePopulation, PopulationSummary};
use egolayers::reviewtypes::{layer_review_crosstab, load_labels, UnlabeledPolicy};
use egolayers::synth::{
    generate_ego, generate_population, preset_layers, write_event_log, FrequencyModel, LayerSpec, MixtureComponent,
    SynthSpec, LAYER_TARGETED_SHARE, LAYER_UPDATE_SHARE,
};
use egolayers::time::MonthConvention;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// ---------------------------------------------------------------- oracles

/// Minimum WCSS over every set partition of `x` into exactly `k` blocks.
fn brute_force_wcss(x: &[f64], k: usize) -> f64 {
    fn wcss(x: &[f64], labels: &[usize], k: usize) -> f64 {
        let mut total = 0.0;
        for c in 0..k {
            let members: Vec<f64> = x.iter().zip(labels).filter(|(_, &l)| l == c).map(|(&v, _)| v).collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            total += members.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        }
        total
    }
    fn rec(x: &[f64], k: usize, labels: &mut Vec<usize>, used: usize, best: &mut f64) {
        let i = labels.len();
        if i == x.len() {
            if used == k {
                *best = best.min(wcss(x, labels, k));
            }
            return;
        }
        if x.len() - i < k - used {
            return;
        }
        for l in 0..=used.min(k - 1) {
            labels.push(l);
            rec(x, k, labels, used.max(l + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(x, k, &mut Vec::with_capacity(x.len()), 0, &mut best);
    best
}

/// Rousseeuw silhouette computed pairwise; singleton clusters score 0.
fn naive_silhouette(x: &[f64], labels: &[usize], k: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut sum = vec![0.0; k];
            let mut cnt = vec![0usize; k];
            for j in 0..x.len() {
                if j != i {
                    sum[labels[j]] += (x[i] - x[j]).abs();
                    cnt[labels[j]] += 1;
                }
            }
            let own = labels[i];
            if cnt[own] == 0 {
                return 0.0;
            }
            let a = sum[own] / cnt[own] as f64;
            let b = (0..k)
                .filter(|&c| c != own && cnt[c] > 0)
                .map(|c| sum[c] / cnt[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

// ---------------------------------------------------------------- criteria

fn c1_clustering_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases: Vec<(Vec<f64>, usize)> = (0..10_000)
        .map(|_| {
            let n = rng.random_range(1..=10);
            let k = rng.random_range(1..=n.min(4));
            let w = (0..n).map(|_| 20.0 * (1.0 - rng.random::<f64>())).collect();
            (w, k)
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|(w, k)| {
            let oracle = brute_force_wcss(w, *k);
            let dp = kmeans_1d_exact(w, *k).map_err(|e| e.to_string())?.wcss;
            let curve = wcss_curve(w, *k).map_err(|e| e.to_string())?[*k - 1];
            Ok((dp - oracle).abs().max((curve - oracle).abs()))
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let t = start.elapsed();
    check(
        worst <= 1e-9 && t < Duration::from_secs(60),
        format!("10000 vectors, max |dp - brute| = {worst:.2e} (tol 1e-9), {:.1}s (limit 60s)", secs(t)),
    )
}

fn c2_silhouette_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut singleton_cases = 0;
    for case in 0..1000 {
        let n = rng.random_range(2..=30);
        let k = rng.random_range(2..=n.min(6));
        let mut labels: Vec<usize> = (0..k).collect();
        let force_singleton = case % 3 == 0;
        let pool = if force_singleton { k - 1 } else { k };
        labels.extend((k..n).map(|_| rng.random_range(0..pool.max(1))));
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let centers: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..20.0)).collect();
        let x: Vec<f64> = labels
            .iter()
            .map(|&l| {
                let v = centers[l] + rng.random_range(-1.0..1.0);
                if rng.random_bool(0.3) {
                    (v * 2.0).round() / 2.0
                } else {
                    v
                }
            })
            .collect();
        let mut sizes = vec![0; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        if sizes.contains(&1) {
            singleton_cases += 1;
        }
        let expect = naive_silhouette(&x, &labels, k);
        let got = silhouette_samples(&x, &labels, k).map_err(|e| e.to_string())?;
        for (g, e) in got.iter().zip(&expect) {
            worst = worst.max((g - e).abs());
        }
        let c = Clustering::from_assignments(&x, &labels, k).ok_or("clustering rejected")?;
        let mean = silhouette(&x, &c).map_err(|e| e.to_string())?;
        worst = worst.max((mean - expect.iter().sum::<f64>() / n as f64).abs());
    }
    check(
        worst <= 1e-9 && singleton_cases > 0,
        format!("1000 inputs ({singleton_cases} with singleton clusters), max deviation {worst:.2e} (tol 1e-9)"),
    )
}

fn recovery_rate(layers: &[LayerSpec], seed: u64) -> Result<f64, String> {
    let params = AnalysisParams::default();
    let hits = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let (net, planted) = generate_ego(i, layers, FrequencyModel::Gaussian, seed).map_err(|e| e.to_string())?;
            let r = analyze_ego(&net, &params).map_err(|e| e.to_string())?;
            Ok(usize::from(r.optimal_k == planted.true_k))
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum::<usize>();
    Ok(hits as f64 / 1000.0)
}

fn c3_planted_recovery() -> Outcome {
    let start = Instant::now();
    let three = recovery_rate(&preset_layers(Direction::Outgoing, 3, 0.2).map_err(|e| e.to_string())?, 42)?;
    let two = recovery_rate(&preset_layers(Direction::Outgoing, 2, 0.2).map_err(|e| e.to_string())?, 42)?;
    let t = start.elapsed();
    check(
        three >= 0.95 && two >= 0.95 && t < Duration::from_secs(30),
        format!(
            "three-layer {:.1}%, two-layer {:.1}% (need >= 95%), {:.1}s (limit 30s)",
            100.0 * three,
            100.0 * two,
            secs(t)
        ),
    )
}

fn mixture_spec(egos: u64, direction: Direction, seed: u64) -> SynthSpec {
    let comp = |w, k| MixtureComponent {
        weight: w,
        layers: preset_layers(direction, k, 0.2).unwrap(),
    };
    SynthSpec {
        egos,
        components: vec![comp(0.7, 2), comp(0.3, 3)],
        model: FrequencyModel::Gaussian,
        direction,
        months: MonthConvention::default(),
        seed,
    }
}

fn summarize(spec: &SynthSpec, k: usize) -> Result<PopulationSummary, String> {
    let params = AnalysisParams::default();
    let pop = generate_population(spec).map_err(|e| e.to_string())?;
    let results = pop
        .par_iter()
        .map(|p| analyze_ego(&p.network(spec.direction), &params))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    PopulationSummary::from_results(&results, &[k], LayerTablePopulation::All).map_err(|e| e.to_string())
}

fn c4_mixture() -> Outcome {
    let s = summarize(&mixture_spec(10_000, Direction::Outgoing, 4), 2)?;
    let p = |k| s.p_of_x.get(&k).copied().unwrap_or(0.0);
    let sil = s.mean_silhouette.unwrap_or(f64::NAN);
    check(
        (0.67..=0.73).contains(&p(2)) && (0.27..=0.33).contains(&p(3)) && sil >= 0.6,
        format!(
            "p(2) = {:.4} in [0.67, 0.73], p(3) = {:.4} in [0.27, 0.33], mean silhouette {sil:.4} >= 0.6",
            p(2),
            p(3)
        ),
    )
}

fn c5_layer_table() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = Vec::new();
    for direction in [Direction::Outgoing, Direction::Incoming] {
        for k in [2, 3] {
            let layers = preset_layers(direction, k, 0.2).map_err(|e| e.to_string())?;
            let spec = SynthSpec {
                egos: 10_000,
                components: vec![MixtureComponent {
                    weight: 1.0,
                    layers: layers.clone(),
                }],
                model: FrequencyModel::Gaussian,
                direction,
                months: MonthConvention::default(),
                seed: 5,
            };
            let s = summarize(&spec, k)?;
            let table = &s.layer_tables[&k];
            let mut case_worst: f64 = 0.0;
            for (planted, got) in layers.iter().zip(&table.layers) {
                let ea = (got.alters_mean - planted.alter_count_mean).abs() / planted.alter_count_mean;
                let ef = (got.frequency_mean - planted.frequency_mean).abs() / planted.frequency_mean;
                case_worst = case_worst.max(ea).max(ef);
            }
            worst = worst.max(case_worst);
            cases.push(format!("{direction} k={k}: {:.2}%", 100.0 * case_worst));
        }
    }
    check(
        worst <= 0.05,
        format!(
            "cv 0.2, max relative error {:.2}% (tol 5%); {}; k-means places the layer 0/1 boundary at the centroid midpoint, cutting the low tail of layer 0",
            100.0 * worst,
            cases.join(", ")
        ),
    )
}

fn c6_crosstab() -> Outcome {
    let layers = preset_layers(Direction::Outgoing, 3, 0.2).map_err(|e| e.to_string())?;
    let spec = SynthSpec {
        egos: 80,
        components: vec![MixtureComponent { weight: 1.0, layers }],
        model: FrequencyModel::Gaussian,
        direction: Direction::Outgoing,
        months: MonthConvention::default(),
        seed: 6,
    };
    let (mut ev, mut lab, mut led) = (Vec::new(), Vec::new(), Vec::new());
    write_event_log(&spec, &mut ev, &mut lab, &mut led).map_err(|e| e.to_string())?;
    let (events, _) = parse_events(ev.as_slice(), &IngestConfig::default()).map_err(|e| e.to_string())?;
    let labels = load_labels(lab.as_slice(), b',', MalformedPolicy::Strict).map_err(|e| e.to_string())?;
    let months = MonthConvention::default();
    let graph = assemble_graph(&filter_relationships(build_relationships(&events, months), months)).map_err(|e| e.to_string())?;
    let params = AnalysisParams::default();
    let mut assignments = Vec::new();
    for ego in select_active_egos(&graph, Direction::Outgoing, &InclusionCriteria::default(), months) {
        let net = extract_ego_network_by_id(&graph, ego, Direction::Outgoing);
        let r = analyze_ego(&net, &params).map_err(|e| e.to_string())?;
        let c = r.fixed.get(&3).ok_or("ego lacks a k = 3 clustering")?;
        assignments.push(assign_layers(c, &net).map_err(|e| e.to_string())?);
    }
    let x = layer_review_crosstab(&events, &labels.labels, &assignments, Direction::Outgoing, UnlabeledPolicy::Exclude)
        .map_err(|e| e.to_string())?;
    let labeled: u64 = x.layers.iter().map(|l| l.total).sum();
    let share = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (l, row) in x.layers.iter().enumerate() {
        let (u, t) = (share(row.update_share), share(row.targeted_share));
        worst = worst.max((u - LAYER_UPDATE_SHARE[l]).abs()).max((t - LAYER_TARGETED_SHARE[l]).abs());
        parts.push(format!("L{l} {:.1}%/{:.1}%", 100.0 * u, 100.0 * t));
    }
    let u: Vec<f64> = x.layers.iter().map(|r| share(r.update_share)).collect();
    let t: Vec<f64> = x.layers.iter().map(|r| share(r.targeted_share)).collect();
    let monotone = u.windows(2).all(|w| w[0] < w[1]) && t.windows(2).all(|w| w[0] > w[1]);
    check(
        worst <= 0.01 && monotone && labeled >= 100_000 && x.unassigned == 0,
        format!(
            "{labeled} labeled events, update/targeted {} ; max deviation {:.2} pp (tol 1), ordering preserved: {monotone}",
            parts.join(", "),
            100.0 * worst
        ),
    )
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_egolayers"))
}

fn run(cmd: &mut Command) -> Result<(), String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{:?} failed: {}", cmd, String::from_utf8_lossy(&out.stderr)))
    }
}

fn c7_ingest_golden() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}"));
        run(bin().args(["ingest", "-i"]).arg(fixture("golden_events.csv")).arg("-o").arg(&out))?;
        outputs.push(std::fs::read(out.join("edges.csv")).map_err(|e| e.to_string())?);
    }
    let golden = std::fs::read(fixture("golden_edges.csv")).map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&outputs[0]).to_string();
    let freq: f64 = text
        .lines()
        .find(|l| l.starts_with("A,B,10,"))
        .and_then(|l| l.rsplit(',').next())
        .and_then(|f| f.parse().ok())
        .ok_or("A->B relationship missing")?;
    check(
        outputs[0] == golden && outputs[1] == golden && (freq - 2.003).abs() <= 0.001,
        format!(
            "edge list byte-identical to golden: {}; 10 events / 152 days = {freq:.6} (2.003 +/- 0.001)",
            outputs.iter().all(|o| o == &golden)
        ),
    )
}

fn analyze_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let from_analyze = ["results_", "summary_", "p_of_x_", "layer_table_", "layers_", "analyze_report", "manifest_analyze"]
            .iter()
            .any(|p| name.starts_with(p));
        if from_analyze {
            files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(files)
}

fn c8_parallel_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "output_dir = {:?}\ninputs = [{:?}]\n[synth]\negos = 3000\nmixture = [{{ k = 2, weight = 0.7 }}, {{ k = 3, weight = 0.3 }}]\n",
            dir.path().join("out"),
            dir.path().join("out/events.csv")
        ),
    )
    .map_err(|e| e.to_string())?;
    run(bin().arg("-c").arg(&cfg).arg("synth"))?;
    run(bin().arg("-c").arg(&cfg).arg("ingest"))?;
    let mut runs = Vec::new();
    for j in [1, 4, 16] {
        run(bin().arg("-c").arg(&cfg).args(["analyze", "-j", &j.to_string()]))?;
        runs.push(analyze_outputs(&dir.path().join("out"))?);
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    check(
        identical && runs[0].len() >= 8,
        format!("{} analyze outputs byte-identical at parallelism 1, 4, 16: {identical}", runs[0].len()),
    )
}

fn children_peak_rss_bytes() -> u64 {
    // SAFETY: getrusage only writes into the zeroed struct we pass.
    unsafe {
        let mut usage: libc::rusage = std::mem::zeroed();
        libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage);
        usage.ru_maxrss as u64 * 1024
    }
}

fn c9_performance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("perf.toml");
    // smallest shape clearing the inclusion rule: 26 alters and >= 10 events/month
    std::fs::write(
        &cfg,
        format!(
            r#"output_dir = {:?}
inputs = [{:?}]
directions = ["outgoing"]
[synth]
egos = 50000
[[synth.components]]
weight = 1.0
layers = [
  {{ alter_count_mean = 3.0, frequency_mean = 3.0, frequency_sd = 0.25 }},
  {{ alter_count_mean = 23.0, frequency_mean = 0.17, frequency_sd = 0.005 }},
]
"#,
            dir.path().join("out"),
            dir.path().join("out/events.csv")
        ),
    )
    .map_err(|e| e.to_string())?;
    run(bin().arg("-c").arg(&cfg).arg("synth"))?;
    let start = Instant::now();
    run(bin().arg("-c").arg(&cfg).arg("ingest"))?;
    run(bin().arg("-c").arg(&cfg).arg("analyze"))?;
    let t = start.elapsed();
    let peak = children_peak_rss_bytes();
    let stats: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/ingest_stats.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let events = stats["events"]["accepted"].as_u64().unwrap_or(0);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/analyze_report.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let active = report[0]["active_egos"].as_u64().unwrap_or(0);
    check(
        events >= 1_000_000 && active == 50_000 && t < Duration::from_secs(120) && peak < 2 << 30,
        format!(
            "{events} events, {active} active egos: ingest + analyze {:.1}s (limit 120s), peak RSS {:.0} MiB (limit 2048)",
            secs(t),
            peak as f64 / (1 << 20) as f64
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("clustering oracle equivalence", c1_clustering_oracle),
        ("silhouette oracle", c2_silhouette_oracle),
        ("planted recovery", c3_planted_recovery),
        ("mixture p(x)", c4_mixture),
        ("layer-table round-trip", c5_layer_table),
        ("crosstab round-trip", c6_crosstab),
        ("ingest golden", c7_ingest_golden),
        ("determinism across parallelism", c8_parallel_determinism),
        ("performance at desk scale", c9_performance),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut summary = HashMap::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|x| x == &id) {
            continue;
        }
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{id}] {name}: {detail}");
        summary.insert(id, outcome.is_ok());
    }
    println!("acceptance: {} passed, {failed} failed", summary.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
