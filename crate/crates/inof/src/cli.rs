//! Command-line orchestration: `gen` writes test networks, `run` executes
//! an ensemble and exports node/realization tables plus a summary, `hist`
//! bins CSV columns into densities, `oracle` prints exact small-system
//! marginals. Every `run` also records a manifest with input digests, and
//! `run --manifest` replays it byte-identically.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{
    run_ensemble_with, ColorCount, EnsembleOptions, EnsembleResult, SeedAssignment, SimConfig,
    DEFAULT_SUBDIVISION_SAMPLES, DEFAULT_TAU_MAX, DEFAULT_WHITE_THRESHOLD,
};
use crate::graph::{load_edge_list, load_label_file, DirectedGraph, VoteMode};
use crate::netgen::{generate, GenSpec};
use crate::oracle::{exact_distribution, exact_marginals};
use crate::stats::{
    check_even_subdivision, color_polarization_table, histogram1d, histogram2d,
    polarization_table, realization_fractions, red_fraction, subdivision_errors,
    theoretical_error, ColorPolarizationTable, PolarizationTable, SubdivisionErrors,
};

#[derive(Parser)]
#[command(
    name = "inof",
    version,
    about = "Majority-vote opinion contests on directed networks"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test network and write it as an edge list.
    Gen(GenArgs),
    /// Run an ensemble of contests; writes PREFIX_nodes.csv,
    /// PREFIX_realizations.csv, PREFIX_summary.json, PREFIX_manifest.json.
    Run(Box<RunArgs>),
    /// Bin one CSV column (or a pair) into a density histogram.
    Hist(HistArgs),
    /// Exact per-node outcome probabilities by visit-order enumeration,
    /// for small fixtures.
    Oracle(OracleArgs),
}

/// Entry point behind the `inof` binary. Usage errors exit 2 (clap),
/// runtime failures exit 1 after removing any partial outputs.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Hist(a) => cmd_hist(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Star,
    Gadget,
    Er,
    Pa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Opa,
    Ops,
}

impl From<ModeArg> for VoteMode {
    fn from(m: ModeArg) -> VoteMode {
        match m {
            ModeArg::Opa => VoteMode::Opa,
            ModeArg::Ops => VoteMode::Ops,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Network family.
    #[arg(long, value_enum)]
    model: Model,
    /// Node count (er, pa).
    #[arg(long)]
    nodes: Option<u32>,
    /// Out-edges per attaching node (pa).
    #[arg(long)]
    m: Option<u32>,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Leaf count (star).
    #[arg(long)]
    leaves: Option<u32>,
    /// Generator RNG seed.
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    /// Output edge-list path.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    fn need<T: Copy>(v: Option<T>, flag: &str, model: &str) -> Result<T> {
        v.with_context(|| format!("--model {model} needs {flag}"))
    }
    let spec = match args.model {
        Model::Star => GenSpec::Star {
            leaves: need(args.leaves, "--leaves", "star")?,
        },
        Model::Gadget => GenSpec::Gadget,
        Model::Er => GenSpec::ErDirected {
            nodes: need(args.nodes, "--nodes", "er")?,
            p: need(args.p, "--p", "er")?,
        },
        Model::Pa => GenSpec::PaDirected {
            nodes: need(args.nodes, "--nodes", "pa")?,
            m: need(args.m, "--m", "pa")?,
        },
    };
    let graph = generate(&spec, args.gen_seed)?;
    ensure_parent_dir(&args.out)?;
    fs::write(&args.out, graph.to_edge_list_string())
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("nodes: {}", graph.node_count());
    println!("edges: {}", graph.edge_count());
    Ok(())
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file: whitespace-separated source/target token pairs.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Optional INDEX<TAB>LABEL file naming nodes.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Red seed tokens, comma separated. Tokens match labels first, then
    /// numeric node indices.
    #[arg(long, value_delimiter = ',')]
    red: Option<Vec<String>>,
    /// Blue seed tokens.
    #[arg(long, value_delimiter = ',')]
    blue: Option<Vec<String>>,
    /// Green seed tokens; switches to a three-color contest (T = 0 only).
    #[arg(long, value_delimiter = ',')]
    green: Option<Vec<String>>,
    /// Vote weighting.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Ensemble size N_r.
    #[arg(long)]
    realizations: Option<usize>,
    /// Passes per realization.
    #[arg(long)]
    tau: Option<usize>,
    /// Temperature; 0 is the deterministic majority rule.
    #[arg(long)]
    temp: Option<f64>,
    /// Master RNG seed; realization r runs on stream r.
    #[arg(long)]
    seed: Option<u64>,
    /// Classification cut as a fraction of realizations.
    #[arg(long)]
    white_threshold: Option<f64>,
    /// Keep per-pass color fractions in PREFIX_realizations.csv.
    #[arg(long)]
    trace: bool,
    /// Output path prefix.
    #[arg(long)]
    out: Option<String>,
    /// Worker thread cap; results never depend on it.
    #[arg(long, env = "INOF_THREADS")]
    threads: Option<usize>,
    /// Replay a recorded manifest byte-identically. Only --out and
    /// --threads may accompany it.
    #[arg(long, conflicts_with_all = ["edges", "labels", "red", "blue", "green", "mode",
        "realizations", "tau", "temp", "seed", "white_threshold", "trace"])]
    manifest: Option<PathBuf>,
}

/// Everything a run depends on, resolved from flags or a manifest.
/// Re-serialized next to the outputs; paths are kept as given, so replays
/// expect the original working directory. Output prefix is deliberately
/// not part of it: the same manifest may be replayed to any prefix and
/// still produce identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub edges: FileStamp,
    pub labels: Option<FileStamp>,
    pub seeds: SeedTokens,
    pub mode: VoteMode,
    pub colors: usize,
    pub realizations: usize,
    pub tau: usize,
    pub temperature: f64,
    pub master_seed: u64,
    pub white_threshold: f64,
    pub trace: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedTokens {
    pub red: Vec<SeedEntry>,
    pub blue: Vec<SeedEntry>,
    pub green: Vec<SeedEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedEntry {
    pub node: u32,
    pub token: String,
}

struct ResolvedRun {
    graph: DirectedGraph,
    seeds: SeedAssignment,
    config: SimConfig,
    trace: bool,
    out_prefix: String,
    manifest: RunManifest,
}

fn stamp_file(path: &Path) -> Result<(String, FileStamp)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let stamp = FileStamp {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    };
    Ok((text, stamp))
}

fn load_graph(edges: &Path, labels: Option<&Path>) -> Result<(DirectedGraph, FileStamp, Option<FileStamp>)> {
    let (text, edge_stamp) = stamp_file(edges)?;
    let list = load_edge_list(&text).with_context(|| format!("parsing {}", edges.display()))?;
    let mut graph = DirectedGraph::from_edge_list(&list);
    let label_stamp = match labels {
        Some(path) => {
            let (text, stamp) = stamp_file(path)?;
            let pairs =
                load_label_file(&text).with_context(|| format!("parsing {}", path.display()))?;
            graph
                .apply_labels(&pairs)
                .with_context(|| format!("applying {}", path.display()))?;
            Some(stamp)
        }
        None => None,
    };
    Ok((graph, edge_stamp, label_stamp))
}

/// Map seed tokens to node ids: exact label match first (first occurrence
/// wins on duplicate labels), then numeric index.
fn resolve_tokens(
    tokens: &[String],
    graph: &DirectedGraph,
) -> Result<Vec<SeedEntry>> {
    let mut by_label: HashMap<&str, u32> = HashMap::new();
    if let Some(labels) = graph.labels() {
        for (i, l) in labels.iter().enumerate() {
            by_label.entry(l.as_str()).or_insert(i as u32);
        }
    }
    tokens
        .iter()
        .map(|tok| {
            let t = tok.trim();
            if let Some(&node) = by_label.get(t) {
                return Ok(SeedEntry {
                    node,
                    token: t.to_string(),
                });
            }
            if let Ok(node) = t.parse::<u32>() {
                if (node as usize) < graph.node_count() {
                    return Ok(SeedEntry {
                        node,
                        token: t.to_string(),
                    });
                }
            }
            bail!("unknown node token \"{t}\"");
        })
        .collect()
}

fn seed_nodes(entries: &[SeedEntry]) -> Vec<u32> {
    entries.iter().map(|e| e.node).collect()
}

fn resolve_run(args: &RunArgs) -> Result<ResolvedRun> {
    if let Some(manifest_path) = &args.manifest {
        let text = fs::read_to_string(manifest_path)
            .with_context(|| format!("reading {}", manifest_path.display()))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", manifest_path.display()))?;
        let out_prefix = match &args.out {
            Some(out) => out.clone(),
            None => manifest_path
                .to_str()
                .and_then(|p| p.strip_suffix("_manifest.json"))
                .map(str::to_string)
                .context("--out is required when the manifest file is not named PREFIX_manifest.json")?,
        };
        let labels_path = manifest.labels.as_ref().map(|s| PathBuf::from(&s.path));
        let (graph, edge_stamp, label_stamp) =
            load_graph(Path::new(&manifest.edges.path), labels_path.as_deref())?;
        if edge_stamp.sha256 != manifest.edges.sha256 {
            bail!(
                "{} changed since the manifest was recorded (sha256 mismatch)",
                manifest.edges.path
            );
        }
        if let (Some(old), Some(new)) = (&manifest.labels, &label_stamp) {
            if old.sha256 != new.sha256 {
                bail!("{} changed since the manifest was recorded (sha256 mismatch)", old.path);
            }
        }
        let (colors, seeds) = seeds_from_entries(&manifest.seeds)?;
        let config = SimConfig {
            mode: manifest.mode,
            colors,
            tau_max: manifest.tau,
            n_realizations: manifest.realizations,
            temperature: manifest.temperature,
            master_seed: manifest.master_seed,
            white_threshold: manifest.white_threshold,
        };
        return Ok(ResolvedRun {
            graph,
            seeds,
            config,
            trace: manifest.trace,
            out_prefix,
            manifest,
        });
    }

    fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
        v.as_ref()
            .with_context(|| format!("{flag} is required (or use --manifest)"))
    }
    let edges = need(&args.edges, "--edges")?;
    let mode: VoteMode = (*need(&args.mode, "--mode")?).into();
    let realizations = *need(&args.realizations, "--realizations")?;
    let out_prefix = need(&args.out, "--out")?.clone();
    let red_tokens = need(&args.red, "--red")?;
    let blue_tokens = need(&args.blue, "--blue")?;

    let (graph, edge_stamp, label_stamp) = load_graph(edges, args.labels.as_deref())?;
    let seeds = SeedTokens {
        red: resolve_tokens(red_tokens, &graph)?,
        blue: resolve_tokens(blue_tokens, &graph)?,
        green: match &args.green {
            Some(tokens) => resolve_tokens(tokens, &graph)?,
            None => Vec::new(),
        },
    };
    let temperature = args.temp.unwrap_or(0.0);
    if !seeds.green.is_empty() && temperature > 0.0 {
        bail!("three-color contests are zero-temperature only; drop --green or set --temp 0");
    }
    let manifest = RunManifest {
        artifact: "inof".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        edges: edge_stamp,
        labels: label_stamp,
        seeds,
        mode,
        colors: if manifest_green_nonempty(&args.green) { 3 } else { 2 },
        realizations,
        tau: args.tau.unwrap_or(DEFAULT_TAU_MAX),
        temperature,
        master_seed: args.seed.unwrap_or(0),
        white_threshold: args.white_threshold.unwrap_or(DEFAULT_WHITE_THRESHOLD),
        trace: args.trace,
    };
    let (colors, seed_assignment) = seeds_from_entries(&manifest.seeds)?;
    let config = SimConfig {
        mode,
        colors,
        tau_max: manifest.tau,
        n_realizations: manifest.realizations,
        temperature: manifest.temperature,
        master_seed: manifest.master_seed,
        white_threshold: manifest.white_threshold,
    };
    Ok(ResolvedRun {
        graph,
        seeds: seed_assignment,
        config,
        trace: manifest.trace,
        out_prefix,
        manifest,
    })
}

fn manifest_green_nonempty(green: &Option<Vec<String>>) -> bool {
    green.as_ref().is_some_and(|g| !g.is_empty())
}

fn seeds_from_entries(seeds: &SeedTokens) -> Result<(ColorCount, SeedAssignment)> {
    if seeds.green.is_empty() {
        Ok((
            ColorCount::Two,
            SeedAssignment::two_color(seed_nodes(&seeds.red), seed_nodes(&seeds.blue)),
        ))
    } else {
        Ok((
            ColorCount::Three,
            SeedAssignment::three_color(
                seed_nodes(&seeds.red),
                seed_nodes(&seeds.blue),
                seed_nodes(&seeds.green),
            ),
        ))
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let run = resolve_run(args)?;
    let subdivision = (run.config.colors == ColorCount::Two
        && check_even_subdivision(run.config.n_realizations, DEFAULT_SUBDIVISION_SAMPLES).is_ok())
    .then_some(DEFAULT_SUBDIVISION_SAMPLES);
    let options = EnsembleOptions {
        subdivision_samples: subdivision,
        trace: run.trace,
    };
    let result = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building the worker pool")?
            .install(|| run_ensemble_with(&run.graph, &run.seeds, &run.config, &options)),
        None => run_ensemble_with(&run.graph, &run.seeds, &run.config, &options),
    }?;
    write_run_outputs(&run, &result)
}

enum Tables {
    Two(PolarizationTable, Option<SubdivisionErrors>),
    Three(ColorPolarizationTable),
}

fn build_tables(run: &ResolvedRun, result: &EnsembleResult) -> Result<Tables> {
    match run.config.colors {
        ColorCount::Two => {
            let table = polarization_table(&result.aggregate, run.config.white_threshold)?;
            let sub = match &result.batches {
                Some(batches) => Some(subdivision_errors(batches, run.config.white_threshold)?),
                None => None,
            };
            Ok(Tables::Two(table, sub))
        }
        ColorCount::Three => Ok(Tables::Three(color_polarization_table(
            &result.aggregate,
            run.config.white_threshold,
        )?)),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render_nodes_csv(run: &ResolvedRun, result: &EnsembleResult, tables: &Tables) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = run.graph.node_count();
    match tables {
        Tables::Two(table, _) => {
            w.write_record([
                "node_id",
                "label",
                "n_white",
                "n_red",
                "n_blue",
                "classified",
                "mu",
                "delta_mu",
            ])?;
            for i in 0..n {
                let [nw, nr, nb, _] = result.aggregate.counts(i);
                w.write_record([
                    i.to_string(),
                    run.graph.label(i),
                    nw.to_string(),
                    nr.to_string(),
                    nb.to_string(),
                    table.is_classified(i).to_string(),
                    fmt_opt(table.mu[i]),
                    fmt_opt(table.delta_mu[i]),
                ])?;
            }
        }
        Tables::Three(table) => {
            w.write_record([
                "node_id",
                "label",
                "n_white",
                "n_red",
                "n_blue",
                "n_green",
                "classified",
                "eta_red",
                "eta_blue",
                "eta_green",
                "delta_eta_red",
                "delta_eta_blue",
                "delta_eta_green",
            ])?;
            for i in 0..n {
                let [nw, nr, nb, ng] = result.aggregate.counts(i);
                let eta = table.eta[i];
                let delta = table.delta_eta[i];
                w.write_record([
                    i.to_string(),
                    run.graph.label(i),
                    nw.to_string(),
                    nr.to_string(),
                    nb.to_string(),
                    ng.to_string(),
                    table.is_classified(i).to_string(),
                    fmt_opt(eta.map(|e| e[0])),
                    fmt_opt(eta.map(|e| e[1])),
                    fmt_opt(eta.map(|e| e[2])),
                    fmt_opt(delta.map(|d| d[0])),
                    fmt_opt(delta.map(|d| d[1])),
                    fmt_opt(delta.map(|d| d[2])),
                ])?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn render_realizations_csv(run: &ResolvedRun, result: &EnsembleResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let colors = run.config.colors;
    let tau = run.config.tau_max;
    let mut header = vec!["realization".to_string()];
    match colors {
        ColorCount::Two => header.push("f_r".to_string()),
        ColorCount::Three => {
            header.extend(["f_red", "f_blue", "f_green"].map(str::to_string));
        }
    }
    for k in 1..=tau {
        header.push(format!("switch_{k}"));
    }
    if run.trace {
        for k in 1..=tau {
            match colors {
                ColorCount::Two => header.push(format!("f_r_pass_{k}")),
                ColorCount::Three => {
                    header.push(format!("f_red_pass_{k}"));
                    header.push(format!("f_blue_pass_{k}"));
                    header.push(format!("f_green_pass_{k}"));
                }
            }
        }
    }
    w.write_record(&header)?;

    let fraction_cells = |counts: &[u64; 4], row: &mut Vec<String>| match colors {
        ColorCount::Two => row.push(fmt_opt(red_fraction(counts))),
        ColorCount::Three => match realization_fractions(counts, colors) {
            Some(f) => row.extend(f.iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        },
    };

    for rec in &result.realizations {
        let mut row = vec![rec.index.to_string()];
        fraction_cells(&rec.final_counts, &mut row);
        for &s in &rec.switch_counts {
            row.push(s.to_string());
        }
        if run.trace {
            let per_pass = rec
                .per_pass_counts
                .as_ref()
                .expect("trace option retains per-pass counts");
            for counts in per_pass {
                fraction_cells(counts, &mut row);
            }
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct Summary<'a> {
    network: NetworkInfo,
    colors: usize,
    mode: VoteMode,
    temperature: f64,
    tau: usize,
    realizations: usize,
    master_seed: u64,
    white_threshold: f64,
    node_count: usize,
    classified_nodes: usize,
    /// Fraction of all node outcomes that stayed white.
    white_fraction: f64,
    /// Mean polarization over classified nodes, fixed seeds included.
    mu0: Option<f64>,
    theoretical_error_mu0: Option<f64>,
    subdivision_error_mu0: Option<f64>,
    subdivision_samples: Option<usize>,
    eta0: Option<Eta0>,
    note: String,
    manifest: &'a RunManifest,
}

#[derive(Serialize)]
struct NetworkInfo {
    nodes: usize,
    edges: usize,
}

#[derive(Serialize)]
struct Eta0 {
    red: f64,
    blue: f64,
    green: f64,
}

fn render_summary(run: &ResolvedRun, result: &EnsembleResult, tables: &Tables) -> Result<String> {
    let n = run.graph.node_count();
    let n_r = run.config.n_realizations;
    let white_total: u64 = (0..n).map(|i| result.aggregate.counts(i)[0] as u64).sum();
    let white_fraction = white_total as f64 / (n as f64 * n_r as f64);
    let summary = match tables {
        Tables::Two(table, sub) => Summary {
            network: NetworkInfo {
                nodes: n,
                edges: run.graph.edge_count(),
            },
            colors: 2,
            mode: run.config.mode,
            temperature: run.config.temperature,
            tau: run.config.tau_max,
            realizations: n_r,
            master_seed: run.config.master_seed,
            white_threshold: run.config.white_threshold,
            node_count: n,
            classified_nodes: table.classified_count,
            white_fraction,
            mu0: Some(table.mu0),
            theoretical_error_mu0: Some(theoretical_error(table.mu0, n_r)),
            subdivision_error_mu0: sub.as_ref().map(|s| s.mu0_err),
            subdivision_samples: sub.as_ref().map(|s| s.samples),
            eta0: None,
            note: if sub.is_some() {
                format!(
                    "subdivision errors over {DEFAULT_SUBDIVISION_SAMPLES} equal batches"
                )
            } else {
                format!(
                    "realization count not divisible into {DEFAULT_SUBDIVISION_SAMPLES} equal \
                     batches; subdivision errors omitted"
                )
            },
            manifest: &run.manifest,
        },
        Tables::Three(table) => Summary {
            network: NetworkInfo {
                nodes: n,
                edges: run.graph.edge_count(),
            },
            colors: 3,
            mode: run.config.mode,
            temperature: run.config.temperature,
            tau: run.config.tau_max,
            realizations: n_r,
            master_seed: run.config.master_seed,
            white_threshold: run.config.white_threshold,
            node_count: n,
            classified_nodes: table.classified_count,
            white_fraction,
            mu0: None,
            theoretical_error_mu0: None,
            subdivision_error_mu0: None,
            subdivision_samples: None,
            eta0: Some(Eta0 {
                red: table.eta0[0],
                blue: table.eta0[1],
                green: table.eta0[2],
            }),
            note: "polarization error estimators apply to two-color runs".to_string(),
            manifest: &run.manifest,
        },
    };
    to_pretty_json(&summary)
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Removes everything it wrote unless defused, so failures leave no
/// partial output set behind.
#[derive(Default)]
struct OutputGuard {
    written: Vec<PathBuf>,
    keep: bool,
}

impl OutputGuard {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        self.written.push(path.clone());
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.keep {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn ensure_parent_dir(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

fn write_run_outputs(run: &ResolvedRun, result: &EnsembleResult) -> Result<()> {
    let tables = build_tables(run, result)?;
    let nodes_csv = render_nodes_csv(run, result, &tables)?;
    let realizations_csv = render_realizations_csv(run, result)?;
    let manifest_json = to_pretty_json(&run.manifest)?;
    let summary_json = render_summary(run, result, &tables)?;

    let prefix = &run.out_prefix;
    ensure_parent_dir(Path::new(&format!("{prefix}_nodes.csv")))?;
    let mut guard = OutputGuard::default();
    guard.write(PathBuf::from(format!("{prefix}_nodes.csv")), nodes_csv.as_bytes())?;
    guard.write(
        PathBuf::from(format!("{prefix}_realizations.csv")),
        realizations_csv.as_bytes(),
    )?;
    guard.write(
        PathBuf::from(format!("{prefix}_manifest.json")),
        manifest_json.as_bytes(),
    )?;
    guard.write(
        PathBuf::from(format!("{prefix}_summary.json")),
        summary_json.as_bytes(),
    )?;
    guard.keep = true;
    for suffix in ["nodes.csv", "realizations.csv", "manifest.json", "summary.json"] {
        println!("wrote {prefix}_{suffix}");
    }
    Ok(())
}

#[derive(Args)]
struct HistArgs {
    /// Value source as FILE:COLUMN over a headered CSV; blank cells are
    /// skipped.
    #[arg(long)]
    input: String,
    /// Bin count.
    #[arg(long)]
    bins: usize,
    /// Value range as "lo,hi".
    #[arg(long)]
    range: String,
    /// Second axis source for a 2D histogram.
    #[arg(long)]
    input2: Option<String>,
    /// Bin count of the second axis.
    #[arg(long)]
    bins2: Option<usize>,
    /// Range of the second axis as "lo,hi".
    #[arg(long)]
    range2: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(',')
        .with_context(|| format!("range \"{text}\" is not of the form lo,hi"))?;
    Ok((
        lo.trim().parse().with_context(|| format!("bad range bound \"{lo}\""))?,
        hi.trim().parse().with_context(|| format!("bad range bound \"{hi}\""))?,
    ))
}

/// Read FILE:COLUMN into per-row cells, `None` for blanks.
fn read_column(spec: &str) -> Result<Vec<Option<f64>>> {
    let (file, column) = spec
        .rsplit_once(':')
        .with_context(|| format!("input \"{spec}\" is not of the form FILE:COLUMN"))?;
    let mut reader = csv::Reader::from_path(file)
        .with_context(|| format!("opening {file}"))?;
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .with_context(|| format!("no column \"{column}\" in {file}"))?;
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record?;
        let cell = record
            .get(idx)
            .with_context(|| format!("short row in {file}"))?;
        if cell.is_empty() {
            cells.push(None);
        } else {
            cells.push(Some(cell.parse::<f64>().with_context(|| {
                format!("non-numeric cell \"{cell}\" in column \"{column}\" of {file}")
            })?));
        }
    }
    Ok(cells)
}

fn cmd_hist(args: &HistArgs) -> Result<()> {
    let cells = read_column(&args.input)?;
    let (lo, hi) = parse_range(&args.range)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    match &args.input2 {
        None => {
            if args.bins2.is_some() || args.range2.is_some() {
                bail!("--bins2/--range2 make sense only with --input2");
            }
            let values: Vec<f64> = cells.into_iter().flatten().collect();
            if values.is_empty() {
                bail!("column {} is empty", args.input);
            }
            let h = histogram1d(&values, lo, hi, args.bins)?;
            w.write_record(["bin_center", "density"])?;
            for k in 0..h.bins() {
                w.write_record([h.bin_center(k).to_string(), h.density[k].to_string()])?;
            }
        }
        Some(spec2) => {
            let bins2 = args.bins2.context("--input2 needs --bins2")?;
            let (lo2, hi2) = parse_range(
                args.range2.as_deref().context("--input2 needs --range2")?,
            )?;
            let cells2 = read_column(spec2)?;
            if cells.len() != cells2.len() {
                bail!(
                    "inputs disagree on row count: {} vs {}",
                    cells.len(),
                    cells2.len()
                );
            }
            let points: Vec<(f64, f64)> = cells
                .into_iter()
                .zip(cells2)
                .filter_map(|pair| match pair {
                    (Some(x), Some(y)) => Some((x, y)),
                    _ => None,
                })
                .collect();
            if points.is_empty() {
                bail!("columns {} and {} have no complete rows", args.input, spec2);
            }
            let h = histogram2d(&points, (lo, hi), (lo2, hi2), args.bins, bins2)?;
            w.write_record(["x_center", "y_center", "density"])?;
            for ix in 0..h.x_bins {
                for iy in 0..h.y_bins {
                    w.write_record([
                        h.x_center(ix).to_string(),
                        h.y_center(iy).to_string(),
                        h.density_at(ix, iy).to_string(),
                    ])?;
                }
            }
        }
    }
    let text = String::from_utf8(w.into_inner()?)?;
    ensure_parent_dir(&args.out)?;
    let mut guard = OutputGuard::default();
    guard.write(args.out.clone(), text.as_bytes())?;
    guard.keep = true;
    println!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Args)]
struct OracleArgs {
    /// Edge-list file.
    #[arg(long)]
    edges: PathBuf,
    /// Optional INDEX<TAB>LABEL file.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Red seed tokens, comma separated.
    #[arg(long, value_delimiter = ',')]
    red: Vec<String>,
    /// Blue seed tokens.
    #[arg(long, value_delimiter = ',')]
    blue: Vec<String>,
    /// Green seed tokens for a three-color contest.
    #[arg(long, value_delimiter = ',')]
    green: Option<Vec<String>>,
    /// Vote weighting.
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Passes.
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    tau: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let (graph, _, _) = load_graph(&args.edges, args.labels.as_deref())?;
    let seeds = SeedTokens {
        red: resolve_tokens(&args.red, &graph)?,
        blue: resolve_tokens(&args.blue, &graph)?,
        green: match &args.green {
            Some(tokens) => resolve_tokens(tokens, &graph)?,
            None => Vec::new(),
        },
    };
    let (colors, assignment) = seeds_from_entries(&seeds)?;
    let mode: VoteMode = args.mode.into();
    let mut config = match colors {
        ColorCount::Two => SimConfig::two_color(mode, 0),
        ColorCount::Three => SimConfig::three_color(mode, 0),
    };
    config.tau_max = args.tau;
    let dist = exact_distribution(&graph, &assignment, &config)?;
    let marginals = exact_marginals(&dist);

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["node_id", "label", "p_white", "p_red", "p_blue"];
    if colors == ColorCount::Three {
        header.push("p_green");
    }
    header.push("mu");
    w.write_record(&header)?;
    for i in 0..graph.node_count() {
        let p = marginals.p[i];
        let mut row = vec![
            i.to_string(),
            graph.label(i),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
        ];
        if colors == ColorCount::Three {
            row.push(p[3].to_string());
        }
        row.push(fmt_opt(marginals.mu[i]));
        w.write_record(&row)?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    match &args.out {
        Some(path) => {
            ensure_parent_dir(path)?;
            let mut guard = OutputGuard::default();
            guard.write(path.clone(), text.as_bytes())?;
            guard.keep = true;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
