//! Asynchronous majority-vote dynamics: scores, update rules, passes,
//! realizations, reproducible parallel ensembles.
//!
//! One realization starts from all-white (apart from the fixed seeds) and
//! performs `tau_max` passes. A pass shuffles the non-fixed nodes into a
//! fresh uniform random order and visits each once, recomputing its scores
//! against the current, sequentially updated state. There is no early exit:
//! frozen states simply stop producing switches, and the per-pass switch
//! counts are part of the result.
//!
//! Reproducibility: realization r draws everything (shuffles first, then any
//! thermal draws, in visit order) from one ChaCha stream derived from
//! `(master_seed, r)`, and ensemble aggregation adds integers over a chunk
//! layout fixed by the realization count alone. Results are therefore
//! bit-identical for any worker thread count.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, VoteMode};

/// Passes per realization unless configured otherwise; empirically enough for
/// relaxation on the networks studied here.
pub const DEFAULT_TAU_MAX: usize = 20;
/// A node is classified non-white when it was colored in at least this
/// fraction of realizations.
pub const DEFAULT_WHITE_THRESHOLD: f64 = 0.5;
/// Batch count for the subdivision error estimator.
pub const DEFAULT_SUBDIVISION_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid seed assignment: {0}")]
    InvalidSeeds(String),
}

/// Node opinion. Red maps to spin +1 and blue to spin -1; green only occurs
/// in three-color contests. White is "no opinion yet": white nodes cast no
/// votes, and a node that has left white can never return.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum Color {
    White = 0,
    Red = 1,
    Blue = 2,
    Green = 3,
}

const COLORS: [Color; 4] = [Color::White, Color::Red, Color::Blue, Color::Green];

impl Color {
    /// Index into `[white, red, blue, green]` count arrays.
    /// Inverse of `index`. Panics outside 0..=3.
    pub fn from_index(k: usize) -> Color {
        COLORS[k]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Green => "green",
        }
    }
}

/// Two-color (red/blue) or three-color (red/blue/green) contest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColorCount {
    Two,
    Three,
}

impl ColorCount {
    /// The non-white colors in play, in count-array order.
    pub fn active(self) -> &'static [Color] {
        match self {
            ColorCount::Two => &[Color::Red, Color::Blue],
            ColorCount::Three => &[Color::Red, Color::Blue, Color::Green],
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            ColorCount::Two => 2,
            ColorCount::Three => 3,
        }
    }
}

/// Which nodes hold fixed opinions. Seed nodes never change color and are
/// never visited; everything else starts white.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedAssignment {
    pub red: Vec<u32>,
    pub blue: Vec<u32>,
    pub green: Vec<u32>,
}

impl SeedAssignment {
    pub fn two_color(red: Vec<u32>, blue: Vec<u32>) -> Self {
        SeedAssignment {
            red,
            blue,
            green: Vec::new(),
        }
    }

    pub fn three_color(red: Vec<u32>, blue: Vec<u32>, green: Vec<u32>) -> Self {
        SeedAssignment { red, blue, green }
    }

    pub fn nodes_of(&self, color: Color) -> &[u32] {
        match color {
            Color::Red => &self.red,
            Color::Blue => &self.blue,
            Color::Green => &self.green,
            Color::White => &[],
        }
    }

    pub fn seed_count(&self) -> usize {
        self.red.len() + self.blue.len() + self.green.len()
    }

    /// Every active color non-empty, all indices in range, no node in two
    /// groups (or twice in one), and green seeds only in three-color mode.
    pub fn validate(&self, node_count: usize, colors: ColorCount) -> Result<(), SimError> {
        if colors == ColorCount::Two && !self.green.is_empty() {
            return Err(SimError::InvalidSeeds(
                "green seeds given but the contest is two-color".into(),
            ));
        }
        let mut seen = vec![false; node_count];
        for &color in colors.active() {
            let nodes = self.nodes_of(color);
            if nodes.is_empty() {
                return Err(SimError::InvalidSeeds(format!(
                    "no {} seed nodes given",
                    color.name()
                )));
            }
            for &i in nodes {
                let i = i as usize;
                if i >= node_count {
                    return Err(SimError::InvalidSeeds(format!(
                        "seed node {i} out of range for {node_count} nodes"
                    )));
                }
                if seen[i] {
                    return Err(SimError::InvalidSeeds(format!(
                        "seed node {i} appears in more than one group (or twice)"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

/// Full simulation configuration for one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: VoteMode,
    pub colors: ColorCount,
    /// Passes per realization (>= 1). No early exit.
    pub tau_max: usize,
    pub n_realizations: usize,
    /// T = 0 selects the deterministic rule; T > 0 the thermal rule with
    /// beta = 1/T (two-color only).
    pub temperature: f64,
    pub master_seed: u64,
    /// Classification threshold in (0, 1].
    pub white_threshold: f64,
}

impl SimConfig {
    pub fn two_color(mode: VoteMode, master_seed: u64) -> Self {
        SimConfig {
            mode,
            colors: ColorCount::Two,
            tau_max: DEFAULT_TAU_MAX,
            n_realizations: 1000,
            temperature: 0.0,
            master_seed,
            white_threshold: DEFAULT_WHITE_THRESHOLD,
        }
    }

    pub fn three_color(mode: VoteMode, master_seed: u64) -> Self {
        SimConfig {
            colors: ColorCount::Three,
            ..SimConfig::two_color(mode, master_seed)
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.tau_max == 0 {
            return Err(SimError::InvalidConfig("tau_max must be >= 1".into()));
        }
        if self.n_realizations == 0 {
            return Err(SimError::InvalidConfig("n_realizations must be >= 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.colors == ColorCount::Three && self.temperature > 0.0 {
            return Err(SimError::InvalidConfig(
                "finite temperature is defined for two-color contests only".into(),
            ));
        }
        if !(self.white_threshold > 0.0 && self.white_threshold <= 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "white_threshold must lie in (0, 1], got {}",
                self.white_threshold
            )));
        }
        Ok(())
    }
}

/// Scores of one node against the current state: the accumulated vote weight
/// per non-white color. In a two-color contest `z_plus`/`z_minus` name the
/// red/blue pair and the green slot stays zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreSet {
    z: [f64; 3],
}

impl ScoreSet {
    pub fn new(z_red: f64, z_blue: f64, z_green: f64) -> Self {
        ScoreSet {
            z: [z_red, z_blue, z_green],
        }
    }

    pub fn score(&self, color: Color) -> f64 {
        assert!(color != Color::White, "white has no score");
        self.z[color.index() - 1]
    }

    /// Red score, the spin +1 tally.
    pub fn z_plus(&self) -> f64 {
        self.z[0]
    }

    /// Blue score, the spin -1 tally.
    pub fn z_minus(&self) -> f64 {
        self.z[1]
    }
}

/// Sum the vote weights of colored in-neighbors of `node`, per color. White
/// voters contribute nothing; self-votes cannot occur because self-loops are
/// dropped at graph construction. Under OPS every in-neighbor has at least
/// the one out-edge we arrived along, so the 1/k weight never divides by
/// zero. Summation runs in in-adjacency order, which pins down the exact
/// floating-point totals and hence tie behavior.
pub fn compute_scores(
    graph: &DirectedGraph,
    colors: &[Color],
    node: usize,
    mode: VoteMode,
) -> ScoreSet {
    let mut z = [0.0f64; 3];
    match mode {
        VoteMode::Opa => {
            for &j in graph.in_neighbors(node) {
                let c = colors[j as usize];
                if c != Color::White {
                    z[c.index() - 1] += 1.0;
                }
            }
        }
        VoteMode::Ops => {
            for &j in graph.in_neighbors(node) {
                let c = colors[j as usize];
                if c != Color::White {
                    z[c.index() - 1] += 1.0 / graph.out_degree(j as usize) as f64;
                }
            }
        }
    }
    ScoreSet { z }
}

/// Deterministic update: adopt the color with the unique strict maximum
/// score; keep the current color when all scores are zero or the maximum is
/// shared. Equality is exact floating-point equality on the accumulated
/// totals, deliberately, so that symmetric neighborhoods tie.
pub fn update_color_zero_t(current: Color, scores: &ScoreSet) -> Color {
    let z = &scores.z;
    let max = z[0].max(z[1]).max(z[2]);
    if max == 0.0 {
        return current;
    }
    let mut winner = 0;
    let mut hits = 0;
    for (k, &v) in z.iter().enumerate() {
        if v == max {
            winner = k;
            hits += 1;
        }
    }
    if hits == 1 {
        COLORS[winner + 1]
    } else {
        current
    }
}

/// The thermal two-color rule: a visited node with any colored in-neighbor
/// redraws its color, red with probability
/// `W+ = Z+^beta / (Z+^beta + Z-^beta)`, blue otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperatureRule {
    pub beta: f64,
}

impl TemperatureRule {
    /// beta = 1/T. Use only for T > 0; T = 0 is the deterministic rule.
    pub fn from_temperature(t: f64) -> Self {
        TemperatureRule { beta: 1.0 / t }
    }

    /// Probability of drawing red. Conventions: with beta > 0, a zero score
    /// is a zero weight (0^beta = 0), so a one-sided neighborhood decides
    /// with certainty; beta = 0 (infinite temperature) is a fair coin. The
    /// both-sides-positive case is evaluated through score logarithms, which
    /// cannot overflow where `Z^beta` itself would.
    pub fn w_plus(&self, z_plus: f64, z_minus: f64) -> f64 {
        debug_assert!(z_plus >= 0.0 && z_minus >= 0.0);
        if self.beta == 0.0 {
            return 0.5;
        }
        if z_minus == 0.0 {
            // Includes the (0, 0) case, where callers keep the node unchanged
            // and never consult this probability.
            return 1.0;
        }
        if z_plus == 0.0 {
            return 0.0;
        }
        1.0 / (1.0 + (self.beta * (z_minus.ln() - z_plus.ln())).exp())
    }

    pub fn w_minus(&self, z_plus: f64, z_minus: f64) -> f64 {
        1.0 - self.w_plus(z_plus, z_minus)
    }
}

/// Thermal update from a pre-drawn uniform `u` in [0, 1). With both scores
/// zero the node is untouched and `u` is ignored; the engine does not even
/// draw it, which keeps zero-temperature and thermal runs on aligned RNG
/// streams for white-neighborhood visits.
pub fn update_color_finite_t(
    current: Color,
    scores: &ScoreSet,
    rule: &TemperatureRule,
    u: f64,
) -> Color {
    debug_assert_eq!(scores.z[2], 0.0, "thermal updates are two-color only");
    let (zp, zm) = (scores.z_plus(), scores.z_minus());
    if zp + zm == 0.0 {
        return current;
    }
    if u < rule.w_plus(zp, zm) {
        Color::Red
    } else {
        Color::Blue
    }
}

/// Per-node colors within one realization, plus running totals.
#[derive(Clone, Debug)]
pub struct ColorState {
    colors: Vec<Color>,
    fixed: Vec<bool>,
    // Non-fixed nodes; reshuffled in place at the start of every pass. A
    // shuffle of any permutation is still uniform, so carrying the previous
    // order over is fine.
    order: Vec<u32>,
    counts: [u64; 4],
}

impl ColorState {
    /// All-white initial state with the seeds planted. Assumes a validated
    /// assignment.
    pub fn new(node_count: usize, seeds: &SeedAssignment) -> Self {
        let mut colors = vec![Color::White; node_count];
        let mut fixed = vec![false; node_count];
        for &color in [Color::Red, Color::Blue, Color::Green].iter() {
            for &i in seeds.nodes_of(color) {
                colors[i as usize] = color;
                fixed[i as usize] = true;
            }
        }
        let order: Vec<u32> = (0..node_count as u32).filter(|&i| !fixed[i as usize]).collect();
        let mut counts = [0u64; 4];
        for &c in &colors {
            counts[c.index()] += 1;
        }
        ColorState {
            colors,
            fixed,
            order,
            counts,
        }
    }

    pub fn node_count(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, i: usize) -> Color {
        self.colors[i]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    pub fn non_fixed(&self) -> &[u32] {
        &self.order
    }

    /// `[white, red, blue, green]` totals over all nodes, seeds included.
    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn count(&self, color: Color) -> u64 {
        self.counts[color.index()]
    }

    /// Recolor a node, enforcing the two state invariants: fixed nodes never
    /// change and a colored node never returns to white. For custom update
    /// loops built from the public score/update functions.
    pub fn set_color(&mut self, i: usize, color: Color) {
        assert!(!self.fixed[i], "node {i} holds a fixed opinion");
        assert!(
            !(color == Color::White && self.colors[i] != Color::White),
            "node {i} cannot return to white"
        );
        let old = self.colors[i];
        if old != color {
            self.counts[old.index()] -= 1;
            self.counts[color.index()] += 1;
            self.colors[i] = color;
        }
    }
}

/// Derive the ChaCha stream for realization `r` of a run. Shuffles and
/// thermal draws of that realization all come from this one stream, consumed
/// in visit order.
pub fn realization_rng(master_seed: u64, realization: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization as u64);
    rng
}

/// One pass: shuffle the non-fixed nodes, visit each once, update in place.
/// Returns the switch count (any color change, including leaving white).
pub fn run_pass<R: Rng>(
    graph: &DirectedGraph,
    state: &mut ColorState,
    config: &SimConfig,
    rng: &mut R,
) -> u32 {
    state.order.shuffle(rng);
    let thermal = (config.temperature > 0.0)
        .then(|| TemperatureRule::from_temperature(config.temperature));
    let mut switches = 0u32;
    for idx in 0..state.order.len() {
        let i = state.order[idx] as usize;
        let scores = compute_scores(graph, &state.colors, i, config.mode);
        let current = state.colors[i];
        let new = match thermal {
            None => update_color_zero_t(current, &scores),
            Some(rule) => {
                if scores.z_plus() + scores.z_minus() > 0.0 {
                    let u = rng.random::<f64>();
                    update_color_finite_t(current, &scores, &rule, u)
                } else {
                    current // no colored voters: no draw consumed
                }
            }
        };
        if new != current {
            state.counts[current.index()] -= 1;
            state.counts[new.index()] += 1;
            state.colors[i] = new;
            switches += 1;
        }
    }
    switches
}

/// Everything one realization produced.
#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub index: usize,
    pub final_colors: Vec<Color>,
    /// Switches per pass, length `tau_max`.
    pub switch_counts: Vec<u32>,
    /// `[white, red, blue, green]` totals after each pass.
    pub per_pass_counts: Vec<[u64; 4]>,
}

impl RealizationResult {
    pub fn final_counts(&self) -> [u64; 4] {
        *self
            .per_pass_counts
            .last()
            .expect("tau_max >= 1 guarantees at least one pass")
    }
}

/// Run realization `r` of the configured ensemble.
///
/// Panics if the config or seeds are invalid; `run_ensemble` validates once
/// up front, direct callers can do the same.
pub fn run_realization(
    graph: &DirectedGraph,
    seeds: &SeedAssignment,
    config: &SimConfig,
    realization: usize,
) -> RealizationResult {
    config.validate().expect("invalid SimConfig");
    seeds
        .validate(graph.node_count(), config.colors)
        .expect("invalid SeedAssignment");
    let mut rng = realization_rng(config.master_seed, realization);
    let mut state = ColorState::new(graph.node_count(), seeds);
    let mut switch_counts = Vec::with_capacity(config.tau_max);
    let mut per_pass_counts = Vec::with_capacity(config.tau_max);
    for _ in 0..config.tau_max {
        let switches = run_pass(graph, &mut state, config, &mut rng);
        switch_counts.push(switches);
        per_pass_counts.push(state.counts());
    }
    RealizationResult {
        index: realization,
        final_colors: state.colors,
        switch_counts,
        per_pass_counts,
    }
}

/// Per-node final-outcome counts accumulated over realizations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeAggregate {
    counts: Vec<[u32; 4]>,
    n_realizations: usize,
}

impl NodeAggregate {
    pub fn new(node_count: usize) -> Self {
        NodeAggregate {
            counts: vec![[0; 4]; node_count],
            n_realizations: 0,
        }
    }

    /// Assemble an aggregate from precomputed rows, for synthetic tables.
    /// Every row must sum to `n_realizations`.
    pub fn from_counts(counts: Vec<[u32; 4]>, n_realizations: usize) -> Self {
        for row in &counts {
            let total: u64 = row.iter().map(|&c| c as u64).sum();
            assert_eq!(total, n_realizations as u64, "row must sum to n_realizations");
        }
        NodeAggregate {
            counts,
            n_realizations,
        }
    }

    pub fn node_count(&self) -> usize {
        self.counts.len()
    }

    pub fn n_realizations(&self) -> usize {
        self.n_realizations
    }

    /// `[n_white, n_red, n_blue, n_green]` for one node.
    pub fn counts(&self, i: usize) -> [u32; 4] {
        self.counts[i]
    }

    pub fn count(&self, i: usize, color: Color) -> u32 {
        self.counts[i][color.index()]
    }

    /// Total non-white outcomes of node i.
    pub fn colored_total(&self, i: usize) -> u64 {
        let c = &self.counts[i];
        c[1] as u64 + c[2] as u64 + c[3] as u64
    }

    pub fn record(&mut self, final_colors: &[Color]) {
        assert_eq!(final_colors.len(), self.counts.len());
        for (slot, &c) in self.counts.iter_mut().zip(final_colors) {
            slot[c.index()] += 1;
        }
        self.n_realizations += 1;
    }

    pub fn merge(&mut self, other: &NodeAggregate) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for k in 0..4 {
                a[k] += b[k];
            }
        }
        self.n_realizations += other.n_realizations;
    }
}

/// Compact per-realization record kept by ensembles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationRecord {
    pub index: usize,
    /// `[white, red, blue, green]` totals of the final state.
    pub final_counts: [u64; 4],
    pub switch_counts: Vec<u32>,
    /// Per-pass totals, kept only for traced ensembles.
    pub per_pass_counts: Option<Vec<[u64; 4]>>,
}

#[derive(Clone, Debug)]
pub struct EnsembleOptions {
    /// Keep per-batch aggregates in this many equal batches for the
    /// subdivision error estimator. Skipped silently when the realization
    /// count is not divisible by it.
    pub subdivision_samples: Option<usize>,
    /// Retain per-pass color totals in every record (multiplies record size
    /// by tau_max).
    pub trace: bool,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            subdivision_samples: Some(DEFAULT_SUBDIVISION_SAMPLES),
            trace: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub aggregate: NodeAggregate,
    /// One record per realization, in realization order.
    pub realizations: Vec<RealizationRecord>,
    /// Aggregates over equal consecutive batches of realizations, present
    /// when batching was requested and divides the realization count.
    pub batches: Option<Vec<NodeAggregate>>,
}

/// `run_ensemble_with` under default options.
pub fn run_ensemble(
    graph: &DirectedGraph,
    seeds: &SeedAssignment,
    config: &SimConfig,
) -> Result<EnsembleResult, SimError> {
    run_ensemble_with(graph, seeds, config, &EnsembleOptions::default())
}

/// Run the full ensemble, parallelized over contiguous chunks of
/// realizations. The chunk layout depends only on the configuration, every
/// realization owns its RNG stream, and merging adds integers in chunk
/// order, so the result is identical whatever the thread count.
pub fn run_ensemble_with(
    graph: &DirectedGraph,
    seeds: &SeedAssignment,
    config: &SimConfig,
    options: &EnsembleOptions,
) -> Result<EnsembleResult, SimError> {
    config.validate()?;
    seeds.validate(graph.node_count(), config.colors)?;
    let n_r = config.n_realizations;
    let batching = options
        .subdivision_samples
        .filter(|&s| s >= 2 && s <= n_r && n_r % s == 0);
    let n_chunks = batching.unwrap_or_else(|| n_r.min(256));

    let chunk_results: Vec<(NodeAggregate, Vec<RealizationRecord>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * n_r / n_chunks;
            let end = (chunk + 1) * n_r / n_chunks;
            let mut agg = NodeAggregate::new(graph.node_count());
            let mut records = Vec::with_capacity(end - start);
            for r in start..end {
                let result = run_realization(graph, seeds, config, r);
                agg.record(&result.final_colors);
                records.push(RealizationRecord {
                    index: r,
                    final_counts: result.final_counts(),
                    switch_counts: result.switch_counts,
                    per_pass_counts: options.trace.then_some(result.per_pass_counts),
                });
            }
            (agg, records)
        })
        .collect();

    let mut aggregate = NodeAggregate::new(graph.node_count());
    let mut realizations = Vec::with_capacity(n_r);
    let mut batch_aggs = Vec::with_capacity(if batching.is_some() { n_chunks } else { 0 });
    for (agg, records) in chunk_results {
        aggregate.merge(&agg);
        if batching.is_some() {
            batch_aggs.push(agg);
        }
        realizations.extend(records);
    }
    Ok(EnsembleResult {
        aggregate,
        realizations,
        batches: batching.map(|_| batch_aggs),
    })
}
