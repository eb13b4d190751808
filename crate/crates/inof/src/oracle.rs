//! Exact brute-force evaluation of the zero-temperature process on tiny
//! graphs. Visit orders within a pass are i.i.d. uniform permutations, so
//! the one-pass transition kernel is the average of the deterministic pass
//! map over all F! orders of the F non-fixed nodes; iterating it from the
//! all-white state gives the exact ensemble distribution that Monte Carlo
//! runs only estimate. Used as ground truth in tests and exposed through
//! the `oracle` CLI subcommand.

use crate::dynamics::{
    compute_scores, update_color_zero_t, Color, ColorCount, ColorState, SeedAssignment, SimConfig,
    SimError,
};
use crate::graph::DirectedGraph;
use itertools::Itertools;
use std::collections::BTreeMap;
use thiserror::Error;

/// Orders grow as F!, states as 4^F; past this the kernel build stops being
/// instant, and the point of the oracle is to be obviously correct, not big.
pub const MAX_FREE_NODES: usize = 7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{found} non-fixed nodes exceed the exact enumeration bound of {max}")]
    TooManyFreeNodes { found: usize, max: usize },
    #[error("exact enumeration covers T = 0 only, got T = {temperature}")]
    TemperatureUnsupported { temperature: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Exact distribution over joint colorings of the non-fixed nodes after
/// `tau_max` passes. States are stored as packed base-(colors+1) indices
/// over the free nodes in ascending node order.
#[derive(Clone, Debug)]
pub struct StateDistribution {
    free_nodes: Vec<u32>,
    colors: ColorCount,
    /// Full coloring with seeds planted and free nodes white; the decoding
    /// canvas.
    template: Vec<Color>,
    probs: BTreeMap<u32, f64>,
}

impl StateDistribution {
    pub fn free_nodes(&self) -> &[u32] {
        &self.free_nodes
    }

    pub fn colors(&self) -> ColorCount {
        self.colors
    }

    pub fn node_count(&self) -> usize {
        self.template.len()
    }

    /// Number of joint states with nonzero probability.
    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total_probability(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Probability of one full coloring. Zero when the coloring disagrees
    /// with the fixed seeds or was never reached.
    pub fn probability(&self, full: &[Color]) -> f64 {
        assert_eq!(full.len(), self.template.len());
        for (i, &c) in self.template.iter().enumerate() {
            if !self.free_nodes.contains(&(i as u32)) && full[i] != c {
                return 0.0;
            }
        }
        let code = encode(&self.free_nodes, self.colors, full);
        self.probs.get(&code).copied().unwrap_or(0.0)
    }

    /// All (full coloring, probability) pairs in deterministic state order.
    pub fn states(&self) -> impl Iterator<Item = (Vec<Color>, f64)> + '_ {
        self.probs.iter().map(move |(&code, &p)| {
            let mut full = self.template.clone();
            decode(&self.free_nodes, self.colors, code, &mut full);
            (full, p)
        })
    }
}

fn encode(free: &[u32], colors: ColorCount, full: &[Color]) -> u32 {
    let base = colors.as_usize() as u32 + 1;
    let mut code = 0u32;
    for &node in free.iter().rev() {
        code = code * base + full[node as usize].index() as u32;
    }
    code
}

fn decode(free: &[u32], colors: ColorCount, mut code: u32, full: &mut [Color]) {
    let base = colors.as_usize() as u32 + 1;
    for &node in free {
        full[node as usize] = Color::from_index((code % base) as usize);
        code /= base;
    }
}

/// Build the exact ensemble distribution for `config.tau_max` passes at
/// T = 0. Uses `config.mode`, `colors`, and `tau_max`; realization count
/// and seeds of the RNG play no role here.
pub fn exact_distribution(
    graph: &DirectedGraph,
    seeds: &SeedAssignment,
    config: &SimConfig,
) -> Result<StateDistribution, OracleError> {
    config.validate()?;
    seeds.validate(graph.node_count(), config.colors)?;
    if config.temperature > 0.0 {
        return Err(OracleError::TemperatureUnsupported {
            temperature: config.temperature,
        });
    }
    let template = ColorState::new(graph.node_count(), seeds).colors().to_vec();
    let fixed: Vec<bool> = {
        let state = ColorState::new(graph.node_count(), seeds);
        (0..graph.node_count()).map(|i| state.is_fixed(i)).collect()
    };
    let free_nodes: Vec<u32> = (0..graph.node_count() as u32)
        .filter(|&i| !fixed[i as usize])
        .collect();
    let f = free_nodes.len();
    if f > MAX_FREE_NODES {
        return Err(OracleError::TooManyFreeNodes {
            found: f,
            max: MAX_FREE_NODES,
        });
    }

    let orders: Vec<Vec<usize>> = (0..f).permutations(f).collect();
    let n_orders = orders.len().max(1) as f64;

    // Breadth-first closure from the all-white state, building each
    // reachable state's kernel row as integer order counts.
    let start = encode(&free_nodes, config.colors, &template);
    let mut kernel: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
    let mut queue = vec![start];
    let mut scratch = template.clone();
    while let Some(code) = queue.pop() {
        if kernel.contains_key(&code) {
            continue;
        }
        let mut row: BTreeMap<u32, u32> = BTreeMap::new();
        if f == 0 {
            row.insert(code, 1);
        }
        for order in &orders {
            scratch.copy_from_slice(&template);
            decode(&free_nodes, config.colors, code, &mut scratch);
            for &pos in order {
                let node = free_nodes[pos] as usize;
                let scores = compute_scores(graph, &scratch, node, config.mode);
                scratch[node] = update_color_zero_t(scratch[node], &scores);
            }
            *row.entry(encode(&free_nodes, config.colors, &scratch))
                .or_insert(0) += 1;
        }
        for &next in row.keys() {
            if !kernel.contains_key(&next) {
                queue.push(next);
            }
        }
        kernel.insert(
            code,
            row.into_iter()
                .map(|(s, c)| (s, c as f64 / n_orders))
                .collect(),
        );
    }

    let mut dist: BTreeMap<u32, f64> = BTreeMap::new();
    dist.insert(start, 1.0);
    for _ in 0..config.tau_max {
        let mut next: BTreeMap<u32, f64> = BTreeMap::new();
        for (&s, &w) in &dist {
            for &(s2, p) in &kernel[&s] {
                *next.entry(s2).or_insert(0.0) += w * p;
            }
        }
        dist = next;
    }

    Ok(StateDistribution {
        free_nodes,
        colors: config.colors,
        template,
        probs: dist,
    })
}

/// Per-node outcome probabilities and exact polarization derived from a
/// state distribution.
#[derive(Clone, Debug)]
pub struct ExactMarginals {
    /// `[P_white, P_red, P_blue, P_green]` per node; fixed seeds carry
    /// probability 1 on their color.
    pub p: Vec<[f64; 4]>,
    /// (P_r - P_b) / (P_r + P_b); `None` for always-white nodes.
    pub mu: Vec<Option<f64>>,
}

pub fn exact_marginals(dist: &StateDistribution) -> ExactMarginals {
    let n = dist.node_count();
    let mut p = vec![[0.0f64; 4]; n];
    for (full, prob) in dist.states() {
        for (i, &c) in full.iter().enumerate() {
            p[i][c.index()] += prob;
        }
    }
    let mu = p
        .iter()
        .map(|probs| {
            let colored = probs[1] + probs[2];
            (colored > 0.0).then(|| (probs[1] - probs[2]) / colored)
        })
        .collect();
    ExactMarginals { p, mu }
}
