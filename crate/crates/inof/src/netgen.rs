//! Deterministic generators for the benchmark networks.
//!
//! All randomness comes from a ChaCha stream seeded by the caller, so the
//! same spec and seed always produce bit-identical edge lists regardless of
//! platform or build.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::DirectedGraph;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParameter(String),
}

/// Which network to generate.
///
/// * `Star`: node 0 (intended red seed) points at every leaf `2..leaves+2`;
///   node 1 (intended blue seed) is isolated. The minimal "one camp wins"
///   fixture.
/// * `Gadget`: the four-node hand-enumerable fixture with edges
///   0->2, 1->3, 2->3, 3->2; seeds on 0 (red) and 1 (blue) give exactly two
///   equally likely frozen outcomes.
/// * `ErDirected`: each ordered pair (i, j), i != j, carries an edge with
///   probability `p` independently.
/// * `PaDirected`: directed preferential attachment. Start from a directed
///   (m+1)-cycle; each later node emits `m` out-edges to distinct existing
///   targets chosen with probability proportional to (in-degree + 1), and
///   every attachment edge is reciprocated, so popular nodes accumulate both
///   in-degree and the out-reach that lets an opinion seeded on a hub spread.
#[derive(Clone, Debug, PartialEq)]
pub enum GenSpec {
    Star { leaves: u32 },
    Gadget,
    ErDirected { nodes: u32, p: f64 },
    PaDirected { nodes: u32, m: u32 },
}

/// Generate a network. Same spec + seed -> bit-identical graph.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<DirectedGraph, GenError> {
    match *spec {
        GenSpec::Star { leaves } => {
            if leaves == 0 {
                return Err(GenError::InvalidParameter("star needs leaves >= 1".into()));
            }
            let n = leaves as usize + 2;
            let edges: Vec<(u32, u32)> = (2..leaves + 2).map(|i| (0, i)).collect();
            Ok(DirectedGraph::from_edges(n, &edges, None))
        }
        GenSpec::Gadget => {
            let edges = [(0, 2), (1, 3), (2, 3), (3, 2)];
            Ok(DirectedGraph::from_edges(4, &edges, None))
        }
        GenSpec::ErDirected { nodes, p } => {
            if nodes < 2 {
                return Err(GenError::InvalidParameter(format!(
                    "directed ER needs nodes >= 2, got {nodes}"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::InvalidParameter(format!(
                    "edge probability must lie in [0, 1], got {p}"
                )));
            }
            let n = nodes as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..nodes {
                for j in 0..nodes {
                    if i == j {
                        continue;
                    }
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            Ok(DirectedGraph::from_edges(n, &edges, None))
        }
        GenSpec::PaDirected { nodes, m } => {
            if m == 0 {
                return Err(GenError::InvalidParameter("attachment needs m >= 1".into()));
            }
            if m >= nodes {
                return Err(GenError::InvalidParameter(format!(
                    "attachment needs m < nodes, got m={m}, nodes={nodes}"
                )));
            }
            Ok(preferential_attachment(nodes, m, seed))
        }
    }
}

fn preferential_attachment(nodes: u32, m: u32, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // Every in-edge endpoint lands in this list once, so a uniform draw from
    // it is a draw proportional to in-degree; mixing in a uniform node draw
    // adds the +1 offset that lets in-degree-zero nodes be chosen.
    let mut hit_list: Vec<u32> = Vec::new();

    let cycle = m + 1;
    for i in 0..cycle {
        let j = (i + 1) % cycle;
        edges.push((i, j));
        hit_list.push(j);
    }

    let mut chosen: Vec<u32> = Vec::with_capacity(m as usize);
    for v in cycle..nodes {
        chosen.clear();
        while chosen.len() < m as usize {
            let total = hit_list.len() + v as usize;
            let r = rng.random_range(0..total);
            let t = if r < hit_list.len() {
                hit_list[r]
            } else {
                (r - hit_list.len()) as u32
            };
            if chosen.contains(&t) {
                continue; // rejection keeps the m targets distinct
            }
            chosen.push(t);
        }
        for &t in &chosen {
            edges.push((v, t));
            hit_list.push(t);
            // Reciprocal edge: the popular node links back, giving hubs the
            // out-degree to broadcast an opinion planted on them.
            edges.push((t, v));
            hit_list.push(v);
        }
    }
    DirectedGraph::from_edges(nodes as usize, &edges, None)
}

/// Exact edge count of `PaDirected { nodes, m }`: the initial cycle plus a
/// reciprocated pair per attachment.
pub fn pa_edge_count(nodes: u32, m: u32) -> usize {
    (m as usize + 1) + 2 * m as usize * (nodes as usize - m as usize - 1)
}
