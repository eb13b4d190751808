//! Directed graphs stored in compressed in-adjacency form.
//!
//! The dynamics only ever asks "who votes on node i" (the in-neighbors of i)
//! and "how much does voter j count" (1 for OPA, 1/k_j for OPS where k_j is
//! j's out-degree), so the graph keeps a CSR layout over in-edges plus an
//! out-degree table and nothing else. Parallel edges collapse to one and
//! self-loops are dropped at construction: a node never votes on itself.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How a voter's contribution to a score is weighted.
///
/// `Opa` counts every in-neighbor with weight 1 (adjacency-matrix voting).
/// `Ops` weights voter j by 1/k_j, the column-normalized Markov weight, so
/// each node distributes one unit of influence over its out-neighbors;
/// out-degree-zero nodes get weight 0 instead of the dangling-node uniform
/// column, which is out of scope here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteMode {
    Opa,
    Ops,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty edge list: no edges and no node declarations")]
    Empty,
    #[error("label line {line}: {message}")]
    LabelParse { line: usize, message: String },
    #[error("label index {index} out of range for {nodes} nodes")]
    LabelIndex { index: usize, nodes: usize },
}

/// Raw parse result of an edge-list file: edges as dense indices plus the
/// node tokens in first-appearance order (`tokens.len()` is the node count).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<(u32, u32)>,
    pub tokens: Vec<String>,
}

/// Parse an edge list: one `SOURCE TARGET` pair of whitespace-separated
/// tokens per line. Lines starting with `#` are comments and blank lines are
/// skipped, with one structured exception: a header comment `# nodes: K`
/// declares nodes `"0"` through `"K-1"` up front, which is how graphs with
/// isolated nodes (or no edges at all) survive a round trip through a file.
/// Tokens map to dense indices in order of first appearance.
pub fn load_edge_list(text: &str) -> Result<EdgeList, GraphError> {
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();

    let intern = |tok: &str, index: &mut HashMap<String, u32>, tokens: &mut Vec<String>| {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = u32::try_from(tokens.len()).expect("node count exceeds u32 range");
        index.insert(tok.to_string(), i);
        tokens.push(tok.to_string());
        i
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            // `# nodes: K` is the one structured comment; anything else is noise.
            if let Some(spec) = comment.trim().strip_prefix("nodes:") {
                let count: usize = spec.trim().parse().map_err(|_| GraphError::Parse {
                    line,
                    message: format!("invalid node count {:?} in nodes header", spec.trim()),
                })?;
                for k in 0..count {
                    intern(&k.to_string(), &mut index, &mut tokens);
                }
            }
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (src, dst) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(d), None) => (s, d),
            _ => {
                return Err(GraphError::Parse {
                    line,
                    message: format!(
                        "expected two whitespace-separated node tokens, got {:?}",
                        trimmed
                    ),
                })
            }
        };
        let s = intern(src, &mut index, &mut tokens);
        let d = intern(dst, &mut index, &mut tokens);
        edges.push((s, d));
    }

    if tokens.is_empty() {
        return Err(GraphError::Empty);
    }
    Ok(EdgeList { edges, tokens })
}

/// Parse a label file: one `INDEX<TAB>LABEL` per line, `#` comments and blank
/// lines skipped. Indices are validated against a graph only when applied.
pub fn load_label_file(text: &str) -> Result<Vec<(usize, String)>, GraphError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let (idx, label) = trimmed.split_once('\t').ok_or_else(|| GraphError::LabelParse {
            line,
            message: "expected INDEX<TAB>LABEL".to_string(),
        })?;
        let index: usize = idx.trim().parse().map_err(|_| GraphError::LabelParse {
            line,
            message: format!("invalid node index {:?}", idx.trim()),
        })?;
        out.push((index, label.to_string()));
    }
    Ok(out)
}

/// A directed graph over nodes `0..node_count()`, immutable once built.
///
/// Stored as CSR over in-edges: `in_neighbors(i)` lists the sources j of all
/// edges j -> i in ascending order, which also fixes the summation order for
/// scores. Out-degrees are kept per node; OPS weights are computed from them
/// on the fly rather than stored per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    out_degrees: Vec<u32>,
    labels: Option<Vec<String>>,
}

impl DirectedGraph {
    /// Build from raw edges, collapsing duplicate edges and dropping
    /// self-loops. Panics if an endpoint is out of range: callers produce
    /// indices from `load_edge_list` or a generator, so a violation is a bug.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)], labels: Option<Vec<String>>) -> Self {
        assert!(
            u32::try_from(node_count).is_ok(),
            "node count {} exceeds u32 range",
            node_count
        );
        if let Some(ref l) = labels {
            assert_eq!(l.len(), node_count, "label count must match node count");
        }
        let mut clean: Vec<(u32, u32)> = edges
            .iter()
            .copied()
            .filter(|&(s, d)| {
                assert!(
                    (s as usize) < node_count && (d as usize) < node_count,
                    "edge ({}, {}) out of range for {} nodes",
                    s,
                    d,
                    node_count
                );
                s != d
            })
            .collect();
        // Sort by (target, source): gives the CSR layout directly and makes
        // duplicate edges adjacent for dedup.
        clean.sort_unstable_by_key(|&(s, d)| (d, s));
        clean.dedup();

        let mut in_offsets = vec![0usize; node_count + 1];
        let mut out_degrees = vec![0u32; node_count];
        for &(s, d) in &clean {
            in_offsets[d as usize + 1] += 1;
            out_degrees[s as usize] += 1;
        }
        for i in 0..node_count {
            in_offsets[i + 1] += in_offsets[i];
        }
        let in_sources = clean.iter().map(|&(s, _)| s).collect();
        DirectedGraph {
            in_offsets,
            in_sources,
            out_degrees,
            labels,
        }
    }

    /// Build from a parsed edge list, using its tokens as labels.
    pub fn from_edge_list(list: &EdgeList) -> Self {
        Self::from_edges(list.tokens.len(), &list.edges, Some(list.tokens.clone()))
    }

    pub fn node_count(&self) -> usize {
        self.out_degrees.len()
    }

    /// Number of distinct edges after deduplication and self-loop removal.
    pub fn edge_count(&self) -> usize {
        self.in_sources.len()
    }

    /// Sources j of all edges j -> i, ascending.
    pub fn in_neighbors(&self, i: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_offsets[i + 1] - self.in_offsets[i]
    }

    pub fn out_degree(&self, j: usize) -> u32 {
        self.out_degrees[j]
    }

    /// A dangling node has no outgoing edges and therefore no vote under OPS.
    pub fn is_dangling(&self, j: usize) -> bool {
        self.out_degrees[j] == 0
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label for a node: its stored label, or the index as text.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Overwrite labels for the given nodes, initializing missing labels to
    /// the node index. Errors if an index is out of range.
    pub fn apply_labels(&mut self, pairs: &[(usize, String)]) -> Result<(), GraphError> {
        let n = self.node_count();
        let labels = self
            .labels
            .get_or_insert_with(|| (0..n).map(|i| i.to_string()).collect());
        for (index, label) in pairs {
            if *index >= n {
                return Err(GraphError::LabelIndex {
                    index: *index,
                    nodes: n,
                });
            }
            labels[*index] = label.clone();
        }
        Ok(())
    }

    /// All edges as (source, target), sorted by (source, target).
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.node_count() {
            for &j in self.in_neighbors(i) {
                out.push((j, i as u32));
            }
        }
        out.sort_unstable();
        out
    }

    /// Serialize to the edge-list format `load_edge_list` reads back. The
    /// `# nodes:` header preserves isolated nodes; rebuilding from this text
    /// yields a graph identical up to labels.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nodes: {}", self.node_count());
        for (src, dst) in self.edges() {
            let _ = writeln!(s, "{} {}", src, dst);
        }
        s
    }

    /// Which nodes are reachable from `sources` along edge directions
    /// (influence flows source -> target). Sources themselves are reachable.
    /// Runs relaxation sweeps over the in-adjacency to a fixed point.
    pub fn reachable_from(&self, sources: &[u32]) -> Vec<bool> {
        let n = self.node_count();
        let mut reached = vec![false; n];
        for &s in sources {
            reached[s as usize] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                if reached[i] {
                    continue;
                }
                if self.in_neighbors(i).iter().any(|&j| reached[j as usize]) {
                    reached[i] = true;
                    changed = true;
                }
            }
        }
        reached
    }
}

/// Weight of voter j's opinion in any score it contributes to.
pub fn vote_weight(graph: &DirectedGraph, j: usize, mode: VoteMode) -> f64 {
    match mode {
        VoteMode::Opa => 1.0,
        VoteMode::Ops => {
            let k = graph.out_degree(j);
            if k == 0 {
                0.0
            } else {
                1.0 / k as f64
            }
        }
    }
}
