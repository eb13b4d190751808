//! Sweep the temperature of a two-hub contest and watch order melt.
//! At T = 0 opinions freeze within a few passes and late switches vanish;
//! raising T makes the vote probabilistic and the late-pass switch rate
//! climbs toward the coin-flip limit of one half.
//!
//! Run with: cargo run --release --example temperature_melting

use std::cmp::Reverse;

use inof::netgen::{generate, GenSpec};
use inof::stats::switch_curve;
use inof::{SeedAssignment, SimConfig, VoteMode};

fn main() {
    let graph = generate(&GenSpec::PaDirected { nodes: 2000, m: 5 }, 12345).unwrap();
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by_key(|&i| (Reverse(graph.in_degree(i)), i));
    let seeds = SeedAssignment::two_color(vec![order[0] as u32], vec![order[1] as u32]);

    let mut base = SimConfig::two_color(VoteMode::Opa, 4242);
    base.n_realizations = 400;
    let temperatures = [0.0, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0];

    let points = switch_curve(&graph, &seeds, &base, &temperatures).unwrap();

    println!(
        "{:>6} {:>14} {:>12}   switch fraction by pass (first 8)",
        "T", "final switches", "std error"
    );
    for p in &points {
        let head: Vec<String> = p
            .per_pass_mean
            .iter()
            .take(8)
            .map(|v| format!("{v:.3}"))
            .collect();
        println!(
            "{:>6} {:>14.4} {:>12.4}   {}",
            p.temperature,
            p.mean_final,
            p.std_error,
            head.join(" ")
        );
    }

    let cold = points.first().unwrap().mean_final;
    let hot = points.last().unwrap().mean_final;
    println!(
        "\nlate-pass switch rate grows from {cold:.4} at T = {} to {hot:.4} at T = {}",
        temperatures[0],
        temperatures[temperatures.len() - 1]
    );
}
