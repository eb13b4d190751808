//! Two competing fixed opinions on a scale-free network, deterministic
//! updates. Seeds the two largest hubs against each other, runs an
//! ensemble, and shows the winner-take-all outcome: most realizations end
//! almost entirely red or almost entirely blue.
//!
//! Run with: cargo run --release --example two_color_contest

use std::cmp::Reverse;

use inof::dynamics::run_ensemble;
use inof::netgen::{generate, GenSpec};
use inof::stats::{histogram1d, polarization_table, red_fraction};
use inof::{SeedAssignment, SimConfig, VoteMode};

fn main() {
    let graph = generate(&GenSpec::PaDirected { nodes: 2000, m: 5 }, 12345).unwrap();
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by_key(|&i| (Reverse(graph.in_degree(i)), i));
    let (hub_a, hub_b) = (order[0] as u32, order[1] as u32);
    println!(
        "seeding node {hub_a} (k_in {}) red vs node {hub_b} (k_in {}) blue",
        graph.in_degree(hub_a as usize),
        graph.in_degree(hub_b as usize)
    );

    let seeds = SeedAssignment::two_color(vec![hub_a], vec![hub_b]);
    let mut config = SimConfig::two_color(VoteMode::Opa, 42);
    config.n_realizations = 2000;
    let result = run_ensemble(&graph, &seeds, &config).unwrap();

    // Red fraction of the colored nodes, one value per realization.
    let f_r: Vec<f64> = result
        .realizations
        .iter()
        .filter_map(|r| red_fraction(&r.final_counts))
        .collect();
    let extreme = f_r.iter().filter(|&&f| f > 0.9 || f < 0.1).count();
    println!(
        "{} of {} realizations ended with f_r > 0.9 or < 0.1",
        extreme,
        f_r.len()
    );

    let hist = histogram1d(&f_r, 0.0, 1.0, 20).unwrap();
    println!("\nf_r histogram (each * is 2% of the ensemble):");
    for k in 0..hist.bins() {
        let share = hist.counts[k] as f64 / hist.total as f64;
        println!(
            "  {:>5.2}  {}",
            hist.bin_center(k),
            "*".repeat((share * 50.0).round() as usize)
        );
    }

    // Node-level view: polarization of every node that picked a side.
    let table = polarization_table(&result.aggregate, config.white_threshold).unwrap();
    println!(
        "\nclassified {} of {} nodes, network polarization mu0 = {:+.4}",
        table.classified_count,
        table.node_count(),
        table.mu0
    );
    for &i in order.iter().take(5) {
        match table.mu[i] {
            Some(mu) => println!("  node {i:<5} mu = {mu:+.3}"),
            None => println!("  node {i:<5} unclassified (mostly undecided)"),
        }
    }
}
