//! Compare the two error bars on the network polarization mu0: the
//! independent-outcome formula sqrt((1 - mu0^2) / (N_r - 1)) and the
//! empirical subdivision estimate from splitting the ensemble into equal
//! batches. On correlated outcomes the two can differ a lot, which is why
//! both are reported.
//!
//! Run with: cargo run --release --example error_estimates

use inof::dynamics::{run_ensemble_with, EnsembleOptions};
use inof::netgen::{generate, GenSpec};
use inof::stats::{polarization_table, subdivision_errors, theoretical_error};
use inof::{SeedAssignment, SimConfig, VoteMode};

fn main() {
    let graph = generate(&GenSpec::ErDirected { nodes: 300, p: 0.02 }, 5).unwrap();
    let seeds = SeedAssignment::two_color(vec![0, 1], vec![2, 3]);

    let mut config = SimConfig::two_color(VoteMode::Opa, 77);
    config.n_realizations = 10_000;
    config.temperature = 1.5; // fluctuations keep outcomes from freezing
    let options = EnsembleOptions {
        subdivision_samples: Some(100),
        trace: false,
    };
    let result = run_ensemble_with(&graph, &seeds, &config, &options).unwrap();

    let table = polarization_table(&result.aggregate, config.white_threshold).unwrap();
    let batches = result.batches.as_ref().expect("batching was requested");
    let errors = subdivision_errors(batches, config.white_threshold).unwrap();

    println!(
        "mu0 = {:+.4} over {} classified nodes, N_r = {}",
        table.mu0, table.classified_count, config.n_realizations
    );
    println!(
        "  theoretical error: {:.5}",
        theoretical_error(table.mu0, config.n_realizations)
    );
    println!(
        "  subdivision error: {:.5}  ({} batches of {})",
        errors.mu0_err,
        errors.samples,
        config.n_realizations / errors.samples
    );

    // Per-node errors for a few nodes, on mu and on the deviation
    // delta mu = mu - mu0.
    println!("\n{:>6} {:>9} {:>10} {:>12}", "node", "mu", "err(mu)", "err(dmu)");
    for i in (4..graph.node_count()).step_by(59) {
        if let (Some(mu), Some(e), Some(de)) =
            (table.mu[i], errors.mu_err[i], errors.delta_mu_err[i])
        {
            println!("{i:>6} {mu:>+9.4} {e:>10.5} {de:>12.5}");
        }
    }

    // The batch means behind mu0_err, summarized.
    let mean: f64 = errors.mu0_samples.iter().sum::<f64>() / errors.mu0_samples.len() as f64;
    let spread = errors
        .mu0_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    println!(
        "\nbatch mu0 samples: mean {mean:+.4}, range [{:+.4}, {:+.4}]",
        spread.0, spread.1
    );
}
