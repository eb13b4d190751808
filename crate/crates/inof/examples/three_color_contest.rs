//! Three fixed opinions compete on a sparse random digraph at zero
//! temperature. Per-node occupation fractions eta = (eta_r, eta_b, eta_g)
//! over the colored outcomes replace the two-color polarization; they sum
//! to one exactly.
//!
//! Run with: cargo run --example three_color_contest

use inof::dynamics::run_ensemble;
use inof::netgen::{generate, GenSpec};
use inof::stats::color_polarization_table;
use inof::{SeedAssignment, SimConfig, VoteMode};

fn main() {
    let graph = generate(&GenSpec::ErDirected { nodes: 400, p: 0.006 }, 7).unwrap();
    // Three well spread seed nodes; any choice works as long as they differ.
    let seeds = SeedAssignment::three_color(vec![0], vec![133], vec![266]);
    let mut config = SimConfig::three_color(VoteMode::Ops, 9);
    config.n_realizations = 1000;

    let result = run_ensemble(&graph, &seeds, &config).unwrap();
    let table = color_polarization_table(&result.aggregate, config.white_threshold).unwrap();

    let [r0, b0, g0] = table.eta0;
    println!(
        "classified {} of {} nodes; network shares eta0 = ({r0:.3}, {b0:.3}, {g0:.3})",
        table.classified_count,
        table.node_count()
    );
    assert_eq!(r0 + b0 + g0, 1.0);

    // Sample a few nodes across the index range.
    println!("\n{:>6} {:>8} {:>8} {:>8}  leaning", "node", "eta_r", "eta_b", "eta_g");
    for i in (0..graph.node_count()).step_by(57) {
        match table.eta[i] {
            Some([r, b, g]) => {
                let lean = if r >= b && r >= g {
                    "red"
                } else if b >= g {
                    "blue"
                } else {
                    "green"
                };
                println!("{i:>6} {r:>8.3} {b:>8.3} {g:>8.3}  {lean}");
            }
            None => println!("{i:>6} {:>8} {:>8} {:>8}  undecided", "-", "-", "-"),
        }
    }

    // Deviations from the network-wide share also cancel exactly.
    let idx = table
        .delta_eta
        .iter()
        .position(|d| d.is_some())
        .expect("at least one classified node");
    let [dr, db, dg] = table.delta_eta[idx].unwrap();
    assert_eq!(dr + db + dg, 0.0);
    println!("\nnode {idx} deviation from eta0: ({dr:+.3}, {db:+.3}, {dg:+.3}), sums to zero");
}
