//! Opinion formation by asynchronous majority vote on directed networks.
//!
//! Nodes carry one of two (red/blue) or three (red/blue/green) opinions, or none
//! (white). A handful of seed nodes hold fixed opinions; everyone else starts
//! white and updates by majority vote over in-neighbors, either unweighted
//! ([`VoteMode::Opa`]) or weighted by the inverse out-degree of the voter
//! ([`VoteMode::Ops`]). Updates are asynchronous: each pass visits the
//! non-fixed nodes once in a fresh random order, recomputing every score
//! against the current state. At zero temperature the strict majority wins and
//! ties leave a node unchanged; at finite temperature the node redraws its
//! color with probabilities built from the score pair. Ensembles of
//! realizations are aggregated into per-node outcome counts from which
//! polarization tables, histograms and error estimates are computed.
//!
//! Modules:
//!
//! * [`graph`]: directed graphs in compressed in-adjacency form, edge-list
//!   parsing and serialization, vote weights.
//! * [`netgen`]: deterministic generators for the test networks (star,
//!   four-node gadget, directed Erdos-Renyi, preferential attachment).
//! * [`dynamics`]: score computation, update rules, passes, realizations and
//!   reproducible parallel ensembles.
//! * [`stats`]: polarization tables, histograms, error estimators, Spearman
//!   correlation and temperature sweeps.
//! * [`oracle`]: exact distribution over final states by enumerating all
//!   visit orders, for small systems.
//! * [`cli`]: the `inof` command-line interface (`gen`, `run`, `hist`,
//!   `oracle`).
//!
//! Quick start: two fixed camps on a small star network.
//!
//! ```
//! use inof::{netgen, dynamics, stats};
//!
//! let graph = netgen::generate(&netgen::GenSpec::Star { leaves: 8 }, 0).unwrap();
//! let seeds = dynamics::SeedAssignment::two_color(vec![0], vec![1]);
//! let config = dynamics::SimConfig {
//!     n_realizations: 100,
//!     ..dynamics::SimConfig::two_color(inof::VoteMode::Opa, 42)
//! };
//! let ensemble = dynamics::run_ensemble(&graph, &seeds, &config).unwrap();
//! let table = stats::polarization_table(&ensemble.aggregate, config.white_threshold).unwrap();
//! assert_eq!(table.mu[2], Some(1.0)); // every leaf copies the red hub
//! assert_eq!(table.mu0, 0.8); // 8 red leaves + the two opposing seeds
//! ```

pub mod cli;
pub mod dynamics;
pub mod graph;
pub mod netgen;
pub mod oracle;
pub mod stats;

pub use dynamics::{Color, ColorCount, SeedAssignment, SimConfig};
pub use graph::{DirectedGraph, VoteMode};
