//! Ensemble statistics: per-realization color fractions, polarization
//! tables, the theoretical and subdivision error estimators, histograms,
//! Spearman rank correlation, and the temperature sweep that locates the
//! melting transition.

use crate::dynamics::{
    run_ensemble_with, ColorCount, EnsembleOptions, NodeAggregate, SeedAssignment, SimConfig,
    SimError,
};
use crate::graph::DirectedGraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("input contains no values")]
    Empty,
    #[error("inputs have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("value {value} outside histogram range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("histogram needs bins >= 1 and lo < hi, got {bins} bins over [{lo}, {hi}]")]
    BadBins { bins: usize, lo: f64, hi: f64 },
    #[error("input vector is constant, rank correlation undefined")]
    ConstantInput,
    #[error("white threshold must lie in (0, 1], got {value}")]
    BadThreshold { value: f64 },
    #[error("no node meets the classification threshold")]
    NoClassifiedNodes,
    #[error("aggregate has green outcomes, expected a 2-color run")]
    NotTwoColor,
    #[error(
        "cannot split {n_realizations} realizations into {samples} equal samples; \
         choose a realization count divisible by the sample count"
    )]
    UnevenSubdivision { n_realizations: usize, samples: usize },
    #[error("subdivision needs at least 2 usable sample batches, got {got}")]
    TooFewBatches { got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Fraction of each active color among the colored nodes of one final
/// state, in active-color order (red, blue[, green]). Counts include fixed
/// seed nodes; white nodes enter neither numerator nor denominator. The
/// last fraction is computed as one minus the others so the vector sums to
/// 1.0 exactly. `None` when every node is white.
pub fn realization_fractions(final_counts: &[u64; 4], colors: ColorCount) -> Option<Vec<f64>> {
    let active = colors.as_usize();
    let colored: u64 = final_counts[1..=active].iter().sum();
    if colored == 0 {
        return None;
    }
    let mut fractions = Vec::with_capacity(active);
    let mut partial = 0.0;
    for &count in &final_counts[1..active] {
        let f = count as f64 / colored as f64;
        partial += f;
        fractions.push(f);
    }
    fractions.push(1.0 - partial);
    Some(fractions)
}

/// f_r of one final state: red outcomes over colored outcomes, `None` when
/// all nodes stayed white. Works for 2- and 3-color counts.
pub fn red_fraction(final_counts: &[u64; 4]) -> Option<f64> {
    let colored = final_counts[1] + final_counts[2] + final_counts[3];
    (colored > 0).then(|| final_counts[1] as f64 / colored as f64)
}

/// Per-node spin polarization over an ensemble. Nodes below the
/// classification cut are carried as `None`.
#[derive(Clone, Debug)]
pub struct PolarizationTable {
    /// mu_i = (n_r - n_b) / (n_r + n_b) for classified nodes.
    pub mu: Vec<Option<f64>>,
    /// delta mu_i = mu_i - mu_0.
    pub delta_mu: Vec<Option<f64>>,
    /// Unweighted mean of mu_i over classified nodes (fixed seeds included
    /// when they classify).
    pub mu0: f64,
    pub classified_count: usize,
}

impl PolarizationTable {
    pub fn node_count(&self) -> usize {
        self.mu.len()
    }

    pub fn is_classified(&self, i: usize) -> bool {
        self.mu[i].is_some()
    }
}

fn check_threshold(white_threshold: f64) -> Result<(), StatsError> {
    if !(white_threshold > 0.0 && white_threshold <= 1.0) {
        return Err(StatsError::BadThreshold {
            value: white_threshold,
        });
    }
    Ok(())
}

/// Classify nodes and compute mu_i, mu_0, and delta mu_i from a 2-color
/// aggregate. A node is classified non-white when its colored outcome count
/// reaches `white_threshold * n_realizations` (inclusive); the rest are
/// dominated by white outcomes and get no polarization value.
pub fn polarization_table(
    aggregate: &NodeAggregate,
    white_threshold: f64,
) -> Result<PolarizationTable, StatsError> {
    check_threshold(white_threshold)?;
    let n = aggregate.node_count();
    let cut = white_threshold * aggregate.n_realizations() as f64;
    let mut mu: Vec<Option<f64>> = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut classified_count = 0usize;
    for i in 0..n {
        let [_, n_r, n_b, n_g] = aggregate.counts(i);
        if n_g > 0 {
            return Err(StatsError::NotTwoColor);
        }
        let colored = n_r as u64 + n_b as u64;
        if colored as f64 >= cut {
            let m = (n_r as f64 - n_b as f64) / colored as f64;
            sum += m;
            classified_count += 1;
            mu.push(Some(m));
        } else {
            mu.push(None);
        }
    }
    if classified_count == 0 {
        return Err(StatsError::NoClassifiedNodes);
    }
    let mu0 = sum / classified_count as f64;
    let delta_mu = mu.iter().map(|m| m.map(|m| m - mu0)).collect();
    Ok(PolarizationTable {
        mu,
        delta_mu,
        mu0,
        classified_count,
    })
}

/// 3-color analogue of `PolarizationTable`; triples are in active-color
/// order red, blue, green.
#[derive(Clone, Debug)]
pub struct ColorPolarizationTable {
    /// eta_C(i) = n_C / (n_R + n_B + n_G) for classified nodes. The green
    /// entry is one minus the other two, so each triple sums to 1.0 exactly.
    pub eta: Vec<Option<[f64; 3]>>,
    /// delta eta_C(i) = eta_C(i) - eta_0C; the green entry is the negated
    /// sum of the other two, so each triple sums to 0.0 exactly.
    pub delta_eta: Vec<Option<[f64; 3]>>,
    /// Mean of eta_C over classified nodes, green again by remainder.
    pub eta0: [f64; 3],
    pub classified_count: usize,
}

impl ColorPolarizationTable {
    pub fn node_count(&self) -> usize {
        self.eta.len()
    }

    pub fn is_classified(&self, i: usize) -> bool {
        self.eta[i].is_some()
    }
}

/// Classify nodes and compute eta_C(i), eta_0C, delta eta_C(i) from a
/// 3-color aggregate. Classification cut as in `polarization_table` with
/// the full colored total in place of n_r + n_b.
pub fn color_polarization_table(
    aggregate: &NodeAggregate,
    white_threshold: f64,
) -> Result<ColorPolarizationTable, StatsError> {
    check_threshold(white_threshold)?;
    let n = aggregate.node_count();
    let cut = white_threshold * aggregate.n_realizations() as f64;
    let mut eta: Vec<Option<[f64; 3]>> = Vec::with_capacity(n);
    let mut sums = [0.0f64; 2];
    let mut classified_count = 0usize;
    for i in 0..n {
        let [_, n_r, n_b, n_g] = aggregate.counts(i);
        let colored = n_r as u64 + n_b as u64 + n_g as u64;
        if colored as f64 >= cut {
            let total = colored as f64;
            let e_r = n_r as f64 / total;
            let e_b = n_b as f64 / total;
            // Remainder instead of n_g/total: off by at most one rounding
            // step, and makes the unit-sum invariant exact.
            let e_g = 1.0 - (e_r + e_b);
            sums[0] += e_r;
            sums[1] += e_b;
            classified_count += 1;
            eta.push(Some([e_r, e_b, e_g]));
        } else {
            eta.push(None);
        }
    }
    if classified_count == 0 {
        return Err(StatsError::NoClassifiedNodes);
    }
    let k = classified_count as f64;
    let eta0 = {
        let r = sums[0] / k;
        let b = sums[1] / k;
        [r, b, 1.0 - (r + b)]
    };
    let delta_eta = eta
        .iter()
        .map(|e| {
            e.map(|[r, b, _]| {
                let d_r = r - eta0[0];
                let d_b = b - eta0[1];
                [d_r, d_b, -(d_r + d_b)]
            })
        })
        .collect();
    Ok(ColorPolarizationTable {
        eta,
        delta_eta,
        eta0,
        classified_count,
    })
}

/// Binned density estimate normalized so the densities integrate to 1 over
/// `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.bin_width()
    }

    pub fn integral(&self) -> f64 {
        let w = self.bin_width();
        self.density.iter().map(|d| d * w).sum()
    }

    /// Indices of local density maxima whose topographic prominence is at
    /// least `rel_prominence` times the tallest density. Prominence of a
    /// peak is its height minus the higher of the two valley floors
    /// separating it from taller terrain (or from the histogram edge), so
    /// shot-noise wiggles on a slope do not count as modes. Plateaus
    /// collapse to their middle bin.
    pub fn prominent_maxima(&self, rel_prominence: f64) -> Vec<usize> {
        let d = &self.density;
        let n = d.len();
        let max_d = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut peaks = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && d[j + 1] == d[i] {
                j += 1;
            }
            let rising = i == 0 || d[i - 1] < d[i];
            let falling = j == n - 1 || d[j + 1] < d[i];
            if rising && falling && d[i] > 0.0 {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        }
        peaks.retain(|&p| {
            let h = d[p];
            let mut bases: [Option<f64>; 2] = [None, None];
            let mut floor = f64::INFINITY;
            for k in (0..p).rev() {
                if d[k] > h {
                    break;
                }
                floor = floor.min(d[k]);
                bases[0] = Some(floor);
            }
            floor = f64::INFINITY;
            for k in p + 1..n {
                if d[k] > h {
                    break;
                }
                floor = floor.min(d[k]);
                bases[1] = Some(floor);
            }
            let prominence = match (bases[0], bases[1]) {
                (Some(a), Some(b)) => h - a.max(b),
                (Some(a), None) => h - a,
                (None, Some(b)) => h - b,
                (None, None) => h,
            };
            prominence >= rel_prominence * max_d
        });
        peaks
    }
}

/// Histogram of `values` over `[lo, hi]` with equal-width bins, half-open
/// on the right except the last, which also takes `hi` itself. Density is
/// count / (total * bin_width).
pub fn histogram1d(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram, StatsError> {
    if bins == 0 || !(lo < hi) {
        return Err(StatsError::BadBins { bins, lo, hi });
    }
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        counts[bin_index(v, lo, hi, bins)?] += 1;
    }
    let total = values.len() as u64;
    let width = (hi - lo) / bins as f64;
    let density = counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * width))
        .collect();
    Ok(Histogram {
        lo,
        hi,
        counts,
        density,
        total,
    })
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> Result<usize, StatsError> {
    if !v.is_finite() || v < lo || v > hi {
        return Err(if v.is_finite() {
            StatsError::OutOfRange { value: v, lo, hi }
        } else {
            StatsError::NonFinite
        });
    }
    let k = ((v - lo) / (hi - lo) * bins as f64) as usize;
    Ok(k.min(bins - 1))
}

/// 2D density over a rectangle, cell-area normalized; used for
/// (eta_C1, eta_C2) planes. Cells are indexed x-major: `ix * y_bins + iy`.
#[derive(Clone, Debug)]
pub struct Histogram2d {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub x_bins: usize,
    pub y_bins: usize,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub total: u64,
}

impl Histogram2d {
    pub fn cell_area(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.x_bins as f64 * ((self.y_hi - self.y_lo) / self.y_bins as f64)
    }

    pub fn x_center(&self, ix: usize) -> f64 {
        self.x_lo + (ix as f64 + 0.5) * (self.x_hi - self.x_lo) / self.x_bins as f64
    }

    pub fn y_center(&self, iy: usize) -> f64 {
        self.y_lo + (iy as f64 + 0.5) * (self.y_hi - self.y_lo) / self.y_bins as f64
    }

    pub fn density_at(&self, ix: usize, iy: usize) -> f64 {
        self.density[ix * self.y_bins + iy]
    }

    pub fn integral(&self) -> f64 {
        let a = self.cell_area();
        self.density.iter().map(|d| d * a).sum()
    }
}

/// 2D analogue of `histogram1d` over point pairs.
pub fn histogram2d(
    points: &[(f64, f64)],
    x_range: (f64, f64),
    y_range: (f64, f64),
    x_bins: usize,
    y_bins: usize,
) -> Result<Histogram2d, StatsError> {
    let (x_lo, x_hi) = x_range;
    let (y_lo, y_hi) = y_range;
    if x_bins == 0 || !(x_lo < x_hi) {
        return Err(StatsError::BadBins {
            bins: x_bins,
            lo: x_lo,
            hi: x_hi,
        });
    }
    if y_bins == 0 || !(y_lo < y_hi) {
        return Err(StatsError::BadBins {
            bins: y_bins,
            lo: y_lo,
            hi: y_hi,
        });
    }
    if points.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut counts = vec![0u64; x_bins * y_bins];
    for &(x, y) in points {
        let ix = bin_index(x, x_lo, x_hi, x_bins)?;
        let iy = bin_index(y, y_lo, y_hi, y_bins)?;
        counts[ix * y_bins + iy] += 1;
    }
    let total = points.len() as u64;
    let area = (x_hi - x_lo) / x_bins as f64 * ((y_hi - y_lo) / y_bins as f64);
    let density = counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * area))
        .collect();
    Ok(Histogram2d {
        x_lo,
        x_hi,
        y_lo,
        y_hi,
        x_bins,
        y_bins,
        counts,
        density,
        total,
    })
}

/// Statistical error of a mu_i averaged over `n_realizations` independent
/// outcomes: sqrt((1 - mu^2) / (N_r - 1)).
pub fn theoretical_error(mu: f64, n_realizations: usize) -> f64 {
    assert!(n_realizations >= 2, "error undefined below 2 realizations");
    ((1.0 - mu * mu).max(0.0) / (n_realizations - 1) as f64).sqrt()
}

/// Standard error of the mean of `samples`: sqrt(sum (v - mean)^2 / (n (n-1))),
/// algebraically equal to sqrt((<v^2> - <v>^2) / (n - 1)).
fn sample_error(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss.max(0.0) / (n * (n - 1.0))).sqrt()
}

/// Subdivision error estimates from equal disjoint batches of an ensemble.
#[derive(Clone, Debug)]
pub struct SubdivisionErrors {
    /// Per-node error of mu_i; `None` for unclassified nodes and for nodes
    /// with fewer than 2 batches of colored outcomes.
    pub mu_err: Vec<Option<f64>>,
    /// Per-node error of delta mu_i over the same batches.
    pub delta_mu_err: Vec<Option<f64>>,
    /// Error of mu_0 over per-batch mu_0 values.
    pub mu0_err: f64,
    /// The per-batch mu_0 values themselves.
    pub mu0_samples: Vec<f64>,
    pub samples: usize,
}

/// Check that an ensemble of `n_realizations` splits into `samples` equal
/// batches before asking for subdivision errors.
pub fn check_even_subdivision(n_realizations: usize, samples: usize) -> Result<(), StatsError> {
    if samples < 2 || samples > n_realizations || n_realizations % samples != 0 {
        return Err(StatsError::UnevenSubdivision {
            n_realizations,
            samples,
        });
    }
    Ok(())
}

/// Estimate per-node and global polarization errors by treating each batch
/// as an independent reduced ensemble: recompute mu_i, mu_0, delta mu_i
/// inside every batch and take the spread over batches. Classification
/// comes from the merged aggregate, so the same node set is tracked in
/// every batch; a classified node missing from some batch (no colored
/// outcome there) just contributes fewer samples.
pub fn subdivision_errors(
    batches: &[NodeAggregate],
    white_threshold: f64,
) -> Result<SubdivisionErrors, StatsError> {
    if batches.len() < 2 {
        return Err(StatsError::TooFewBatches {
            got: batches.len(),
        });
    }
    let mut merged = batches[0].clone();
    for b in &batches[1..] {
        merged.merge(b);
    }
    let table = polarization_table(&merged, white_threshold)?;
    let n = merged.node_count();

    // Per-batch mu_i for globally classified nodes, then per-batch mu_0.
    let mut batch_mu: Vec<Vec<Option<f64>>> = Vec::with_capacity(batches.len());
    let mut mu0_samples = Vec::with_capacity(batches.len());
    for batch in batches {
        assert_eq!(batch.node_count(), n, "batches disagree on node count");
        let mut mus: Vec<Option<f64>> = vec![None; n];
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            if !table.is_classified(i) {
                continue;
            }
            let [_, n_r, n_b, _] = batch.counts(i);
            let colored = n_r as u64 + n_b as u64;
            if colored > 0 {
                let m = (n_r as f64 - n_b as f64) / colored as f64;
                sum += m;
                count += 1;
                mus[i] = Some(m);
            }
        }
        if count > 0 {
            mu0_samples.push(sum / count as f64);
        }
        batch_mu.push(mus);
    }
    if mu0_samples.len() < 2 {
        return Err(StatsError::TooFewBatches {
            got: mu0_samples.len(),
        });
    }
    let mu0_err = sample_error(&mu0_samples);

    let mut mu_err: Vec<Option<f64>> = vec![None; n];
    let mut delta_mu_err: Vec<Option<f64>> = vec![None; n];
    let mut mu_s = Vec::with_capacity(batches.len());
    let mut delta_s = Vec::with_capacity(batches.len());
    for i in 0..n {
        if !table.is_classified(i) {
            continue;
        }
        mu_s.clear();
        delta_s.clear();
        let mut mu0_iter = mu0_samples.iter();
        for mus in &batch_mu {
            // Batches that classified nothing emitted no mu_0 sample and
            // have no mu_i either, so the pairing stays aligned.
            if mus.iter().all(|m| m.is_none()) {
                continue;
            }
            let mu0_s = *mu0_iter.next().expect("one mu_0 per non-empty batch");
            if let Some(m) = mus[i] {
                mu_s.push(m);
                delta_s.push(m - mu0_s);
            }
        }
        if mu_s.len() >= 2 {
            mu_err[i] = Some(sample_error(&mu_s));
            delta_mu_err[i] = Some(sample_error(&delta_s));
        }
    }
    Ok(SubdivisionErrors {
        mu_err,
        delta_mu_err,
        mu0_err,
        mu0_samples,
        samples: batches.len(),
    })
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort {
            need: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks; a run of equal values shares the average rank.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// One temperature point of a melting sweep.
#[derive(Clone, Debug)]
pub struct SwitchCurvePoint {
    pub temperature: f64,
    /// Mean over realizations of final-pass switches / node count.
    pub mean_final: f64,
    /// Standard error of that mean.
    pub std_error: f64,
    /// Mean switches / node count for every pass, the relaxation
    /// trajectory at this temperature.
    pub per_pass_mean: Vec<f64>,
}

/// Run one ensemble per temperature and report the normalized final-pass
/// switch rate, which stays near zero in the frozen phase and rises
/// sharply around the melting temperature. Point `k` uses master seed
/// `base.master_seed + k` so temperatures are statistically independent.
pub fn switch_curve(
    graph: &DirectedGraph,
    seeds: &SeedAssignment,
    base: &SimConfig,
    temperatures: &[f64],
) -> Result<Vec<SwitchCurvePoint>, StatsError> {
    if base.colors != ColorCount::Two {
        return Err(StatsError::NotTwoColor);
    }
    let n = graph.node_count() as f64;
    let options = EnsembleOptions {
        subdivision_samples: None,
        trace: false,
    };
    temperatures
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut config = base.clone();
            config.temperature = t;
            config.master_seed = base.master_seed.wrapping_add(k as u64);
            let result = run_ensemble_with(graph, seeds, &config, &options)?;
            let finals: Vec<f64> = result
                .realizations
                .iter()
                .map(|r| *r.switch_counts.last().expect("tau_max >= 1") as f64 / n)
                .collect();
            let mean_final = finals.iter().sum::<f64>() / finals.len() as f64;
            let std_error = if finals.len() >= 2 {
                sample_error(&finals)
            } else {
                0.0
            };
            let mut per_pass_mean = vec![0.0; config.tau_max];
            for r in &result.realizations {
                for (slot, &s) in per_pass_mean.iter_mut().zip(&r.switch_counts) {
                    *slot += s as f64;
                }
            }
            for slot in &mut per_pass_mean {
                *slot /= n * result.realizations.len() as f64;
            }
            Ok(SwitchCurvePoint {
                temperature: t,
                mean_final,
                std_error,
                per_pass_mean,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SeedAssignment;
    use crate::graph::VoteMode;
    use crate::netgen::{generate, GenSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fractions_count_seeds_and_skip_whites() {
        // Star with two leaves frozen at [R, B, R, R].
        let f = realization_fractions(&[0, 3, 1, 0], ColorCount::Two).unwrap();
        assert_eq!(f, vec![0.75, 0.25]);
        // Gadget outcome [R, B, R, W]: the white node drops out.
        let f = realization_fractions(&[1, 2, 1, 0], ColorCount::Two).unwrap();
        assert_eq!(f[0], 2.0 / 3.0);
        assert_eq!(f[0] + f[1], 1.0);
        assert_eq!(red_fraction(&[1, 2, 1, 0]), Some(2.0 / 3.0));
    }

    #[test]
    fn fractions_undefined_when_all_white() {
        assert_eq!(realization_fractions(&[7, 0, 0, 0], ColorCount::Two), None);
        assert_eq!(red_fraction(&[7, 0, 0, 0]), None);
    }

    #[test]
    fn three_color_fractions_sum_to_one_exactly() {
        let f = realization_fractions(&[0, 2, 1, 1], ColorCount::Three).unwrap();
        assert_eq!(f, vec![0.5, 0.25, 0.25]);
        let f = realization_fractions(&[5, 3, 2, 2], ColorCount::Three).unwrap();
        assert_eq!(f[0] + f[1] + f[2], 1.0);
    }

    #[test]
    fn polarization_formula_and_classification() {
        let agg = NodeAggregate::from_counts(
            vec![
                [0, 100_000, 0, 0],
                [0, 75_000, 25_000, 0],
                [100_000, 0, 0, 0],
            ],
            100_000,
        );
        let t = polarization_table(&agg, 0.5).unwrap();
        assert_eq!(t.mu[0], Some(1.0));
        assert_eq!(t.mu[1], Some(0.5));
        assert_eq!(t.mu[2], None);
        assert_eq!(t.classified_count, 2);
        assert_eq!(t.mu0, 0.75);
        assert_eq!(t.delta_mu[0], Some(0.25));
        assert_eq!(t.delta_mu[1], Some(-0.25));
    }

    #[test]
    fn classification_cut_is_inclusive() {
        let agg = NodeAggregate::from_counts(vec![[50, 25, 25, 0], [51, 25, 24, 0]], 100);
        let t = polarization_table(&agg, 0.5).unwrap();
        assert!(t.is_classified(0));
        assert!(!t.is_classified(1));
    }

    #[test]
    fn all_white_table_is_an_error() {
        let agg = NodeAggregate::from_counts(vec![[100, 0, 0, 0]], 100);
        assert!(matches!(
            polarization_table(&agg, 0.5),
            Err(StatsError::NoClassifiedNodes)
        ));
    }

    #[test]
    fn green_outcomes_reject_two_color_table() {
        let agg = NodeAggregate::from_counts(vec![[0, 50, 25, 25]], 100);
        assert!(matches!(
            polarization_table(&agg, 0.5),
            Err(StatsError::NotTwoColor)
        ));
    }

    #[test]
    fn delta_mu_means_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n_r = 1000u32;
        let counts: Vec<[u32; 4]> = (0..500)
            .map(|_| {
                let r = rng.random_range(0..=n_r);
                [0, r, n_r - r, 0]
            })
            .collect();
        let agg = NodeAggregate::from_counts(counts, n_r as usize);
        let t = polarization_table(&agg, 0.5).unwrap();
        let s: f64 = t.delta_mu.iter().flatten().sum();
        assert!(s.abs() < 1e-12 * t.classified_count as f64);
    }

    #[test]
    fn color_polarization_normalizes() {
        let agg = NodeAggregate::from_counts(vec![[0, 50_000, 30_000, 20_000]], 100_000);
        let t = color_polarization_table(&agg, 0.5).unwrap();
        let [r, b, g] = t.eta[0].unwrap();
        assert_eq!(r, 0.5);
        assert_eq!(b, 0.3);
        // Green comes from the remainder, one rounding step from 20000/100000.
        assert!((g - 0.2).abs() < 1e-15);
        assert_eq!(r + b + g, 1.0);
        assert_eq!(t.eta0[0], 0.5);
        assert_eq!(t.eta0[1], 0.3);
    }

    #[test]
    fn eta_triples_have_exact_unit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n_r = 997u32;
        let counts: Vec<[u32; 4]> = (0..400)
            .map(|_| {
                let r = rng.random_range(0..=n_r);
                let b = rng.random_range(0..=(n_r - r));
                [0, r, b, n_r - r - b]
            })
            .collect();
        let agg = NodeAggregate::from_counts(counts, n_r as usize);
        let t = color_polarization_table(&agg, 0.5).unwrap();
        for i in 0..t.node_count() {
            let [r, b, g] = t.eta[i].unwrap();
            assert_eq!(r + b + g, 1.0, "node {i}");
            let [dr, db, dg] = t.delta_eta[i].unwrap();
            assert_eq!(dr + db + dg, 0.0, "node {i}");
        }
        assert_eq!(t.eta0[0] + t.eta0[1] + t.eta0[2], 1.0);
    }

    #[test]
    fn histogram_density_normalization() {
        let h = histogram1d(&[0.0025], 0.0, 1.0, 200).unwrap();
        assert_eq!(h.density[0], 200.0);
        assert!(h.density[1..].iter().all(|&d| d == 0.0));
        assert!((h.integral() - 1.0).abs() < 1e-12);

        let vals: Vec<f64> = std::iter::repeat(0.25)
            .take(40)
            .chain(std::iter::repeat(0.75).take(40))
            .collect();
        let h = histogram1d(&vals, 0.0, 1.0, 2).unwrap();
        assert_eq!(h.density, vec![1.0, 1.0]);
    }

    #[test]
    fn histogram_boundary_and_errors() {
        let h = histogram1d(&[1.0, 0.0], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![1, 0, 0, 1]);
        assert!(matches!(
            histogram1d(&[], 0.0, 1.0, 4),
            Err(StatsError::Empty)
        ));
        assert!(matches!(
            histogram1d(&[1.5], 0.0, 1.0, 4),
            Err(StatsError::OutOfRange { .. })
        ));
        assert!(matches!(
            histogram1d(&[0.5], 1.0, 0.0, 4),
            Err(StatsError::BadBins { .. })
        ));
    }

    #[test]
    fn prominence_filters_noise_peaks() {
        let mut h = histogram1d(&[0.5], 0.0, 1.0, 9).unwrap();
        // Hand-shaped density: tall modes at both ends, a noise bump at 4.
        h.density = vec![5.0, 0.2, 0.1, 0.2, 0.45, 0.2, 0.1, 0.2, 4.8];
        assert_eq!(h.prominent_maxima(0.2), vec![0, 8]);
        let all = h.prominent_maxima(0.0);
        assert_eq!(all, vec![0, 4, 8]);
    }

    #[test]
    fn plateau_counts_as_one_peak() {
        let mut h = histogram1d(&[0.5], 0.0, 1.0, 5).unwrap();
        h.density = vec![0.5, 3.0, 3.0, 3.0, 0.5];
        assert_eq!(h.prominent_maxima(0.1), vec![2]);
    }

    #[test]
    fn histogram2d_normalizes_by_cell_area() {
        let pts = vec![(0.1, 0.1); 5];
        let h = histogram2d(&pts, (0.0, 1.0), (0.0, 1.0), 10, 10).unwrap();
        assert!((h.density_at(1, 1) - 100.0).abs() < 1e-9);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        // Two-color data embedded in the plane sits on the antidiagonal.
        let pts: Vec<(f64, f64)> = (0..=10).map(|k| {
            let x = k as f64 / 10.0;
            (x, 1.0 - x)
        })
        .collect();
        let h = histogram2d(&pts, (0.0, 1.0), (0.0, 1.0), 4, 4).unwrap();
        for ix in 0..4 {
            for iy in 0..4 {
                if h.density_at(ix, iy) > 0.0 {
                    assert!(ix + iy == 3 || ix + iy == 4, "cell ({ix}, {iy})");
                }
            }
        }
    }

    #[test]
    fn theoretical_error_formula() {
        assert!((theoretical_error(0.0, 100_000) - 0.00316).abs() < 5e-6);
        assert_eq!(theoretical_error(1.0, 100_000), 0.0);
        assert_eq!(theoretical_error(-1.0, 100_000), 0.0);
    }

    #[test]
    fn subdivision_matches_theory_on_independent_draws() {
        // 20 independent nodes, P(red) = 0.6, 100 batches of 500: both
        // estimators target the same sampling error, so they must agree.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let per_batch = 500usize;
        let batches: Vec<NodeAggregate> = (0..100)
            .map(|_| {
                let counts: Vec<[u32; 4]> = (0..20)
                    .map(|_| {
                        let r = (0..per_batch).filter(|_| rng.random::<f64>() < 0.6).count() as u32;
                        [0, r, per_batch as u32 - r, 0]
                    })
                    .collect();
                NodeAggregate::from_counts(counts, per_batch)
            })
            .collect();
        let sub = subdivision_errors(&batches, 0.5).unwrap();
        let mut merged = batches[0].clone();
        for b in &batches[1..] {
            merged.merge(b);
        }
        let table = polarization_table(&merged, 0.5).unwrap();
        for i in 0..20 {
            let th = theoretical_error(table.mu[i].unwrap(), merged.n_realizations());
            let sb = sub.mu_err[i].unwrap();
            assert!((sb - th).abs() / th < 0.2, "node {i}: {sb} vs {th}");
            // Independent nodes: delta mu error stays close to the mu error.
            let db = sub.delta_mu_err[i].unwrap();
            assert!((db - th).abs() / th < 0.25, "node {i}: {db} vs {th}");
        }
        assert!(sub.mu0_err > 0.0 && sub.mu0_err < sub.mu_err[0].unwrap());
    }

    #[test]
    fn subdivision_needs_batches() {
        let agg = NodeAggregate::from_counts(vec![[0, 1, 0, 0]], 1);
        assert!(matches!(
            subdivision_errors(&[agg], 0.5),
            Err(StatsError::TooFewBatches { .. })
        ));
        assert!(check_even_subdivision(1000, 100).is_ok());
        assert!(matches!(
            check_even_subdivision(1001, 100),
            Err(StatsError::UnevenSubdivision { .. })
        ));
    }

    #[test]
    fn spearman_frozen_values() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), -0.5);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 0.0, -5.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_average_ranks_on_ties() {
        // Ranks of x become [1.5, 1.5, 3]; correlation against [1, 2, 3]
        // works out to sqrt(3)/2.
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((rho - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_rejects_degenerate_input() {
        assert!(matches!(
            spearman(&[1.0, 1.0], &[1.0, 2.0]),
            Err(StatsError::ConstantInput)
        ));
        assert!(matches!(
            spearman(&[1.0], &[1.0]),
            Err(StatsError::TooShort { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn spearman_is_monotone_invariant() {
        let x = vec![0.3, 1.7, -2.0, 4.4, 0.9];
        let y = vec![5.0, 2.0, 7.0, 1.0, 3.0];
        let base = spearman(&x, &y).unwrap();
        let fx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let gy: Vec<f64> = y.iter().map(|v| v.powi(3) + 2.0).collect();
        assert_eq!(spearman(&fx, &gy).unwrap(), base);
    }

    #[test]
    fn frozen_star_has_no_final_switches() {
        let g = generate(&GenSpec::Star { leaves: 6 }, 0).unwrap();
        let seeds = SeedAssignment::two_color(vec![0], vec![1]);
        let mut cfg = SimConfig::two_color(VoteMode::Opa, 3);
        cfg.n_realizations = 50;
        let pts = switch_curve(&g, &seeds, &cfg, &[0.0]).unwrap();
        assert_eq!(pts[0].mean_final, 0.0);
        assert_eq!(pts[0].std_error, 0.0);
        // All the action is in pass 1: every leaf turns red once.
        assert_eq!(pts[0].per_pass_mean[0], 6.0 / 8.0);
        assert!(pts[0].per_pass_mean[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hot_limit_switch_rate() {
        // At beta = 0 every visited node with any colored in-neighbor
        // redraws 50/50, so roughly half the colored visits switch.
        let g = generate(&GenSpec::PaDirected { nodes: 300, m: 3 }, 4).unwrap();
        let seeds = SeedAssignment::two_color(vec![0], vec![1]);
        let mut cfg = SimConfig::two_color(VoteMode::Opa, 8);
        cfg.n_realizations = 60;
        let pts = switch_curve(&g, &seeds, &cfg, &[f64::INFINITY]).unwrap();
        assert!((pts[0].mean_final - 0.5).abs() < 0.05, "{}", pts[0].mean_final);
    }

    #[test]
    fn switch_curve_needs_two_colors() {
        let g = generate(&GenSpec::Gadget, 0).unwrap();
        let seeds = SeedAssignment::three_color(vec![0], vec![1], vec![2]);
        let cfg = SimConfig::three_color(VoteMode::Opa, 3);
        assert!(matches!(
            switch_curve(&g, &seeds, &cfg, &[0.0]),
            Err(StatsError::NotTwoColor)
        ));
    }
}
