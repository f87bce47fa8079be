//! Exact small-system oracles: exhaustive enumeration, transfer operators
//! for chains, constrained image conditionals, and the quasilocality probe.
//!
//! Two chain operators are provided. `chain_transfer_type2` works on the q
//! clock states directly. `chain_transfer_type1` discretises the XY chain on
//! a per-arc quadrature grid and reads label observables off grid blocks, an
//! exact-up-to-quadrature evaluation of the projected measure. Partition
//! conventions differ deliberately: clock sums use counting weights (log Z
//! is the log of a plain state sum), XY integrals use the normalised circle
//! measure dσ/2π per site.

mod enumerate;
pub mod quad;
mod transfer;

pub use enumerate::{enumerate_clock, enumerate_clock_serial, ENUMERATION_CAP};
pub use transfer::{angle_observables, label_observables, ArcRule, ChainKernel, NodeSet};

use crate::config::LabelConfig;
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::lattice::Boundary;
use crate::partition::ArcPartition;
use transfer::displacement_range;

/// Per-arc quadrature used by the type-1 operators. Gauss–Legendre nodes
/// converge geometrically for the analytic bond kernel, which keeps the
/// m-refinement drift of label observables far below 1e-6 already at small
/// m; composite midpoint stays available through `NodeSet::arc_grid`.
pub const DEFAULT_ARC_RULE: ArcRule = ArcRule::GaussLegendre;

/// Exact summary of a finite system.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub log_partition: f64,
    pub mean_energy: f64,
    /// (displacement along axis 0, ⟨σ_0 · σ_r⟩), displacement up to
    /// min(L−1 open, L/2 periodic, 8).
    pub correlations: Vec<(usize, f64)>,
}

impl ExactResult {
    pub const CSV_HEADER: &'static str = "quantity,value";

    /// Rows of a two-column CSV table.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = vec![
            format!("log_partition,{}", sig12(self.log_partition)),
            format!("mean_energy,{}", sig12(self.mean_energy)),
        ];
        for &(r, c) in &self.correlations {
            rows.push(format!("correlation_r{r},{}", sig12(c)));
        }
        rows
    }
}

/// Conditional distribution of the image label at one site.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub site: usize,
    pub distribution: Vec<f64>,
}

impl ConditionalTable {
    /// Total variation distance to another table of the same arity.
    pub fn total_variation(&self, other: &ConditionalTable) -> f64 {
        0.5 * self
            .distribution
            .iter()
            .zip(&other.distribution)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

fn check_chain_len(len: usize, boundary: Boundary) -> Result<()> {
    let min = match boundary {
        Boundary::Periodic => 2,
        Boundary::Open => 1,
    };
    if len < min {
        return Err(Error::InvalidParameter(format!(
            "chain length {len} too short for {} boundary",
            boundary.as_str()
        )));
    }
    Ok(())
}

fn chain_result(
    kernel: &ChainKernel,
    len: usize,
    boundary: Boundary,
    obs_cos: &[f64],
    obs_sin: &[f64],
) -> Result<ExactResult> {
    let (log_partition, mean_energy) = match boundary {
        Boundary::Open => (
            kernel.open_log_partition(len)?,
            kernel.open_mean_energy(len)?,
        ),
        Boundary::Periodic => (
            kernel.periodic_log_partition(len)?,
            kernel.periodic_mean_energy(len)?,
        ),
    };
    let mut correlations = Vec::new();
    for r in displacement_range(len, boundary) {
        let c = match boundary {
            Boundary::Open => kernel.open_correlation(len, r, obs_cos, obs_sin)?,
            Boundary::Periodic => kernel.periodic_correlation(len, r, obs_cos, obs_sin)?,
        };
        correlations.push((r, c));
    }
    Ok(ExactResult {
        log_partition,
        mean_energy,
        correlations,
    })
}

/// Exact clock chain via the q×q transfer matrix. Agrees with
/// `enumerate_clock` wherever both apply.
pub fn chain_transfer_type2(
    len: usize,
    q: usize,
    beta: f64,
    boundary: Boundary,
) -> Result<ExactResult> {
    check_chain_len(len, boundary)?;
    let kernel = ChainKernel::new(NodeSet::clock(q)?, beta)?;
    let (obs_cos, obs_sin) = angle_observables(&kernel.nodes);
    chain_result(&kernel, len, boundary, &obs_cos, &obs_sin)
}

/// Projected XY chain on a per-arc quadrature grid: correlations are those
/// of the labels embedded at the clock angles, i.e. observables of the
/// image measure. `mean_energy` is the energy of the underlying XY chain.
pub fn chain_transfer_type1(
    len: usize,
    partition: &ArcPartition,
    beta: f64,
    m_per_arc: usize,
    boundary: Boundary,
) -> Result<ExactResult> {
    check_chain_len(len, boundary)?;
    if m_per_arc < 1 {
        return Err(Error::InvalidParameter("m_per_arc must be >= 1".into()));
    }
    let nodes = NodeSet::arc_grid(partition, m_per_arc, DEFAULT_ARC_RULE)?;
    let kernel = ChainKernel::new(nodes, beta)?;
    let (obs_cos, obs_sin) = label_observables(&kernel.nodes);
    chain_result(&kernel, len, boundary, &obs_cos, &obs_sin)
}

/// Marginal label distribution at one site of the projected open XY chain.
pub fn type1_label_marginal(
    len: usize,
    partition: &ArcPartition,
    beta: f64,
    m_per_arc: usize,
    site: usize,
) -> Result<Vec<f64>> {
    if site >= len {
        return Err(Error::SiteOutOfRange { site, n_sites: len });
    }
    let nodes = NodeSet::arc_grid(partition, m_per_arc, DEFAULT_ARC_RULE)?;
    let kernel = ChainKernel::new(nodes, beta)?;
    let q = partition.q();
    let mut marginal = Vec::with_capacity(q);
    for label in 1..=q {
        let indicator: Vec<f64> = kernel
            .nodes
            .label_of
            .iter()
            .map(|&l| if l == label { 1.0 } else { 0.0 })
            .collect();
        marginal.push(kernel.open_site_expectation(len, site, &indicator)?);
    }
    Ok(marginal)
}

/// Exact (up to quadrature) conditional distribution of the image label at
/// `site` on the open chain, given the image labels everywhere else.
pub fn image_conditional(
    len: usize,
    partition: &ArcPartition,
    beta: f64,
    m_per_arc: usize,
    labels: &LabelConfig,
    site: usize,
) -> Result<ConditionalTable> {
    if labels.len() != len {
        return Err(Error::ConfigSizeMismatch {
            context: "image_conditional",
            got: labels.len(),
            expected: len,
        });
    }
    if labels.q() != partition.q() {
        return Err(Error::InvalidParameter(format!(
            "labels have q = {}, partition has q = {}",
            labels.q(),
            partition.q()
        )));
    }
    if len < 3 || site == 0 || site >= len - 1 {
        return Err(Error::InvalidParameter(format!(
            "site {site} is not interior to a chain of length {len}"
        )));
    }
    let nodes = NodeSet::arc_grid(partition, m_per_arc, DEFAULT_ARC_RULE)?;
    let kernel = ChainKernel::new(nodes, beta)?;
    let masks: Vec<Option<usize>> = (0..len)
        .map(|t| if t == site { None } else { Some(labels.get(t)) })
        .collect();
    let distribution = kernel.constrained_conditional(&masks, site)?;
    Ok(ConditionalTable { site, distribution })
}

/// Middle-site sensitivity to a distant label flip.
///
/// For each distance, the label at `middle + distance` is replaced by its
/// antipode (label + q/2) and the total variation between the two
/// middle-site conditionals is reported. Needs even q.
///
/// This is a numerically exact one-dimensional probe: a chain cannot have a
/// genuine discontinuity, so a slow decay here is a stiffness signature of
/// the conditioned model, not a proof of one.
pub fn quasilocality_scan(
    len: usize,
    partition: &ArcPartition,
    beta: f64,
    m_per_arc: usize,
    base_labels: &LabelConfig,
    distances: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let q = partition.q();
    if !q.is_multiple_of(2) {
        return Err(Error::OddArcCount { q });
    }
    let middle = (len - 1) / 2;
    let base = image_conditional(len, partition, beta, m_per_arc, base_labels, middle)?;
    let mut out = Vec::with_capacity(distances.len());
    for &dist in distances {
        if dist == 0 || middle + dist >= len {
            return Err(Error::DisplacementTooLarge {
                r: dist,
                max: len - 1 - middle,
            });
        }
        let flip_site = middle + dist;
        let mut flipped = base_labels.clone();
        let old = flipped.get(flip_site);
        flipped.set(flip_site, (old - 1 + q / 2) % q + 1)?;
        let table = image_conditional(len, partition, beta, m_per_arc, &flipped, middle)?;
        out.push((dist, base.total_variation(&table)));
    }
    Ok(out)
}

/// Nearest-neighbour label-embedded correlation of both discretisation
/// routes on the open chain, and their absolute difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactComparison {
    pub q: usize,
    pub type1_nn: f64,
    pub type2_nn: f64,
    pub difference: f64,
}

impl ExactComparison {
    pub const CSV_HEADER: &'static str = "q,type1_nn,type2_nn,difference";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.q,
            sig12(self.type1_nn),
            sig12(self.type2_nn),
            sig12(self.difference)
        )
    }
}

/// Compare the projected XY chain against the clock chain, both with the
/// clock-aligned partition so the only discrepancy is the discretisation
/// route itself.
pub fn compare_exact(len: usize, q: usize, beta: f64, m_per_arc: usize) -> Result<ExactComparison> {
    let partition = ArcPartition::clock_aligned(q)?;
    let type1 = chain_transfer_type1(len, &partition, beta, m_per_arc, Boundary::Open)?;
    let type2 = chain_transfer_type2(len, q, beta, Boundary::Open)?;
    let t1 = type1
        .correlations
        .first()
        .ok_or(Error::InvalidParameter("chain too short for r = 1".into()))?
        .1;
    let t2 = type2
        .correlations
        .first()
        .expect("same displacement range")
        .1;
    Ok(ExactComparison {
        q,
        type1_nn: t1,
        type2_nn: t2,
        difference: (t1 - t2).abs(),
    })
}

/// Continuum XY nearest-neighbour correlation of the open chain: the ratio
/// of the first two Fourier coefficients of the bond weight, evaluated by
/// periodic quadrature. The q → ∞ limit of both discretisations.
pub fn xy_chain_nn_correlation(beta: f64) -> f64 {
    // Uniform-grid quadrature converges geometrically for these entire
    // integrands; 512 points is far past convergence for beta <= ~100.
    let n = 512;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let w = (beta * (theta.cos() - 1.0)).exp();
        num += theta.cos() * w;
        den += w;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, LatticeSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn transfer_type2_matches_enumeration() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let lat = Lattice::build(LatticeSpec::new(1, 4, boundary)).unwrap();
            let direct = enumerate_clock(&lat, 4, 0.7).unwrap();
            let transfer = chain_transfer_type2(4, 4, 0.7, boundary).unwrap();
            assert_abs_diff_eq!(
                direct.log_partition,
                transfer.log_partition,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(direct.mean_energy, transfer.mean_energy, epsilon = 1e-10);
            assert_eq!(direct.correlations.len(), transfer.correlations.len());
            for (&(r1, c1), &(r2, c2)) in direct.correlations.iter().zip(&transfer.correlations) {
                assert_eq!(r1, r2);
                assert_abs_diff_eq!(c1, c2, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn type2_ising_chain_correlation_is_tanh_beta() {
        let result = chain_transfer_type2(8, 2, 0.9, Boundary::Open).unwrap();
        assert_abs_diff_eq!(result.correlations[0].1, 0.9f64.tanh(), epsilon = 1e-12);
    }

    #[test]
    fn beta_zero_correlations_vanish() {
        let t2 = chain_transfer_type2(6, 8, 0.0, Boundary::Open).unwrap();
        for &(_, c) in &t2.correlations {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-13);
        }
        let p = ArcPartition::clock_aligned(8).unwrap();
        let t1 = chain_transfer_type1(6, &p, 0.0, 16, Boundary::Open).unwrap();
        for &(_, c) in &t1.correlations {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn type1_marginals_are_uniform_at_beta_zero() {
        let p = ArcPartition::clock_aligned(8).unwrap();
        let marginal = type1_label_marginal(5, &p, 0.0, 16, 2).unwrap();
        for &m in &marginal {
            assert_abs_diff_eq!(m, 1.0 / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn type1_refinement_converges_fast() {
        // Successive m-doublings move the nn label correlation by far less
        // than the 1e-6 budget.
        let p = ArcPartition::clock_aligned(8).unwrap();
        let values: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&m| {
                chain_transfer_type1(8, &p, 1.0, m, Boundary::Open)
                    .unwrap()
                    .correlations[0]
                    .1
            })
            .collect();
        assert!(
            (values[1] - values[0]).abs() < 1e-6,
            "16 -> 32 moved {}",
            (values[1] - values[0]).abs()
        );
        assert!(
            (values[2] - values[1]).abs() < 1e-6,
            "32 -> 64 moved {}",
            (values[2] - values[1]).abs()
        );
    }

    #[test]
    fn type1_approaches_the_continuum_value_as_q_grows() {
        let target = xy_chain_nn_correlation(1.0);
        // Bessel-ratio reference value.
        assert_abs_diff_eq!(target, 0.4463899658965345, epsilon = 1e-10);
        let mut prev_gap = f64::INFINITY;
        for q in [8usize, 16, 32, 64] {
            let p = ArcPartition::clock_aligned(q).unwrap();
            let corr = chain_transfer_type1(8, &p, 1.0, 16, Boundary::Open)
                .unwrap()
                .correlations[0]
                .1;
            let gap = (corr - target).abs();
            assert!(gap < prev_gap, "gap not shrinking at q={q}");
            prev_gap = gap;
        }
        assert!(prev_gap < 2e-3);
    }

    #[test]
    fn image_conditional_is_uniform_at_beta_zero() {
        let p = ArcPartition::north_centered(8).unwrap();
        let labels = LabelConfig::constant(9, 1, 8).unwrap();
        let table = image_conditional(9, &p, 0.0, 16, &labels, 4).unwrap();
        for &pl in &table.distribution {
            assert_abs_diff_eq!(pl, 1.0 / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn image_conditional_peaks_symmetrically_on_a_constant_constraint() {
        let p = ArcPartition::clock_aligned(8).unwrap();
        let labels = LabelConfig::constant(9, 3, 8).unwrap();
        let table = image_conditional(9, &p, 1.0, 24, &labels, 4).unwrap();
        let dist = &table.distribution;
        let mode = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
            + 1;
        assert_eq!(mode, 3);
        // Reflection symmetry around the given label.
        for offset in 1..=3usize {
            let up = dist[(3 - 1 + offset) % 8];
            let down = dist[(3 - 1 + 8 - offset) % 8];
            assert_abs_diff_eq!(up, down, epsilon = 1e-8);
        }
    }

    #[test]
    fn image_conditional_shifts_with_cyclic_relabeling() {
        let p = ArcPartition::clock_aligned(8).unwrap();
        let labels = LabelConfig::new(vec![1, 3, 2, 5, 8, 2, 1, 4, 6], 8).unwrap();
        let base = image_conditional(9, &p, 0.7, 16, &labels, 4).unwrap();
        let shifted = image_conditional(9, &p, 0.7, 16, &labels.shifted(1), 4).unwrap();
        for l in 0..8 {
            assert_abs_diff_eq!(
                base.distribution[l],
                shifted.distribution[(l + 1) % 8],
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn image_conditional_rejects_edge_sites() {
        let p = ArcPartition::clock_aligned(4).unwrap();
        let labels = LabelConfig::constant(5, 1, 4).unwrap();
        assert!(image_conditional(5, &p, 1.0, 8, &labels, 0).is_err());
        assert!(image_conditional(5, &p, 1.0, 8, &labels, 4).is_err());
    }

    #[test]
    fn quasilocality_decays_in_the_certified_regime() {
        let p = ArcPartition::north_centered(8).unwrap();
        let lat_len = 13;
        let labels = alternating_chain(lat_len, 8);
        let scan = quasilocality_scan(lat_len, &p, 0.3, 24, &labels, &[1, 2, 3, 4, 5]).unwrap();
        for w in scan.windows(2) {
            assert!(
                w[1].1 < w[0].1,
                "variation not strictly decreasing: {scan:?}"
            );
        }
        assert!(scan.last().unwrap().1 < 1e-3, "terminal value {scan:?}");
    }

    fn alternating_chain(len: usize, q: usize) -> LabelConfig {
        LabelConfig::new(
            (0..len)
                .map(|t| if t % 2 == 0 { 1 } else { q / 2 + 1 })
                .collect(),
            q,
        )
        .unwrap()
    }

    #[test]
    fn stiff_constraint_blocks_the_decay() {
        let p = ArcPartition::north_centered(8).unwrap();
        let labels = alternating_chain(13, 8);
        let soft = quasilocality_scan(13, &p, 0.3, 24, &labels, &[5]).unwrap()[0].1;
        let stiff = quasilocality_scan(13, &p, 64.0, 24, &labels, &[5]).unwrap()[0].1;
        assert!(stiff >= 10.0 * soft, "stiff {stiff} not >= 10x soft {soft}");
    }

    #[test]
    fn compare_exact_difference_shrinks_with_q() {
        let mut prev = f64::INFINITY;
        for q in [8usize, 16, 32] {
            let cmp = compare_exact(8, q, 1.0, 16).unwrap();
            assert!(
                cmp.difference < prev,
                "difference not decreasing at q={q}: {cmp:?}"
            );
            prev = cmp.difference;
        }
    }

    #[test]
    fn compare_exact_is_exact_at_beta_zero() {
        let cmp = compare_exact(8, 8, 0.0, 16).unwrap();
        assert_abs_diff_eq!(cmp.difference, 0.0, epsilon = 1e-13);
    }
}
