//! Gibbsianness criteria for arc discretisations of the rotor model.
//!
//! Three layers of machinery live here:
//!
//! * closed-form fineness bounds on the Dobrushin row sum of the constrained
//!   system: `analytic_bound` (2dβ sin²(π/q)), its sphere generalisation,
//!   the per-cell energy-variation diameter `diam_bound`, and the older
//!   `legacy_bound` 4dπβe^β/q kept for comparison;
//! * the variational kernel behind the analytic bound: the functional
//!   Q(ρ) = ∬ ρ(dx) ρ(dy) |x − y| on measures over [−1, 1], whose maximum 1
//!   at ½(δ₁ + δ₋₁) is checked numerically by `maximize_q`;
//! * a quadrature estimate `cbar_estimate` of the constrained interdependence
//!   coefficient itself, obtained by scanning same-arc conditioning-angle
//!   pairs on a grid and integrating the arc-restricted single-site
//!   densities.
//!
//! Certification uses the strict inequality `row sum < 1`. Values within
//! `CERTIFY_GUARD` of the threshold count as *not* certified, so parameter
//! points that sit exactly on the boundary (for example 4 sin²(π/6) = 1) are
//! never certified through floating-point rounding.

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::partition::ArcPartition;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Margin under the Dobrushin threshold required for certification.
pub const CERTIFY_GUARD: f64 = 1e-12;

/// Strict-inequality certification with the boundary guard.
pub fn certified(bound: f64) -> bool {
    bound < 1.0 - CERTIFY_GUARD
}

fn check_d_beta(d: usize, beta: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    Ok(())
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
    }
    Ok(())
}

/// Fineness bound for a partition cell seen under half-angle `psi`:
/// 2 d β sin²(ψ). The circle partition into q arcs has ψ = π/q.
pub fn sphere_bound(d: usize, beta: f64, psi: f64) -> Result<f64> {
    check_d_beta(d, beta)?;
    if !(psi > 0.0 && psi <= PI) {
        return Err(Error::InvalidParameter(format!(
            "psi must lie in (0, pi], got {psi}"
        )));
    }
    Ok(2.0 * d as f64 * beta * psi.sin().powi(2))
}

/// Dobrushin row-sum bound 2 d β sin²(π/q) for the q-arc discretisation.
pub fn analytic_bound(d: usize, beta: f64, q: usize) -> Result<f64> {
    check_q(q)?;
    sphere_bound(d, beta, PI / q as f64)
}

/// The older high-field estimate 4 d π β e^β / q, kept to demonstrate how
/// much the sin² criterion improves on it.
pub fn legacy_bound(d: usize, beta: f64, q: usize) -> Result<f64> {
    check_d_beta(d, beta)?;
    check_q(q)?;
    Ok(4.0 * d as f64 * PI * beta * beta.exp() / q as f64)
}

/// Smallest q whose analytic bound is certified (strictly below 1).
pub fn minimal_q(d: usize, beta: f64) -> Result<usize> {
    check_d_beta(d, beta)?;
    if beta == 0.0 {
        return Err(Error::InvalidParameter(
            "minimal_q needs beta > 0 (every q works at beta = 0)".into(),
        ));
    }
    let mut q = 2;
    loop {
        if certified(analytic_bound(d, beta, q)?) {
            return Ok(q);
        }
        q += 1;
    }
}

/// Energy-variation diameter of one arc under the bond metric:
/// β (2 sin π/q)². Summing over the 2d neighbours and comparing against the
/// threshold 4 reproduces `analytic_bound < 1`.
pub fn diam_bound(beta: f64, q: usize) -> Result<f64> {
    check_d_beta(1, beta)?;
    check_q(q)?;
    Ok(beta * (2.0 * (PI / q as f64).sin()).powi(2))
}

/// One row of the criterion table.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub d: usize,
    pub beta: f64,
    pub q: usize,
    pub analytic_bound: f64,
    pub legacy_bound: f64,
    pub certified: bool,
    /// Quadrature estimate of the Dobrushin row sum, when computed.
    pub numeric_sum: Option<f64>,
}

impl CriterionReport {
    /// Report with the closed-form bounds only.
    pub fn analytic(d: usize, beta: f64, q: usize) -> Result<Self> {
        let bound = analytic_bound(d, beta, q)?;
        Ok(Self {
            d,
            beta,
            q,
            analytic_bound: bound,
            legacy_bound: legacy_bound(d, beta, q)?,
            certified: certified(bound),
            numeric_sum: None,
        })
    }

    pub const CSV_HEADER: &'static str =
        "d,beta,q,analytic_bound,legacy_bound,numeric_sum,certified";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.d,
            sig12(self.beta),
            self.q,
            sig12(self.analytic_bound),
            sig12(self.legacy_bound),
            self.numeric_sum.map(sig12).unwrap_or_default(),
            self.certified
        )
    }
}

/// A finitely supported probability measure on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Atoms are (location, weight) pairs: locations in [−1, 1], weights
    /// positive and summing to 1 within 1e-12.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("measure needs atoms".into()));
        }
        let mut total = 0.0;
        for &(x, w) in &atoms {
            if !(-1.0..=1.0).contains(&x) {
                return Err(Error::InvalidParameter(format!(
                    "atom location {x} outside [-1, 1]"
                )));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {w} must be positive"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// n equally weighted atoms on a uniform grid over [−1, 1].
    pub fn uniform_grid(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("grid needs n >= 2".into()));
        }
        let w = 1.0 / n as f64;
        Self::new(
            (0..n)
                .map(|i| (-1.0 + 2.0 * i as f64 / (n - 1) as f64, w))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Same weights with every location multiplied by `c` in (0, 1].
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must lie in (0, 1], got {c}"
            )));
        }
        Ok(Self {
            atoms: self.atoms.iter().map(|&(x, w)| (c * x, w)).collect(),
        })
    }
}

/// Q(ρ) = Σ_a Σ_b w_a w_b |x_a − x_b|. Bounded by 1 on [−1, 1], with
/// equality only for the balanced two-point measure at ±1.
pub fn q_functional(rho: &AtomicMeasure) -> f64 {
    let atoms = &rho.atoms;
    let mut sum = 0.0;
    for (i, &(xi, wi)) in atoms.iter().enumerate() {
        for &(xj, wj) in &atoms[i + 1..] {
            sum += wi * wj * (xi - xj).abs();
        }
    }
    2.0 * sum
}

/// Numerical maximisation of Q over measures with `n_atoms` atoms in
/// [−1, 1]: random restarts followed by exact coordinate ascent.
pub fn maximize_q(n_atoms: usize, restarts: usize, seed: u64) -> Result<(AtomicMeasure, f64)> {
    maximize_q_in(n_atoms, restarts, seed, -1.0, 1.0)
}

/// `maximize_q` with locations restricted to [lo, hi] ⊆ [−1, 1].
///
/// Q is convex piecewise-linear in each location, so a coordinate step moves
/// the atom to whichever interval endpoint scores higher; the weight step
/// solves the one-dimensional quadratic for the optimal mass transfer
/// between an atom pair. Restart r uses RNG stream r of the given seed, so
/// the result does not depend on scheduling.
pub fn maximize_q_in(
    n_atoms: usize,
    restarts: usize,
    seed: u64,
    lo: f64,
    hi: f64,
) -> Result<(AtomicMeasure, f64)> {
    if n_atoms < 2 {
        return Err(Error::InvalidParameter("need at least 2 atoms".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("need at least 1 restart".into()));
    }
    if !(lo < hi && lo >= -1.0 && hi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "domain [{lo}, {hi}] must be a nonempty subinterval of [-1, 1]"
        )));
    }

    let run_restart = |r: usize| -> (f64, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut xs: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(lo..=hi)).collect();
        let mut ws: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = ws.iter().sum();
        ws.iter_mut().for_each(|w| *w /= total);

        let eval = |xs: &[f64], ws: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..xs.len() {
                for j in (i + 1)..xs.len() {
                    s += ws[i] * ws[j] * (xs[i] - xs[j]).abs();
                }
            }
            2.0 * s
        };

        let mut best = eval(&xs, &ws);
        for _sweep in 0..200 {
            let before = best;
            // Locations: convex in each coordinate, so the max over [lo, hi]
            // sits at an endpoint.
            for i in 0..n_atoms {
                let g = |x: f64| -> f64 {
                    xs.iter()
                        .zip(&ws)
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, (&xj, &wj))| wj * (x - xj).abs())
                        .sum()
                };
                xs[i] = if g(hi) >= g(lo) { hi } else { lo };
            }
            // Weights: optimal pairwise transfer. Moving mass t from a to b
            // changes Q by 2t(g_b − g_a) − 2t²·d_ab.
            for a in 0..n_atoms {
                for b in (a + 1)..n_atoms {
                    let dab = (xs[a] - xs[b]).abs();
                    if dab == 0.0 {
                        continue;
                    }
                    let grad = |i: usize| -> f64 {
                        xs.iter()
                            .zip(&ws)
                            .map(|(&xj, &wj)| wj * (xs[i] - xj).abs())
                            .sum()
                    };
                    let t = ((grad(b) - grad(a)) / (2.0 * dab)).clamp(-ws[b], ws[a]);
                    if t != 0.0 {
                        ws[a] -= t;
                        ws[b] += t;
                    }
                }
            }
            best = eval(&xs, &ws);
            if best - before <= 1e-15 {
                break;
            }
        }
        (best, xs, ws)
    };

    #[cfg(feature = "parallel")]
    let results: Vec<(f64, Vec<f64>, Vec<f64>)> =
        (0..restarts).into_par_iter().map(run_restart).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..restarts).map(run_restart).collect();

    // First restart achieving the best value wins, independent of scheduling.
    let (value, xs, ws) = results
        .into_iter()
        .reduce(|acc, cur| if cur.0 > acc.0 { cur } else { acc })
        .expect("at least one restart");

    let atoms: Vec<(f64, f64)> = xs.into_iter().zip(ws).filter(|&(_, w)| w > 0.0).collect();
    Ok((AtomicMeasure::new(atoms)?, value))
}

/// Grid settings for the numeric Dobrushin estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CbarSettings {
    /// Conditioning angles scanned inside each conditioning arc.
    pub eta_grid: usize,
    /// Quadrature nodes per arc for the variational-distance integral.
    pub quad_points: usize,
}

impl Default for CbarSettings {
    fn default() -> Self {
        // 2048 nodes keep the midpoint-rule error from the kink of
        // |p_η − p_η̄| at the density crossing below 1e-6 for beta <= 1.
        Self {
            eta_grid: 64,
            quad_points: 2048,
        }
    }
}

impl CbarSettings {
    fn validate(&self) -> Result<()> {
        if self.eta_grid < 8 {
            return Err(Error::InvalidParameter(format!(
                "eta_grid must be >= 8, got {}",
                self.eta_grid
            )));
        }
        if self.quad_points < 16 {
            return Err(Error::InvalidParameter(format!(
                "quad_points must be >= 16, got {}",
                self.quad_points
            )));
        }
        Ok(())
    }
}

/// Arc-restricted single-site conditional densities, grouped by the arc the
/// conditioning spin lives in: `profiles[m][g]` is the density on the
/// integration arc when the neighbour sits at the g-th grid angle inside
/// conditioning arc m+1. Each profile is normalised over the midpoint
/// quadrature nodes of the integration arc, so the variational distance
/// between two conditionings is half the l1 distance of their profiles.
///
/// The conditioning pair must share an arc: the constrained system's spin at
/// the neighbouring site is pinned to one arc, so only same-image variations
/// enter its interdependence coefficient. Unconstrained pairs would
/// overshoot the analytic row-sum bound.
fn conditional_profiles(
    beta: f64,
    q: usize,
    arc_label: usize,
    settings: CbarSettings,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let partition = ArcPartition::new(q, 0.0)?;
    partition.check_label(arc_label)?;
    let width = partition.width();
    let start = partition.arc_start(arc_label)?;
    let n = settings.quad_points;
    let nodes: Vec<f64> = (0..n)
        .map(|j| start + width * (j as f64 + 0.5) / n as f64)
        .collect();

    (1..=q)
        .map(|cond_arc| {
            let cond_start = partition.arc_start(cond_arc)?;
            (0..settings.eta_grid)
                .map(|g| {
                    let eta = cond_start + width * (g as f64 + 0.5) / settings.eta_grid as f64;
                    let mut profile: Vec<f64> =
                        nodes.iter().map(|&x| beta * (x - eta).cos()).collect();
                    let max = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let mut sum = 0.0;
                    for u in profile.iter_mut() {
                        *u = (*u - max).exp();
                        sum += *u;
                    }
                    if !(sum.is_finite() && sum > 0.0) {
                        return Err(Error::NonFinite("cbar normalizer"));
                    }
                    profile.iter_mut().for_each(|p| *p /= sum);
                    Ok(profile)
                })
                .collect()
        })
        .collect()
}

fn pair_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn max_same_arc_distance(group: &[Vec<f64>], first: usize) -> f64 {
    let mut sup = 0.0f64;
    for j in (first + 1)..group.len() {
        sup = sup.max(pair_distance(&group[first], &group[j]));
    }
    sup
}

fn max_pair_distance_serial(profiles: &[Vec<Vec<f64>>]) -> f64 {
    let mut sup = 0.0f64;
    for group in profiles {
        for i in 0..group.len() {
            sup = sup.max(max_same_arc_distance(group, i));
        }
    }
    sup
}

/// Quadrature estimate of the constrained interdependence coefficient
/// between nearest neighbours: half the supremum, over pairs of conditioning
/// angles sharing an arc, of the variational distance between the
/// arc-restricted single-site conditionals. Approximates the true
/// coefficient from below (the grid misses the exact supremum).
pub fn cbar_estimate(beta: f64, q: usize, arc_label: usize, settings: CbarSettings) -> Result<f64> {
    check_d_beta(1, beta)?;
    settings.validate()?;
    let profiles = conditional_profiles(beta, q, arc_label, settings)?;

    #[cfg(feature = "parallel")]
    let sup = profiles
        .par_iter()
        .flat_map(|group| (0..group.len()).into_par_iter().map(move |i| (group, i)))
        .map(|(group, i)| max_same_arc_distance(group, i))
        .reduce(|| 0.0, f64::max);
    #[cfg(not(feature = "parallel"))]
    let sup = max_pair_distance_serial(&profiles);

    Ok(0.5 * sup)
}

/// Single-threaded `cbar_estimate`, kept callable for benchmarking against
/// the parallel path.
pub fn cbar_estimate_serial(
    beta: f64,
    q: usize,
    arc_label: usize,
    settings: CbarSettings,
) -> Result<f64> {
    check_d_beta(1, beta)?;
    settings.validate()?;
    let profiles = conditional_profiles(beta, q, arc_label, settings)?;
    Ok(0.5 * max_pair_distance_serial(&profiles))
}

/// Full criterion row with the numeric Dobrushin row sum. Translation and
/// rotation symmetry make all 2d nearest-neighbour coefficients equal, so
/// the row sum is 2d times the single estimate.
pub fn cbar_sum(d: usize, beta: f64, q: usize, settings: CbarSettings) -> Result<CriterionReport> {
    check_d_beta(d, beta)?;
    let mut report = CriterionReport::analytic(d, beta, q)?;
    report.numeric_sum = Some(2.0 * d as f64 * cbar_estimate(beta, q, 1, settings)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analytic_bound_examples() {
        assert_abs_diff_eq!(analytic_bound(2, 0.4, 4).unwrap(), 0.8, epsilon = 1e-14);
        assert!(certified(analytic_bound(2, 0.4, 4).unwrap()));
        assert_abs_diff_eq!(
            analytic_bound(2, 1.0, 16).unwrap(),
            0.1522409349774265,
            epsilon = 1e-14
        );
        for d in 1..=3 {
            for q in [2, 7, 64] {
                assert_eq!(analytic_bound(d, 0.0, q).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sphere_bound_matches_analytic_and_validates_psi() {
        let a = analytic_bound(2, 1.0, 16).unwrap();
        let s = sphere_bound(2, 1.0, PI / 16.0).unwrap();
        assert_eq!(a, s);
        assert_abs_diff_eq!(
            sphere_bound(3, 0.1, PI / 6.0).unwrap(),
            0.15,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            sphere_bound(1, 1.0, PI / 2.0).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert!(!certified(sphere_bound(1, 1.0, PI / 2.0).unwrap()));
        assert!(sphere_bound(1, 1.0, 0.0).is_err());
        assert!(sphere_bound(1, 1.0, 3.2).is_err());
    }

    #[test]
    fn legacy_bound_examples_and_dominance() {
        assert_abs_diff_eq!(
            legacy_bound(2, 1.0, 16).unwrap(),
            4.269867111336784,
            epsilon = 1e-12
        );
        assert_eq!(legacy_bound(3, 0.0, 8).unwrap(), 0.0);
        for d in 1..=3usize {
            for ib in 0..20 {
                let beta = 0.1 + ib as f64 * 0.1;
                for q in [4usize, 8, 16, 32, 64] {
                    let legacy = legacy_bound(d, beta, q).unwrap();
                    let analytic = analytic_bound(d, beta, q).unwrap();
                    assert!(
                        legacy / analytic > 1.0,
                        "legacy {legacy} <= analytic {analytic} at d={d} beta={beta} q={q}"
                    );
                }
            }
        }
    }

    #[test]
    fn minimal_q_examples() {
        // 4 sin²(π/6) is exactly 1: not strict, so q = 6 must not certify.
        assert_eq!(minimal_q(2, 1.0).unwrap(), 7);
        assert_eq!(minimal_q(2, 0.1).unwrap(), 2);
        assert_eq!(minimal_q(3, 10.0).unwrap(), 25);
        assert!(minimal_q(2, 0.0).is_err());
    }

    #[test]
    fn diam_bound_and_its_row_sum_identity() {
        assert_abs_diff_eq!(diam_bound(1.0, 4).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(diam_bound(0.0, 9).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = rng.random_range(1..=4usize);
            let beta = rng.random_range(0.0..3.0);
            let q = rng.random_range(2..=64usize);
            let via_diam = 2.0 * d as f64 * diam_bound(beta, q).unwrap() / 4.0;
            let direct = analytic_bound(d, beta, q).unwrap();
            assert_abs_diff_eq!(via_diam, direct, epsilon = 1e-14 * (1.0 + direct));
        }
    }

    #[test]
    fn analytic_bound_is_monotone() {
        for d in 1..=3usize {
            let mut prev_q = f64::INFINITY;
            for q in 3..=64usize {
                let b = analytic_bound(d, 1.3, q).unwrap();
                assert!(b < prev_q, "not decreasing in q at q={q}");
                prev_q = b;
            }
            let mut prev_b = -1.0;
            for ib in 1..=40 {
                let beta = ib as f64 * 0.05;
                let b = analytic_bound(d, beta, 8).unwrap();
                assert!(b > prev_b, "not increasing in beta at beta={beta}");
                prev_b = b;
            }
        }
    }

    #[test]
    fn q_functional_known_values() {
        let two_point = AtomicMeasure::new(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(q_functional(&two_point), 1.0);

        let single = AtomicMeasure::new(vec![(0.3, 1.0)]).unwrap();
        assert_eq!(q_functional(&single), 0.0);

        let grid = AtomicMeasure::uniform_grid(101).unwrap();
        assert_abs_diff_eq!(q_functional(&grid), 2.0 / 3.0, epsilon = 0.01);
    }

    #[test]
    fn q_functional_never_exceeds_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for _ in 0..20_000 {
            let n = rng.random_range(1..=8usize);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mut ws: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = ws.iter().sum();
            ws.iter_mut().for_each(|w| *w /= total);
            let rho = AtomicMeasure::new(xs.into_iter().zip(ws).collect()).unwrap();
            assert!(q_functional(&rho) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn q_functional_scales_exactly_under_power_of_two_contractions() {
        let rho = AtomicMeasure::new(vec![(-0.971, 0.25), (0.113, 0.4), (0.887, 0.35)]).unwrap();
        let base = q_functional(&rho);
        for c in [0.5, 0.25, 0.0625] {
            assert_eq!(q_functional(&rho.scaled(c).unwrap()), c * base);
        }
        // Generic scales agree to rounding.
        let c = 0.37;
        assert_abs_diff_eq!(
            q_functional(&rho.scaled(c).unwrap()),
            c * base,
            epsilon = 1e-14
        );
    }

    #[test]
    fn maximize_q_finds_the_balanced_endpoint_pair() {
        let (measure, value) = maximize_q(2, 16, 7).unwrap();
        assert!((1.0 - 1e-6..=1.0 + 1e-9).contains(&value), "value {value}");
        let mut atoms = measure.atoms().to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_abs_diff_eq!(atoms[0].0, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(atoms[1].0, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(atoms[0].1, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(atoms[1].1, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn maximize_q_never_beats_the_lemma_ceiling() {
        for n in [3usize, 5] {
            let (_, value) = maximize_q(n, 16, 123).unwrap();
            assert!(value <= 1.0 + 1e-9, "n={n} value={value}");
            assert!(value >= 1.0 - 1e-6, "n={n} value={value}");
        }
    }

    #[test]
    fn maximize_q_on_a_half_width_domain_scales_to_half() {
        let (_, value) = maximize_q_in(2, 16, 7, -0.5, 0.5).unwrap();
        assert_abs_diff_eq!(value, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn atomic_measure_validation() {
        assert!(AtomicMeasure::new(vec![(1.5, 1.0)]).is_err());
        assert!(AtomicMeasure::new(vec![(0.0, 0.6), (0.5, 0.6)]).is_err());
        assert!(AtomicMeasure::new(vec![(0.0, 0.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn cbar_is_zero_at_infinite_temperature() {
        let settings = CbarSettings {
            eta_grid: 16,
            quad_points: 64,
        };
        assert_eq!(cbar_estimate(0.0, 8, 1, settings).unwrap(), 0.0);
    }

    #[test]
    fn cbar_is_arc_label_independent() {
        let settings = CbarSettings {
            eta_grid: 32,
            quad_points: 256,
        };
        let l1 = cbar_estimate(0.5, 8, 1, settings).unwrap();
        let l3 = cbar_estimate(0.5, 8, 3, settings).unwrap();
        assert_abs_diff_eq!(l1, l3, epsilon = 1e-8);
    }

    #[test]
    fn cbar_row_sum_stays_under_the_analytic_bound() {
        let settings = CbarSettings {
            eta_grid: 32,
            quad_points: 512,
        };
        let c = cbar_estimate(0.5, 8, 1, settings).unwrap();
        for d in 1..=3usize {
            let analytic = analytic_bound(d, 0.5, 8).unwrap();
            assert!(
                2.0 * d as f64 * c <= analytic + 1e-3,
                "d={d}: {} > {analytic}",
                2.0 * d as f64 * c
            );
        }
    }

    #[test]
    fn cbar_quadrature_is_converged_at_the_default_resolution() {
        let coarse = cbar_estimate(1.0, 8, 1, CbarSettings::default()).unwrap();
        let fine = cbar_estimate(
            1.0,
            8,
            1,
            CbarSettings {
                eta_grid: 64,
                quad_points: 4096,
            },
        )
        .unwrap();
        assert!(
            (coarse - fine).abs() < 1e-6,
            "doubling quad points moved the estimate by {}",
            (coarse - fine).abs()
        );
    }

    #[test]
    fn cbar_serial_matches_parallel() {
        let settings = CbarSettings {
            eta_grid: 24,
            quad_points: 128,
        };
        assert_eq!(
            cbar_estimate(0.7, 8, 2, settings).unwrap(),
            cbar_estimate_serial(0.7, 8, 2, settings).unwrap()
        );
    }

    #[test]
    fn cbar_sum_fills_the_report() {
        let settings = CbarSettings {
            eta_grid: 16,
            quad_points: 64,
        };
        let report = cbar_sum(2, 0.0, 8, settings).unwrap();
        assert_eq!(report.numeric_sum, Some(0.0));
        assert!(report.certified);

        let report = cbar_sum(2, 3.0, 4, settings).unwrap();
        assert_abs_diff_eq!(report.analytic_bound, 6.0, epsilon = 1e-12);
        assert!(!report.certified);
    }

    #[test]
    fn csv_rows_are_stable() {
        let report = CriterionReport::analytic(2, 1.0, 16).unwrap();
        assert_eq!(
            report.csv_row(),
            "2,1.00000000000e0,16,1.52240934977e-1,4.26986711134e0,,true"
        );
        let mut with_numeric = report;
        with_numeric.numeric_sum = Some(0.1);
        assert!(with_numeric.csv_row().contains(",1.00000000000e-1,"));
    }
}
