//! Markov chain Monte Carlo for the XY model, the clock model, and the
//! arc-constrained XY model, plus the observables used to compare the two
//! discretisation routes and to exhibit the constrained bistability.
//!
//! Chains own their RNG (a seeded ChaCha stream), so a given seed and
//! parameter set reproduces the trajectory bit for bit. Replicas with
//! distinct seeds are independent and may run concurrently.

mod series;

pub use series::{ks_distance, ObservableSeries};

use crate::bounds;
use crate::config::{discretise, embed, AngleConfig, LabelConfig};
use crate::energy::{local_field, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice};
use crate::partition::{clock_angle, ArcPartition};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Continuous-spin chain state.
#[derive(Debug, Clone)]
pub struct XyState {
    pub config: AngleConfig,
    pub sweep_count: u64,
    pub seed: u64,
    pub accepted: u64,
    pub proposed: u64,
    rng: ChaCha8Rng,
}

impl XyState {
    pub fn new(config: AngleConfig, seed: u64) -> Self {
        Self {
            config,
            sweep_count: 0,
            seed,
            accepted: 0,
            proposed: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Same seed, dedicated ChaCha stream: independent replica.
    pub fn with_stream(config: AngleConfig, seed: u64, stream: u64) -> Self {
        let mut state = Self::new(config, seed);
        state.rng.set_stream(stream);
        state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.proposed as f64
    }
}

/// Discrete-spin chain state.
#[derive(Debug, Clone)]
pub struct ClockState {
    pub config: LabelConfig,
    pub sweep_count: u64,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl ClockState {
    pub fn new(config: LabelConfig, seed: u64) -> Self {
        Self {
            config,
            sweep_count: 0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_stream(config: LabelConfig, seed: u64, stream: u64) -> Self {
        let mut state = Self::new(config, seed);
        state.rng.set_stream(stream);
        state
    }
}

fn check_width(proposal_width: f64) -> Result<()> {
    if !(proposal_width > 0.0 && proposal_width <= PI) {
        return Err(Error::InvalidParameter(format!(
            "proposal width must lie in (0, pi], got {proposal_width}"
        )));
    }
    Ok(())
}

/// One full lattice sweep of single-site Metropolis updates
/// θ → θ + U(−w, w). ΔH comes from the local field, so detailed balance
/// holds for the finite-volume Gibbs measure.
pub fn metropolis_sweep_xy(
    state: &mut XyState,
    lattice: &Lattice,
    params: &ModelParams,
    proposal_width: f64,
) -> Result<()> {
    check_width(proposal_width)?;
    for site in 0..lattice.n_sites() {
        let theta = state.config.get(site);
        let proposal = theta + state.rng.random_range(-proposal_width..proposal_width);
        let (fx, fy) = local_field(lattice, &state.config, site)?;
        let delta_h = -params.beta
            * ((proposal.cos() - theta.cos()) * fx + (proposal.sin() - theta.sin()) * fy);
        state.proposed += 1;
        let accept = delta_h <= 0.0 || state.rng.random::<f64>() < (-delta_h).exp();
        if accept {
            state.config.set(site, proposal);
            state.accepted += 1;
        }
    }
    state.sweep_count += 1;
    Ok(())
}

/// One full sweep of exact single-site conditional resampling of the clock
/// model: each site draws its label from ∝ exp(β Σ_neighbours cos Δ).
pub fn heatbath_sweep_clock(
    state: &mut ClockState,
    lattice: &Lattice,
    params: &ModelParams,
) -> Result<()> {
    let q = state.config.q();
    if q != params.q {
        return Err(Error::InvalidParameter(format!(
            "state has q = {q}, params have q = {}",
            params.q
        )));
    }
    let cos_by_diff: Vec<f64> = (0..q).map(|k| clock_angle(k + 1, q).cos()).collect();
    let mut weights = vec![0.0f64; q];
    for site in 0..lattice.n_sites() {
        let mut max_field = f64::NEG_INFINITY;
        for k in 0..q {
            let mut field = 0.0;
            for &j in lattice.neighbors(site) {
                field += cos_by_diff[(k + q - (state.config.get(j) - 1)) % q];
            }
            weights[k] = params.beta * field;
            max_field = max_field.max(weights[k]);
        }
        let mut total = 0.0;
        for w in weights.iter_mut() {
            *w = (*w - max_field).exp();
            total += *w;
        }
        let mut u = state.rng.random::<f64>() * total;
        let mut chosen = q - 1;
        for (k, &w) in weights.iter().enumerate() {
            if u < w {
                chosen = k;
                break;
            }
            u -= w;
        }
        state.config.set(site, chosen + 1)?;
    }
    state.sweep_count += 1;
    Ok(())
}

/// Verify every angle sits inside its assigned arc.
pub fn check_constraint(
    config: &AngleConfig,
    partition: &ArcPartition,
    assigned: &LabelConfig,
) -> Result<()> {
    for site in 0..config.len() {
        if partition.arc_of(config.get(site)) != assigned.get(site) {
            return Err(Error::ConstraintViolated { site });
        }
    }
    Ok(())
}

/// Metropolis sweep of the XY model conditioned on its discretisation
/// image: proposals that would leave a site's assigned arc are rejected, so
/// the invariant measure is the Gibbs measure constrained to the arc
/// assignment. The incoming state is checked against the constraint.
pub fn constrained_sweep_xy(
    state: &mut XyState,
    lattice: &Lattice,
    params: &ModelParams,
    partition: &ArcPartition,
    assigned: &LabelConfig,
    proposal_width: f64,
) -> Result<()> {
    check_width(proposal_width)?;
    if assigned.len() != lattice.n_sites() {
        return Err(Error::ConfigSizeMismatch {
            context: "constrained_sweep_xy",
            got: assigned.len(),
            expected: lattice.n_sites(),
        });
    }
    check_constraint(&state.config, partition, assigned)?;
    for site in 0..lattice.n_sites() {
        let theta = state.config.get(site);
        let proposal = theta + state.rng.random_range(-proposal_width..proposal_width);
        state.proposed += 1;
        if partition.arc_of(proposal) != assigned.get(site) {
            continue;
        }
        let (fx, fy) = local_field(lattice, &state.config, site)?;
        let delta_h = -params.beta
            * ((proposal.cos() - theta.cos()) * fx + (proposal.sin() - theta.sin()) * fy);
        let accept = delta_h <= 0.0 || state.rng.random::<f64>() < (-delta_h).exp();
        if accept {
            state.config.set(site, proposal);
            state.accepted += 1;
        }
    }
    state.sweep_count += 1;
    Ok(())
}

/// East–west order parameter of a constrained configuration: the normalised
/// signed deviation from the arc midpoints, oriented so that a deviation
/// toward East (positive x) counts positive on every site. Sites whose arc
/// midpoint lies on the East–West axis have no transverse direction and
/// contribute zero.
pub fn east_west_order(
    config: &AngleConfig,
    partition: &ArcPartition,
    assigned: &LabelConfig,
) -> Result<f64> {
    if config.len() != assigned.len() {
        return Err(Error::ConfigSizeMismatch {
            context: "east_west_order",
            got: config.len(),
            expected: assigned.len(),
        });
    }
    let half_width = PI / partition.q() as f64;
    let mut total = 0.0;
    for site in 0..config.len() {
        let label = assigned.get(site);
        let mid = partition.midpoint(label)?;
        let orientation = -mid.sin().signum();
        if mid.sin().abs() < 1e-9 {
            continue;
        }
        let deviation = partition.deviation(label, config.get(site))?;
        total += orientation * deviation / half_width;
    }
    Ok(total / config.len() as f64)
}

/// Instantaneous two-point estimate ⟨σ_i · σ_{i+r}⟩ along axis 0, averaged
/// over all valid translations.
pub fn embedded_correlation(lattice: &Lattice, config: &AngleConfig, r: usize) -> Result<f64> {
    let side = lattice.spec().side;
    if lattice.spec().boundary == Boundary::Periodic && r > side / 2 {
        return Err(Error::DisplacementTooLarge { r, max: side / 2 });
    }
    if r == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..lattice.n_sites() {
        if let Some(j) = lattice.displaced(i, 0, r) {
            total += (config.get(i) - config.get(j)).cos();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DisplacementTooLarge {
            r,
            max: side.saturating_sub(1),
        });
    }
    Ok(total / count as f64)
}

/// Label version of `embedded_correlation`: labels are first embedded at
/// the clock angles.
pub fn label_correlation(lattice: &Lattice, labels: &LabelConfig, r: usize) -> Result<f64> {
    embedded_correlation(lattice, &embed(labels), r)
}

/// Two-point correlation series over a stream of (burnt-in) configuration
/// samples: one translation-averaged estimate per sample, reduced to batch
/// means.
pub fn two_point_correlation<'a>(
    lattice: &Lattice,
    samples: impl IntoIterator<Item = &'a AngleConfig>,
    r: usize,
) -> Result<ObservableSeries> {
    let values = samples
        .into_iter()
        .map(|config| embedded_correlation(lattice, config, r))
        .collect::<Result<Vec<f64>>>()?;
    ObservableSeries::from_values(format!("correlation_r{r}"), values, 32)
}

/// Mean bond alignment ⟨cos Δ⟩ over the bond multiset.
pub fn bond_alignment(lattice: &Lattice, config: &AngleConfig) -> f64 {
    if lattice.bonds().is_empty() {
        return 0.0;
    }
    let sum: f64 = lattice
        .bonds()
        .iter()
        .map(|&(a, b)| (config.get(a) - config.get(b)).cos())
        .sum();
    sum / lattice.bonds().len() as f64
}

/// Burn in a continuous chain while tuning the proposal width toward 50%
/// acceptance, then freeze it. Returns the frozen width.
pub fn burn_in_xy(
    state: &mut XyState,
    lattice: &Lattice,
    params: &ModelParams,
    sweeps: usize,
) -> Result<f64> {
    let mut width = PI / 2.0;
    let window = 50;
    let mut window_start = (state.accepted, state.proposed);
    for sweep in 0..sweeps {
        metropolis_sweep_xy(state, lattice, params, width)?;
        if (sweep + 1) % window == 0 {
            let accepted = state.accepted - window_start.0;
            let proposed = state.proposed - window_start.1;
            let rate = accepted as f64 / proposed.max(1) as f64;
            if rate > 0.55 {
                width = (width * 1.2).min(PI);
            } else if rate < 0.45 {
                width = (width / 1.2).max(1e-3);
            }
            window_start = (state.accepted, state.proposed);
        }
    }
    Ok(width)
}

/// Paired estimates of the same discrete observable from the two
/// discretisation routes.
#[derive(Debug, Clone)]
pub struct RouteComparison {
    /// Projected XY chain: samples pushed through the partition map.
    pub route1: ObservableSeries,
    /// Clock chain sampled directly.
    pub route2: ObservableSeries,
    pub difference: f64,
    pub combined_se: f64,
    /// Whether the analytic fineness bound certifies this (d, β, q).
    pub certified: bool,
}

impl RouteComparison {
    /// |difference| measured in combined standard errors.
    pub fn sigma_distance(&self) -> f64 {
        if self.combined_se == 0.0 {
            return if self.difference == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        self.difference / self.combined_se
    }
}

/// Run both discretisation routes for the nearest-neighbour label
/// correlation: an XY chain whose measurement samples are projected through
/// the clock-aligned partition, and a clock chain with the same Hamiltonian.
/// The routes use independent RNG streams of `seed`. `measure_every` thins
/// the measurements (one sample per that many sweeps), which keeps the
/// batch samples near-independent.
pub fn compare_discretisations(
    lattice: &Lattice,
    beta: f64,
    q: usize,
    sweeps: usize,
    burn_in: usize,
    measure_every: usize,
    seed: u64,
) -> Result<RouteComparison> {
    if measure_every == 0 {
        return Err(Error::InvalidParameter("measure_every must be >= 1".into()));
    }
    let params = ModelParams::new(beta, q)?;
    let partition = ArcPartition::clock_aligned(q)?;
    let n = lattice.n_sites();

    let route1 = || -> Result<ObservableSeries> {
        let mut state = XyState::with_stream(AngleConfig::constant(n, 0.0), seed, 1);
        let width = burn_in_xy(&mut state, lattice, &params, burn_in)?;
        let mut values = Vec::with_capacity(sweeps / measure_every);
        for sweep in 0..sweeps {
            metropolis_sweep_xy(&mut state, lattice, &params, width)?;
            if sweep.is_multiple_of(measure_every) {
                let labels = discretise(&partition, &state.config);
                values.push(bond_alignment(lattice, &embed(&labels)));
            }
        }
        ObservableSeries::from_values("route1_nn_label_correlation", values, 32)
    };
    let route2 = || -> Result<ObservableSeries> {
        let mut state = ClockState::with_stream(LabelConfig::constant(n, 1, q)?, seed, 2);
        for _ in 0..burn_in {
            heatbath_sweep_clock(&mut state, lattice, &params)?;
        }
        let mut values = Vec::with_capacity(sweeps / measure_every);
        for sweep in 0..sweeps {
            heatbath_sweep_clock(&mut state, lattice, &params)?;
            if sweep.is_multiple_of(measure_every) {
                values.push(bond_alignment(lattice, &embed(&state.config)));
            }
        }
        ObservableSeries::from_values("route2_nn_label_correlation", values, 32)
    };

    #[cfg(feature = "parallel")]
    let (series1, series2) = rayon::join(route1, route2);
    #[cfg(not(feature = "parallel"))]
    let (series1, series2) = (route1(), route2());
    let (series1, series2) = (series1?, series2?);

    let difference = (series1.mean - series2.mean).abs();
    let combined_se = (series1.std_error.powi(2) + series2.std_error.powi(2)).sqrt();
    Ok(RouteComparison {
        route1: series1,
        route2: series2,
        difference,
        combined_se,
        certified: bounds::certified(bounds::analytic_bound(lattice.spec().dimension, beta, q)?),
    })
}

/// Time series of the east–west order parameter of a constrained chain
/// started in one well.
pub fn constrained_well_series(
    lattice: &Lattice,
    partition: &ArcPartition,
    assigned: &LabelConfig,
    beta: f64,
    start_east: bool,
    sweeps: usize,
    seed: u64,
) -> Result<ObservableSeries> {
    let q = partition.q();
    let params = ModelParams::new(beta, q)?;
    let half_width = PI / q as f64;
    // Start near the chosen well: spins displaced from their midpoints by
    // 80% of the arc half-width in the well's direction.
    let mut angles = Vec::with_capacity(lattice.n_sites());
    for site in 0..lattice.n_sites() {
        let mid = partition.midpoint(assigned.get(site))?;
        let orientation = -mid.sin().signum();
        let sign = if start_east { 1.0 } else { -1.0 };
        angles.push(mid + sign * orientation * 0.8 * half_width);
    }
    let mut state = XyState::new(AngleConfig::new(angles), seed);
    // Proposal width scaled to the arc so the constrained chain keeps a
    // usable acceptance rate at any q.
    let width = partition.width() / 2.0;
    let mut values = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        constrained_sweep_xy(&mut state, lattice, &params, partition, assigned, width)?;
        values.push(east_west_order(&state.config, partition, assigned)?);
    }
    ObservableSeries::from_values(
        if start_east {
            "m_ew_from_east"
        } else {
            "m_ew_from_west"
        },
        values,
        32,
    )
}
