//! Hamiltonians: XY and clock energies, single-site fields, and the
//! constrained double-well structure of a nearly-antipodal bond.
//!
//! The energy convention is H = −β Σ_bonds cos(θ_i − θ_j), with β applied at
//! energy evaluation so `bond_term` stays dimensionless.

use crate::config::{embed, AngleConfig, LabelConfig};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::partition::ArcPartition;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub q: usize,
}

impl ModelParams {
    pub fn new(beta: f64, q: usize) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if q < 2 {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
        }
        Ok(Self { beta, q })
    }
}

/// Cosine coupling of one bond: the dot product of the two unit spins.
pub fn bond_term(theta_a: f64, theta_b: f64) -> f64 {
    (theta_a - theta_b).cos()
}

/// Total XY energy H = −β Σ_bonds cos(θ_i − θ_j) over the bond multiset.
pub fn xy_energy(lattice: &Lattice, config: &AngleConfig, params: &ModelParams) -> Result<f64> {
    if config.len() != lattice.n_sites() {
        return Err(Error::ConfigSizeMismatch {
            context: "xy_energy",
            got: config.len(),
            expected: lattice.n_sites(),
        });
    }
    let sum: f64 = lattice
        .bonds()
        .iter()
        .map(|&(a, b)| bond_term(config.get(a), config.get(b)))
        .sum();
    Ok(-params.beta * sum)
}

/// Clock energy: the XY energy of the configuration embedded at the clock
/// angles 2π(k−1)/q.
pub fn clock_energy(lattice: &Lattice, labels: &LabelConfig, params: &ModelParams) -> Result<f64> {
    xy_energy(lattice, &embed(labels), params)
}

/// Sum of the neighbouring unit vectors at `site`. The single-site
/// conditional density is ∝ exp(β (cos θ, sin θ) · field), so it depends on
/// the rest of the configuration only through this vector.
pub fn local_field(lattice: &Lattice, config: &AngleConfig, site: usize) -> Result<(f64, f64)> {
    if site >= lattice.n_sites() {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: lattice.n_sites(),
        });
    }
    if config.len() != lattice.n_sites() {
        return Err(Error::ConfigSizeMismatch {
            context: "local_field",
            got: config.len(),
            expected: lattice.n_sites(),
        });
    }
    let mut fx = 0.0;
    let mut fy = 0.0;
    for &j in lattice.neighbors(site) {
        let theta = config.get(j);
        fx += theta.cos();
        fy += theta.sin();
    }
    Ok((fx, fy))
}

/// Extrema of one bond constrained to the North/South arc pair.
///
/// For a north-centered partition with even q, one spin is confined to the
/// arc around North and its neighbour to the arc around South. The per-bond
/// energy −cos(θ_A − θ_B) then has two corner minima (both spins leaning
/// East, or both leaning West) separated by a ridge of antipodal pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellReport {
    pub q: usize,
    /// (θ_A, θ_B) with both spins leaning West: North-West over South-West.
    pub west_well: (f64, f64),
    /// (θ_A, θ_B) with both spins leaning East.
    pub east_well: (f64, f64),
    /// Per-bond energy at either well, in units of β: cos(2π/q).
    pub well_energy: f64,
    /// Per-bond energy on the antipodal ridge separating the wells: 1.
    pub barrier_energy: f64,
    /// barrier_energy − well_energy = 1 − cos(2π/q).
    pub barrier_height: f64,
}

/// Closed-form constrained extrema for even q >= 4.
///
/// Minimisation runs over the arc closures; the corner minimisers sit on the
/// arcs' edges at angle separation Δ = π ± 2π/q.
pub fn constrained_bond_extrema(q: usize) -> Result<WellReport> {
    if q < 3 {
        return Err(Error::InvalidParameter(format!(
            "constrained extrema need q >= 3, got {q}"
        )));
    }
    if !q.is_multiple_of(2) {
        return Err(Error::OddArcCount { q });
    }
    let half_width = PI / q as f64;
    let north = PI / 2.0;
    let south = 3.0 * PI / 2.0;
    let well_energy = (TAU / q as f64).cos();
    let barrier_energy = 1.0;
    Ok(WellReport {
        q,
        west_well: (north + half_width, south - half_width),
        east_well: (north - half_width, south + half_width),
        well_energy,
        barrier_energy,
        barrier_height: barrier_energy - well_energy,
    })
}

/// The north-centered partition used by the constrained-bond analysis.
pub fn well_partition(q: usize) -> Result<ArcPartition> {
    ArcPartition::north_centered(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierScaling {
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of log(barrier_height) against log(q).
    pub slope: f64,
}

/// Barrier heights over a list of even q values with the fitted log-log slope.
pub fn barrier_scaling(q_list: &[usize]) -> Result<BarrierScaling> {
    if q_list.len() < 3 {
        return Err(Error::TooFewPoints {
            min: 3,
            got: q_list.len(),
        });
    }
    if q_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("q_list must be ascending".into()));
    }
    let points: Vec<(usize, f64)> = q_list
        .iter()
        .map(|&q| Ok((q, constrained_bond_extrema(q)?.barrier_height)))
        .collect::<Result<_>>()?;

    let xs: Vec<f64> = points.iter().map(|&(q, _)| (q as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, b)| b.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    Ok(BarrierScaling {
        points,
        slope: sxy / sxx,
    })
}
