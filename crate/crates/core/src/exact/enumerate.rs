//! Exhaustive enumeration of small clock systems.
//!
//! Sums run over all q^N label configurations with counting a-priori weight,
//! scaled by exp(−β·n_bonds) so every state weight lies in (0, 1]. The state
//! space is chunked by the first site's label; chunk partials are combined
//! in label order, so the parallel and sequential paths produce identical
//! floating-point results.

use crate::error::{Error, Result};
use crate::exact::transfer::displacement_range;
use crate::exact::ExactResult;
use crate::lattice::Lattice;
use crate::partition::clock_angle;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Hard cap on the enumerated state count.
pub const ENUMERATION_CAP: f64 = 1e7;

struct ChunkSums {
    z: f64,
    bond_sum: f64,
    corr: Vec<f64>,
}

struct Tables {
    /// cos(2π k / q) by label difference.
    cos_by_diff: Vec<f64>,
    bonds: Vec<(usize, usize)>,
    /// Site pairs per reported displacement.
    pairs: Vec<Vec<(usize, usize)>>,
}

fn enumerate_chunk(
    q: usize,
    beta: f64,
    tables: &Tables,
    first_label: usize,
    n_sites: usize,
) -> ChunkSums {
    let n_bonds = tables.bonds.len() as f64;
    let mut labels = vec![0usize; n_sites];
    labels[0] = first_label;
    let mut sums = ChunkSums {
        z: 0.0,
        bond_sum: 0.0,
        corr: vec![0.0; tables.pairs.len()],
    };
    loop {
        let mut bond_cos = 0.0;
        for &(a, b) in &tables.bonds {
            bond_cos += tables.cos_by_diff[(labels[a] + q - labels[b]) % q];
        }
        let weight = (beta * (bond_cos - n_bonds)).exp();
        sums.z += weight;
        sums.bond_sum += bond_cos * weight;
        for (slot, pairs) in tables.pairs.iter().enumerate() {
            let mut acc = 0.0;
            for &(a, b) in pairs {
                acc += tables.cos_by_diff[(labels[a] + q - labels[b]) % q];
            }
            sums.corr[slot] += weight * acc / pairs.len() as f64;
        }

        // Odometer over sites 1..n (site 0 is this chunk's fixed label).
        let mut site = n_sites - 1;
        loop {
            if site == 0 {
                return sums;
            }
            labels[site] += 1;
            if labels[site] < q {
                break;
            }
            labels[site] = 0;
            site -= 1;
        }
    }
}

fn build_tables(lattice: &Lattice, q: usize) -> Tables {
    let cos_by_diff: Vec<f64> = (0..q).map(|k| clock_angle(k + 1, q).cos()).collect();
    let displacements = displacement_range(lattice.spec().side, lattice.spec().boundary);
    let pairs = displacements
        .iter()
        .map(|&r| {
            (0..lattice.n_sites())
                .filter_map(|i| lattice.displaced(i, 0, r).map(|j| (i, j)))
                .collect()
        })
        .collect();
    Tables {
        cos_by_diff,
        bonds: lattice.bonds().to_vec(),
        pairs,
    }
}

fn combine(lattice: &Lattice, beta: f64, chunks: Vec<ChunkSums>) -> Result<ExactResult> {
    let n_bonds = lattice.bonds().len() as f64;
    let mut z = 0.0;
    let mut bond_sum = 0.0;
    let n_slots = chunks.first().map(|c| c.corr.len()).unwrap_or(0);
    let mut corr_sums = vec![0.0; n_slots];
    for c in chunks {
        z += c.z;
        bond_sum += c.bond_sum;
        for (slot, v) in c.corr.into_iter().enumerate() {
            corr_sums[slot] += v;
        }
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::NonFinite("enumeration partition"));
    }
    let displacements = displacement_range(lattice.spec().side, lattice.spec().boundary);
    Ok(ExactResult {
        log_partition: z.ln() + beta * n_bonds,
        mean_energy: -beta * bond_sum / z,
        correlations: displacements
            .into_iter()
            .zip(corr_sums.into_iter().map(|s| s / z))
            .collect(),
    })
}

fn check_inputs(lattice: &Lattice, q: usize, beta: f64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let states = (q as f64).powi(lattice.n_sites() as i32);
    if states > ENUMERATION_CAP {
        return Err(Error::StateSpaceTooLarge {
            states,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Exact partition function, mean energy, and axis-0 correlations of the
/// clock model by full enumeration. Feasible while q^sites stays within
/// `ENUMERATION_CAP`.
pub fn enumerate_clock(lattice: &Lattice, q: usize, beta: f64) -> Result<ExactResult> {
    check_inputs(lattice, q, beta)?;
    let tables = build_tables(lattice, q);
    let n_sites = lattice.n_sites();

    #[cfg(feature = "parallel")]
    let chunks: Vec<ChunkSums> = (0..q)
        .into_par_iter()
        .map(|first| enumerate_chunk(q, beta, &tables, first, n_sites))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<ChunkSums> = (0..q)
        .map(|first| enumerate_chunk(q, beta, &tables, first, n_sites))
        .collect();

    combine(lattice, beta, chunks)
}

/// Single-threaded `enumerate_clock`, bit-identical to the parallel path.
pub fn enumerate_clock_serial(lattice: &Lattice, q: usize, beta: f64) -> Result<ExactResult> {
    check_inputs(lattice, q, beta)?;
    let tables = build_tables(lattice, q);
    let n_sites = lattice.n_sites();
    let chunks: Vec<ChunkSums> = (0..q)
        .map(|first| enumerate_chunk(q, beta, &tables, first, n_sites))
        .collect();
    combine(lattice, beta, chunks)
}
