//! Finite hypercubic lattices: site indexing, bond multisets, neighbour lists.
//!
//! Sites live on a d-dimensional box of side L, ordered lexicographically by
//! coordinate tuple. Bonds are nearest-neighbour pairs; under periodic
//! boundary every site gets one bond per axis in the +1 direction, which for
//! L = 2 yields doubled bonds between the same pair of sites (a multigraph).
//! Everything is immutable after construction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary '{other}' (expected 'periodic' or 'open')"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub side: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(dimension: usize, side: usize, boundary: Boundary) -> Self {
        Self {
            dimension,
            side,
            boundary,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.side.pow(self.dimension as u32)
    }
}

/// A finite lattice with its bond multiset and per-site neighbour lists.
#[derive(Debug, Clone)]
pub struct Lattice {
    spec: LatticeSpec,
    n_sites: usize,
    bonds: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Lattice {
    /// Build the site list and bond multiset for `spec`.
    ///
    /// Rejects d = 0, L = 0, and the periodic L = 1 case (self-loops).
    pub fn build(spec: LatticeSpec) -> Result<Self> {
        if spec.dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if spec.side == 0 {
            return Err(Error::InvalidParameter("side must be >= 1".into()));
        }
        if spec.boundary == Boundary::Periodic && spec.side == 1 {
            return Err(Error::PeriodicSelfLoop);
        }

        let n_sites = spec.n_sites();
        let mut bonds = Vec::new();
        let mut coords = vec![0usize; spec.dimension];
        for site in 0..n_sites {
            decode_coords(site, spec.dimension, spec.side, &mut coords);
            for (axis, &c) in coords.iter().enumerate() {
                let other = if c + 1 < spec.side {
                    Some(site + stride(axis, spec.dimension, spec.side))
                } else {
                    match spec.boundary {
                        // Wrap back to coordinate 0 along this axis.
                        Boundary::Periodic => {
                            Some(site - c * stride(axis, spec.dimension, spec.side))
                        }
                        Boundary::Open => None,
                    }
                };
                if let Some(other) = other {
                    bonds.push((site, other));
                }
            }
        }

        let mut neighbors = vec![Vec::new(); n_sites];
        for &(a, b) in &bonds {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }

        Ok(Self {
            spec,
            n_sites,
            bonds,
            neighbors,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Bond multiset; for periodic L = 2 each pair appears twice.
    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    /// Neighbour multiset of a site (a doubled bond lists the partner twice).
    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut c = vec![0usize; self.spec.dimension];
        decode_coords(site, self.spec.dimension, self.spec.side, &mut c);
        c
    }

    pub fn site_at(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.spec.dimension);
        let mut site = 0;
        for &c in coords {
            debug_assert!(c < self.spec.side);
            site = site * self.spec.side + c;
        }
        site
    }

    /// Site displaced by `dist` steps along `axis`, or None if it falls off
    /// an open edge.
    pub fn displaced(&self, site: usize, axis: usize, dist: usize) -> Option<usize> {
        let mut coords = self.coords(site);
        let c = coords[axis] + dist;
        coords[axis] = match self.spec.boundary {
            Boundary::Periodic => c % self.spec.side,
            Boundary::Open => {
                if c < self.spec.side {
                    c
                } else {
                    return None;
                }
            }
        };
        Some(self.site_at(&coords))
    }

    /// Checkerboard parity of a site (even/odd coordinate sum). The two
    /// parities are the two sublattices of the bipartite decomposition.
    pub fn parity(&self, site: usize) -> bool {
        self.coords(site).iter().sum::<usize>() % 2 == 1
    }
}

fn stride(axis: usize, dimension: usize, side: usize) -> usize {
    side.pow((dimension - 1 - axis) as u32)
}

fn decode_coords(site: usize, dimension: usize, side: usize, out: &mut [usize]) {
    let mut rest = site;
    for axis in (0..dimension).rev() {
        out[axis] = rest % side;
        rest /= side;
    }
}
