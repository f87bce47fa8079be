//! Arc partitions of the circle: the discretisation map from angles to labels.
//!
//! The circle is cut into q half-open arcs of equal length 2π/q, the first
//! one starting at the offset angle. Labels are 1-based. Two offset presets
//! matter in practice:
//!
//! * `north_centered`: North (π/2) sits at the midpoint of arc 1 and, for
//!   even q, South (3π/2) at the midpoint of arc q/2 + 1. Used by the
//!   constrained double-well experiments.
//! * `clock_aligned`: arc midpoints coincide with the clock angles
//!   2π(k−1)/q, so discretising an embedded clock configuration returns the
//!   original labels. Used when comparing the two discretisation routes.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Reduce an angle to [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // t + TAU can round back up to TAU for tiny negative t.
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Partition of the circle into q equal half-open arcs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPartition {
    q: usize,
    offset: f64,
}

impl ArcPartition {
    pub fn new(q: usize, offset: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!(
                "arc count must be >= 2, got {q}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite("partition offset"));
        }
        Ok(Self {
            q,
            offset: normalize_angle(offset),
        })
    }

    /// Offset π/2 − π/q: North is the midpoint of arc 1.
    pub fn north_centered(q: usize) -> Result<Self> {
        Self::new(q, PI / 2.0 - PI / q as f64)
    }

    /// Offset −π/q: arc midpoints fall on the clock angles 2π(k−1)/q.
    pub fn clock_aligned(q: usize) -> Result<Self> {
        Self::new(q, -PI / q as f64)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Arc length 2π/q.
    pub fn width(&self) -> f64 {
        TAU / self.q as f64
    }

    /// Label of the arc containing `angle` (any real angle accepted).
    ///
    /// Arcs are half-open, so an angle on a boundary belongs to the arc whose
    /// lower endpoint it equals.
    pub fn arc_of(&self, angle: f64) -> usize {
        let rel = normalize_angle(angle - self.offset);
        let l = (rel / self.width()) as usize;
        // rel < 2π, but rel/width can round up to q at the wrap point.
        l.min(self.q - 1) + 1
    }

    /// Lower endpoint of arc `label`, not reduced mod 2π (useful as the left
    /// end of a quadrature interval).
    pub fn arc_start(&self, label: usize) -> Result<f64> {
        self.check_label(label)?;
        Ok(self.offset + (label - 1) as f64 * self.width())
    }

    /// Midpoint of arc `label`, reduced to [0, 2π).
    pub fn midpoint(&self, label: usize) -> Result<f64> {
        Ok(normalize_angle(self.arc_start(label)? + 0.5 * self.width()))
    }

    pub fn check_label(&self, label: usize) -> Result<()> {
        if label == 0 || label > self.q {
            return Err(Error::LabelOutOfRange { label, q: self.q });
        }
        Ok(())
    }

    /// Whether `angle` lies in arc `label`.
    pub fn contains(&self, label: usize, angle: f64) -> bool {
        self.arc_of(angle) == label
    }

    /// Signed deviation of `angle` from the midpoint of arc `label`,
    /// in (−π, π]. For angles inside the arc, |deviation| <= π/q.
    pub fn deviation(&self, label: usize, angle: f64) -> Result<f64> {
        let mid = self.midpoint(label)?;
        let mut d = normalize_angle(angle - mid);
        if d > PI {
            d -= TAU;
        }
        Ok(d)
    }
}

/// Clock angle 2π(k−1)/q of a 1-based label.
pub fn clock_angle(label: usize, q: usize) -> f64 {
    TAU * (label - 1) as f64 / q as f64
}
