//! Spin configurations: angle-valued and label-valued fields over a lattice,
//! the discretisation map between them, and a simple file format.
//!
//! Configurations are flat vectors in site lexicographic order. The file
//! format is a short ASCII header (dimension, side, boundary, arc count,
//! partition offset) followed by the raw payload: little-endian f64 for
//! angles, little-endian u32 for labels.

use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice, LatticeSpec};
use crate::partition::{clock_angle, normalize_angle, ArcPartition};
use std::io::{BufRead, Write};

/// Angles in [0, 2π), one per site.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleConfig {
    angles: Vec<f64>,
}

impl AngleConfig {
    pub fn new(angles: Vec<f64>) -> Self {
        Self {
            angles: angles.into_iter().map(normalize_angle).collect(),
        }
    }

    pub fn constant(n_sites: usize, theta: f64) -> Self {
        Self::new(vec![theta; n_sites])
    }

    /// Angle `theta_even` on even-parity sites, `theta_odd` on odd ones.
    pub fn checkerboard(lattice: &Lattice, theta_even: f64, theta_odd: f64) -> Self {
        Self::new(
            (0..lattice.n_sites())
                .map(|s| {
                    if lattice.parity(s) {
                        theta_odd
                    } else {
                        theta_even
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn get(&self, site: usize) -> f64 {
        self.angles[site]
    }

    pub fn set(&mut self, site: usize, theta: f64) {
        self.angles[site] = normalize_angle(theta);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    /// Rotate every spin by `delta`.
    pub fn rotated(&self, delta: f64) -> Self {
        Self::new(self.angles.iter().map(|&t| t + delta).collect())
    }
}

/// Labels in 1..=q, one per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelConfig {
    labels: Vec<usize>,
    q: usize,
}

impl LabelConfig {
    pub fn new(labels: Vec<usize>, q: usize) -> Result<Self> {
        for &l in &labels {
            if l == 0 || l > q {
                return Err(Error::LabelOutOfRange { label: l, q });
            }
        }
        Ok(Self { labels, q })
    }

    pub fn constant(n_sites: usize, label: usize, q: usize) -> Result<Self> {
        Self::new(vec![label; n_sites], q)
    }

    /// `label_even` on even-parity sites, `label_odd` on odd ones.
    pub fn alternating(
        lattice: &Lattice,
        label_even: usize,
        label_odd: usize,
        q: usize,
    ) -> Result<Self> {
        Self::new(
            (0..lattice.n_sites())
                .map(|s| {
                    if lattice.parity(s) {
                        label_odd
                    } else {
                        label_even
                    }
                })
                .collect(),
            q,
        )
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, site: usize) -> usize {
        self.labels[site]
    }

    pub fn set(&mut self, site: usize, label: usize) -> Result<()> {
        if label == 0 || label > self.q {
            return Err(Error::LabelOutOfRange { label, q: self.q });
        }
        self.labels[site] = label;
        Ok(())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    /// Cyclically shift every label by `shift`.
    pub fn shifted(&self, shift: usize) -> Self {
        Self {
            labels: self
                .labels
                .iter()
                .map(|&l| (l - 1 + shift) % self.q + 1)
                .collect(),
            q: self.q,
        }
    }
}

/// Sitewise application of the discretisation map.
pub fn discretise(partition: &ArcPartition, config: &AngleConfig) -> LabelConfig {
    LabelConfig {
        labels: config.angles.iter().map(|&t| partition.arc_of(t)).collect(),
        q: partition.q(),
    }
}

/// Canonical continuous representative: every label mapped to its arc
/// midpoint. Inverse of `discretise` on label configurations.
pub fn representative(partition: &ArcPartition, labels: &LabelConfig) -> Result<AngleConfig> {
    if labels.q() != partition.q() {
        return Err(Error::InvalidParameter(format!(
            "label config has q = {}, partition has q = {}",
            labels.q(),
            partition.q()
        )));
    }
    let angles = labels
        .labels
        .iter()
        .map(|&l| partition.midpoint(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleConfig { angles })
}

/// Embed labels at the clock angles 2π(k−1)/q.
pub fn embed(labels: &LabelConfig) -> AngleConfig {
    AngleConfig::new(
        labels
            .labels
            .iter()
            .map(|&l| clock_angle(l, labels.q))
            .collect(),
    )
}

/// Metadata stored alongside a serialized configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigHeader {
    pub lattice: LatticeSpec,
    pub q: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoredConfig {
    Angles(AngleConfig),
    Labels(LabelConfig),
}

const MAGIC: &str = "arcspin-config v1";

pub fn write_config<W: Write>(
    mut w: W,
    header: &ConfigHeader,
    config: &StoredConfig,
) -> Result<()> {
    let (kind, n) = match config {
        StoredConfig::Angles(a) => ("angle", a.len()),
        StoredConfig::Labels(l) => ("label", l.len()),
    };
    if n != header.lattice.n_sites() {
        return Err(Error::ConfigSizeMismatch {
            context: "write_config",
            got: n,
            expected: header.lattice.n_sites(),
        });
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind {kind}")?;
    writeln!(w, "d {}", header.lattice.dimension)?;
    writeln!(w, "L {}", header.lattice.side)?;
    writeln!(w, "boundary {}", header.lattice.boundary.as_str())?;
    writeln!(w, "q {}", header.q)?;
    // The default float formatter is shortest-round-trip, so the offset
    // survives write/read exactly.
    writeln!(w, "offset {}", header.offset)?;
    writeln!(w, "sites {n}")?;
    writeln!(w, "data")?;
    match config {
        StoredConfig::Angles(a) => {
            for &theta in &a.angles {
                w.write_all(&theta.to_le_bytes())?;
            }
        }
        StoredConfig::Labels(l) => {
            for &label in &l.labels {
                w.write_all(&(label as u32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_config<R: BufRead>(mut r: R) -> Result<(ConfigHeader, StoredConfig)> {
    let mut line = String::new();
    let next = |r: &mut R, line: &mut String| -> Result<String> {
        line.clear();
        if r.read_line(line)? == 0 {
            return Err(Error::Format("unexpected end of header".into()));
        }
        Ok(line.trim_end_matches('\n').to_string())
    };

    if next(&mut r, &mut line)? != MAGIC {
        return Err(Error::Format("missing arcspin-config magic line".into()));
    }
    let mut kind = None;
    let mut d = None;
    let mut l_side = None;
    let mut boundary = None;
    let mut q = None;
    let mut offset = None;
    let mut sites = None;
    loop {
        let text = next(&mut r, &mut line)?;
        if text == "data" {
            break;
        }
        let (key, value) = text
            .split_once(' ')
            .ok_or_else(|| Error::Format(format!("malformed header line '{text}'")))?;
        let bad = |what: &str| Error::Format(format!("bad {what} value '{value}'"));
        match key {
            "kind" => kind = Some(value.to_string()),
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
            "L" => l_side = Some(value.parse::<usize>().map_err(|_| bad("L"))?),
            "boundary" => boundary = Some(Boundary::parse(value)?),
            "q" => q = Some(value.parse::<usize>().map_err(|_| bad("q"))?),
            "offset" => offset = Some(value.parse::<f64>().map_err(|_| bad("offset"))?),
            "sites" => sites = Some(value.parse::<usize>().map_err(|_| bad("sites"))?),
            other => return Err(Error::Format(format!("unknown header key '{other}'"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("missing header key '{what}'"));
    let header = ConfigHeader {
        lattice: LatticeSpec::new(
            d.ok_or_else(|| missing("d"))?,
            l_side.ok_or_else(|| missing("L"))?,
            boundary.ok_or_else(|| missing("boundary"))?,
        ),
        q: q.ok_or_else(|| missing("q"))?,
        offset: offset.ok_or_else(|| missing("offset"))?,
    };
    let n = sites.ok_or_else(|| missing("sites"))?;
    if n != header.lattice.n_sites() {
        return Err(Error::Format(format!(
            "header sites = {n} does not match d, L ({})",
            header.lattice.n_sites()
        )));
    }

    let config = match kind.as_deref() {
        Some("angle") => {
            let mut buf = vec![0u8; 8 * n];
            r.read_exact(&mut buf)?;
            let angles = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            StoredConfig::Angles(AngleConfig { angles })
        }
        Some("label") => {
            let mut buf = vec![0u8; 4 * n];
            r.read_exact(&mut buf)?;
            let labels: Vec<usize> = buf
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
                .collect();
            StoredConfig::Labels(LabelConfig::new(labels, header.q)?)
        }
        Some(other) => return Err(Error::Format(format!("unknown config kind '{other}'"))),
        None => return Err(missing("kind")),
    };
    Ok((header, config))
}
