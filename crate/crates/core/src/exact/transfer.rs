//! Transfer-operator machinery for nearest-neighbour chains.
//!
//! A chain is reduced to a finite node set: the q clock angles for the
//! discrete model, or a per-arc quadrature grid for the XY model. The bond
//! kernel is stored as exp(β(cosΔ − 1)) so its largest entry is 1, and every
//! propagation step renormalises and accumulates logs, which keeps all
//! results finite far beyond β = 512. Constrained propagation (each site
//! pinned to one arc) runs fully in log space because an arc-to-antipodal-arc
//! step can underflow even the scaled kernel.

// Indexed loops over paired row-major matrices stay as they are: iterator
// chains obscure the (x, y) kernel structure.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::exact::quad::gauss_legendre_on;
use crate::lattice::Boundary;
use crate::partition::{clock_angle, ArcPartition};

/// Node placement inside each arc for the projected (type-1) operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcRule {
    /// Composite midpoint: m uniform sub-midpoints per arc.
    Midpoint,
    /// m-point Gauss–Legendre rule per arc.
    GaussLegendre,
}

/// Discrete single-spin space: node angles, a-priori weights, arc labels.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub angles: Vec<f64>,
    pub alpha: Vec<f64>,
    pub label_of: Vec<usize>,
    pub q: usize,
}

impl NodeSet {
    /// Clock nodes with counting a-priori weight 1 per state, so partition
    /// functions match plain sums over configurations.
    pub fn clock(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
        }
        Ok(Self {
            angles: (1..=q).map(|k| clock_angle(k, q)).collect(),
            alpha: vec![1.0; q],
            label_of: (1..=q).collect(),
            q,
        })
    }

    /// Quadrature nodes inside every arc of `partition`, weighted by the
    /// normalised circle measure dσ/2π. Nodes never sit on arc endpoints,
    /// so arc membership is unambiguous.
    pub fn arc_grid(partition: &ArcPartition, m_per_arc: usize, rule: ArcRule) -> Result<Self> {
        if m_per_arc == 0 {
            return Err(Error::InvalidParameter("m_per_arc must be >= 1".into()));
        }
        let q = partition.q();
        let width = partition.width();
        let mut angles = Vec::with_capacity(q * m_per_arc);
        let mut alpha = Vec::with_capacity(q * m_per_arc);
        let mut label_of = Vec::with_capacity(q * m_per_arc);
        for label in 1..=q {
            let start = partition.arc_start(label)?;
            match rule {
                ArcRule::Midpoint => {
                    let h = width / m_per_arc as f64;
                    for j in 0..m_per_arc {
                        angles.push(start + (j as f64 + 0.5) * h);
                        alpha.push(h / (2.0 * std::f64::consts::PI));
                        label_of.push(label);
                    }
                }
                ArcRule::GaussLegendre => {
                    let (nodes, weights) = gauss_legendre_on(m_per_arc, start, start + width);
                    for (x, w) in nodes.into_iter().zip(weights) {
                        angles.push(x);
                        alpha.push(w / (2.0 * std::f64::consts::PI));
                        label_of.push(label);
                    }
                }
            }
        }
        Ok(Self {
            angles,
            alpha,
            label_of,
            q,
        })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// A renormalised nonnegative vector with its stripped log scale.
#[derive(Debug, Clone)]
struct Scaled {
    v: Vec<f64>,
    log: f64,
}

impl Scaled {
    fn renormalised(mut v: Vec<f64>, log: f64) -> Result<Self> {
        let max = v.iter().cloned().fold(0.0f64, f64::max);
        if !max.is_finite() || max <= 0.0 {
            return Err(Error::NonFinite("transfer propagation"));
        }
        v.iter_mut().for_each(|x| *x /= max);
        Ok(Self {
            v,
            log: log + max.ln(),
        })
    }
}

/// Transfer operator for a homogeneous nearest-neighbour chain over a node
/// set.
#[derive(Debug, Clone)]
pub struct ChainKernel {
    pub nodes: NodeSet,
    pub beta: f64,
    n: usize,
    /// exp(β(cos(x_i − x_j) − 1)), row-major.
    k: Vec<f64>,
    /// cos(x_i − x_j), row-major: bond observable.
    cos_diff: Vec<f64>,
}

impl ChainKernel {
    pub fn new(nodes: NodeSet, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        let n = nodes.len();
        let mut k = vec![0.0; n * n];
        let mut cos_diff = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = (nodes.angles[i] - nodes.angles[j]).cos();
                cos_diff[i * n + j] = c;
                k[i * n + j] = (beta * (c - 1.0)).exp();
            }
        }
        Ok(Self {
            nodes,
            beta,
            n,
            k,
            cos_diff,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// w(y) = α(y) Σ_x k(x, y) v(x)
    fn step(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n];
        for x in 0..n {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            let row = &self.k[x * n..(x + 1) * n];
            for y in 0..n {
                w[y] += row[y] * vx;
            }
        }
        for y in 0..n {
            w[y] *= self.nodes.alpha[y];
        }
        w
    }

    /// u(x) = Σ_y k(x, y) α(y) v(y)
    fn step_back(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut u = vec![0.0; n];
        for x in 0..n {
            let row = &self.k[x * n..(x + 1) * n];
            let mut acc = 0.0;
            for y in 0..n {
                acc += row[y] * self.nodes.alpha[y] * v[y];
            }
            u[x] = acc;
        }
        u
    }

    fn forward_chain(&self, len: usize) -> Result<Vec<Scaled>> {
        let mut out = Vec::with_capacity(len);
        out.push(Scaled::renormalised(self.nodes.alpha.clone(), 0.0)?);
        for t in 1..len {
            let prev = &out[t - 1];
            out.push(Scaled::renormalised(self.step(&prev.v), prev.log)?);
        }
        Ok(out)
    }

    fn backward_chain(&self, len: usize) -> Result<Vec<Scaled>> {
        let mut out = vec![Scaled::renormalised(vec![1.0; self.n], 0.0)?];
        for t in 1..len {
            let prev = &out[t - 1];
            out.push(Scaled::renormalised(self.step_back(&prev.v), prev.log)?);
        }
        out.reverse();
        Ok(out)
    }

    /// log Z of the open chain with `len` sites (β bond offsets restored).
    pub fn open_log_partition(&self, len: usize) -> Result<f64> {
        let fw = self.forward_chain(len)?;
        let last = &fw[len - 1];
        let total: f64 = last.v.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NonFinite("open-chain partition"));
        }
        Ok(total.ln() + last.log + self.beta * (len as f64 - 1.0))
    }

    /// Mean total energy −β Σ_bonds ⟨cosΔ⟩ of the open chain.
    pub fn open_mean_energy(&self, len: usize) -> Result<f64> {
        if len < 2 {
            return Ok(0.0);
        }
        let fw = self.forward_chain(len)?;
        let bw = self.backward_chain(len)?;
        let mut total = 0.0;
        for t in 0..len - 1 {
            total += self.bond_mean(&fw[t].v, &bw[t + 1].v)?;
        }
        Ok(-self.beta * total)
    }

    /// ⟨cosΔ⟩ on the bond between the owners of `left` and `right` partials.
    fn bond_mean(&self, left: &[f64], right: &[f64]) -> Result<f64> {
        let n = self.n;
        let mut num = 0.0;
        let mut den = 0.0;
        for x in 0..n {
            let lx = left[x];
            if lx == 0.0 {
                continue;
            }
            let krow = &self.k[x * n..(x + 1) * n];
            let crow = &self.cos_diff[x * n..(x + 1) * n];
            for y in 0..n {
                let path = lx * krow[y] * self.nodes.alpha[y] * right[y];
                den += path;
                num += crow[y] * path;
            }
        }
        if !(den.is_finite() && den > 0.0) {
            return Err(Error::NonFinite("bond expectation"));
        }
        Ok(num / den)
    }

    /// ⟨a(x_i) b(x_{i+r})⟩ on the open chain, for precomputed partials.
    fn open_pair(
        &self,
        fw: &[Scaled],
        bw: &[Scaled],
        i: usize,
        r: usize,
        obs_a: &[f64],
        obs_b: &[f64],
    ) -> Result<f64> {
        let j = i + r;
        let mut u: Vec<f64> = fw[i].v.iter().zip(obs_a).map(|(&f, &a)| f * a).collect();
        // Observables can be negative; propagate the positive and negative
        // parts separately so renormalisation stays valid.
        let mut pos: Vec<f64> = u.iter().map(|&x| x.max(0.0)).collect();
        let mut neg: Vec<f64> = u.iter().map(|&x| (-x).max(0.0)).collect();
        let mut log_extra = 0.0;
        for _ in 0..r {
            pos = self.step(&pos);
            neg = self.step(&neg);
            let max = pos.iter().chain(neg.iter()).cloned().fold(0.0f64, f64::max);
            if !(max.is_finite()) {
                return Err(Error::NonFinite("pair propagation"));
            }
            if max > 0.0 {
                pos.iter_mut().for_each(|x| *x /= max);
                neg.iter_mut().for_each(|x| *x /= max);
                log_extra += max.ln();
            }
        }
        u = pos.iter().zip(&neg).map(|(&p, &m)| p - m).collect();
        let num: f64 = u
            .iter()
            .zip(obs_b)
            .zip(&bw[j].v)
            .map(|((&x, &b), &bwv)| x * b * bwv)
            .sum();
        let den: f64 = fw[j].v.iter().zip(&bw[j].v).map(|(&f, &b)| f * b).sum();
        if !(den.is_finite() && den > 0.0) {
            return Err(Error::NonFinite("pair normalisation"));
        }
        Ok(num / den * ((fw[i].log + log_extra) - fw[j].log).exp())
    }

    /// ⟨cos(θ_i − θ_{i+r})⟩ for the embedded observable pair on the open
    /// chain, averaged over all valid origins i.
    pub fn open_correlation(
        &self,
        len: usize,
        r: usize,
        obs_cos: &[f64],
        obs_sin: &[f64],
    ) -> Result<f64> {
        if r == 0 || r >= len {
            return Err(Error::DisplacementTooLarge {
                r,
                max: len.saturating_sub(1),
            });
        }
        let fw = self.forward_chain(len)?;
        let bw = self.backward_chain(len)?;
        let mut total = 0.0;
        let origins = len - r;
        for i in 0..origins {
            total += self.open_pair(&fw, &bw, i, r, obs_cos, obs_cos)?
                + self.open_pair(&fw, &bw, i, r, obs_sin, obs_sin)?;
        }
        Ok(total / origins as f64)
    }

    /// Single-site expectation ⟨a(x_t)⟩ on the open chain.
    pub fn open_site_expectation(&self, len: usize, t: usize, obs: &[f64]) -> Result<f64> {
        let fw = self.forward_chain(len)?;
        let bw = self.backward_chain(len)?;
        let num: f64 = fw[t]
            .v
            .iter()
            .zip(obs)
            .zip(&bw[t].v)
            .map(|((&f, &a), &b)| f * a * b)
            .sum();
        let den: f64 = fw[t].v.iter().zip(&bw[t].v).map(|(&f, &b)| f * b).sum();
        if !(den.is_finite() && den > 0.0) {
            return Err(Error::NonFinite("site expectation"));
        }
        Ok(num / den)
    }

    // Periodic chains go through renormalised matrix powers of
    // M(x, y) = k(x, y) α(y).

    fn transfer_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                m[x * n + y] = self.k[x * n + y] * self.nodes.alpha[y];
            }
        }
        m
    }

    fn mat_mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for x in 0..n {
            for t in 0..n {
                let axt = a[x * n + t];
                if axt == 0.0 {
                    continue;
                }
                let brow = &b[t * n..(t + 1) * n];
                let crow = &mut c[x * n..(x + 1) * n];
                for y in 0..n {
                    crow[y] += axt * brow[y];
                }
            }
        }
        c
    }

    fn renorm_mat(m: &mut [f64]) -> Result<f64> {
        let max = m.iter().cloned().fold(0.0f64, f64::max);
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::NonFinite("matrix power"));
        }
        m.iter_mut().for_each(|x| *x /= max);
        Ok(max.ln())
    }

    /// (M^e, log scale) with per-multiplication renormalisation.
    fn mat_pow(&self, e: usize) -> Result<(Vec<f64>, f64)> {
        let n = self.n;
        let mut result: Vec<f64> = (0..n * n)
            .map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 })
            .collect();
        let mut log = 0.0;
        let mut base = self.transfer_matrix();
        let mut base_log = Self::renorm_mat(&mut base)?;
        let mut exp = e;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mat_mul(&result, &base);
                log += base_log;
                log += Self::renorm_mat(&mut result)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mat_mul(&base, &base);
                base_log *= 2.0;
                base_log += Self::renorm_mat(&mut base)?;
            }
        }
        Ok((result, log))
    }

    /// log Z of the periodic chain with `len` sites (len >= 2).
    pub fn periodic_log_partition(&self, len: usize) -> Result<f64> {
        let (m, log) = self.mat_pow(len)?;
        let trace: f64 = (0..self.n).map(|i| m[i * self.n + i]).sum();
        if !(trace.is_finite() && trace > 0.0) {
            return Err(Error::NonFinite("periodic partition"));
        }
        Ok(trace.ln() + log + self.beta * len as f64)
    }

    /// Mean total energy of the periodic chain: all len bonds are
    /// equivalent, including the doubled pair at len = 2.
    pub fn periodic_mean_energy(&self, len: usize) -> Result<f64> {
        let n = self.n;
        let (p, _) = self.mat_pow(len - 1)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for x in 0..n {
            for y in 0..n {
                let path = self.k[x * n + y] * self.nodes.alpha[y] * p[y * n + x];
                den += path;
                num += self.cos_diff[x * n + y] * path;
            }
        }
        if !(den.is_finite() && den > 0.0) {
            return Err(Error::NonFinite("periodic energy"));
        }
        Ok(-self.beta * len as f64 * (num / den))
    }

    /// ⟨a(x_0) b(x_r)⟩ on the periodic chain.
    fn periodic_pair(&self, len: usize, r: usize, obs_a: &[f64], obs_b: &[f64]) -> Result<f64> {
        let n = self.n;
        let (mr, log_r) = self.mat_pow(r)?;
        let (ml, log_l) = self.mat_pow(len - r)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for x in 0..n {
            for y in 0..n {
                let path = mr[x * n + y] * ml[y * n + x];
                den += path;
                num += obs_a[x] * obs_b[y] * path;
            }
        }
        let _ = (log_r, log_l); // numerator and denominator share both scales
        if !(den.is_finite() && den > 0.0) {
            return Err(Error::NonFinite("periodic pair"));
        }
        Ok(num / den)
    }

    /// ⟨cos(θ_0 − θ_r)⟩ for embedded observables on the periodic chain.
    pub fn periodic_correlation(
        &self,
        len: usize,
        r: usize,
        obs_cos: &[f64],
        obs_sin: &[f64],
    ) -> Result<f64> {
        if r == 0 || r > len / 2 {
            return Err(Error::DisplacementTooLarge { r, max: len / 2 });
        }
        Ok(self.periodic_pair(len, r, obs_cos, obs_cos)?
            + self.periodic_pair(len, r, obs_sin, obs_sin)?)
    }

    /// Fully log-space constrained propagation: site t contributes only
    /// nodes whose arc label matches `masks[t]` (None = unconstrained).
    /// Returns ln of the (unnormalised) partial at `upto`, propagated from
    /// the given end, with masks applied to all sites strictly before
    /// `upto` in propagation order but not to `upto` itself.
    fn masked_partial(
        &self,
        masks: &[Option<usize>],
        upto: usize,
        from_left: bool,
    ) -> Result<Vec<f64>> {
        let n = self.n;
        let len = masks.len();
        let site_seq: Vec<usize> = if from_left {
            (0..upto).collect()
        } else {
            ((upto + 1)..len).rev().collect()
        };
        // ln α per node, with the first propagated site's mask applied.
        let neg_inf = f64::NEG_INFINITY;
        let allowed = |t: usize, node: usize| -> bool {
            masks[t].is_none_or(|l| self.nodes.label_of[node] == l)
        };
        let mut ln_v: Vec<f64> = if let Some(&first) = site_seq.first() {
            (0..n)
                .map(|x| {
                    if allowed(first, x) {
                        self.nodes.alpha[x].ln()
                    } else {
                        neg_inf
                    }
                })
                .collect()
        } else {
            // No conditioning sites on this side: free boundary.
            return Ok(vec![0.0; n]);
        };

        for step in 0..site_seq.len() {
            // Propagate onto the next site in the sequence (another
            // conditioning site, or `upto` on the last step).
            let next_t = site_seq.get(step + 1).copied();
            let mut ln_w = vec![neg_inf; n];
            for y in 0..n {
                match next_t {
                    Some(nt) if !allowed(nt, y) => continue,
                    _ => {}
                }
                let mut m = neg_inf;
                for x in 0..n {
                    if ln_v[x] == neg_inf {
                        continue;
                    }
                    let e = self.beta * (self.cos_diff[x * n + y] - 1.0) + ln_v[x];
                    if e > m {
                        m = e;
                    }
                }
                if m == neg_inf {
                    continue;
                }
                let mut s = 0.0;
                for x in 0..n {
                    if ln_v[x] == neg_inf {
                        continue;
                    }
                    s += (self.beta * (self.cos_diff[x * n + y] - 1.0) + ln_v[x] - m).exp();
                }
                // α of the landing site; for the final step the target is
                // `upto`, whose own α is applied by the caller.
                let alpha = if next_t.is_some() {
                    self.nodes.alpha[y].ln()
                } else {
                    0.0
                };
                ln_w[y] = m + s.ln() + alpha;
            }
            let max = ln_w.iter().cloned().fold(neg_inf, f64::max);
            if max == neg_inf {
                return Err(Error::NonFinite("constrained propagation"));
            }
            ln_w.iter_mut().for_each(|x| *x -= max);
            ln_v = ln_w;
        }
        Ok(ln_v)
    }

    /// Conditional label distribution at `site` on the open chain, given arc
    /// labels at every other site.
    pub fn constrained_conditional(
        &self,
        masks: &[Option<usize>],
        site: usize,
    ) -> Result<Vec<f64>> {
        let n = self.n;
        let left = self.masked_partial(masks, site, true)?;
        let right = self.masked_partial(masks, site, false)?;
        let mut by_label = vec![0.0f64; self.nodes.q];
        let combined: Vec<f64> = (0..n)
            .map(|x| left[x] + right[x] + self.nodes.alpha[x].ln())
            .collect();
        let max = combined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonFinite("conditional table"));
        }
        for x in 0..n {
            by_label[self.nodes.label_of[x] - 1] += (combined[x] - max).exp();
        }
        let total: f64 = by_label.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NonFinite("conditional normalisation"));
        }
        by_label.iter_mut().for_each(|p| *p /= total);
        Ok(by_label)
    }
}

/// Embedded-angle observables (cos, sin of the clock angle of each node's
/// label) used for label correlations.
pub fn label_observables(nodes: &NodeSet) -> (Vec<f64>, Vec<f64>) {
    let cos: Vec<f64> = nodes
        .label_of
        .iter()
        .map(|&l| clock_angle(l, nodes.q).cos())
        .collect();
    let sin: Vec<f64> = nodes
        .label_of
        .iter()
        .map(|&l| clock_angle(l, nodes.q).sin())
        .collect();
    (cos, sin)
}

/// cos/sin of the node angles themselves (the continuous spin observable).
pub fn angle_observables(nodes: &NodeSet) -> (Vec<f64>, Vec<f64>) {
    (
        nodes.angles.iter().map(|&a| a.cos()).collect(),
        nodes.angles.iter().map(|&a| a.sin()).collect(),
    )
}

/// Correlation displacements reported by the chain oracles.
pub fn displacement_range(len: usize, boundary: Boundary) -> Vec<usize> {
    let max = match boundary {
        Boundary::Periodic => len / 2,
        Boundary::Open => len.saturating_sub(1),
    };
    (1..=max.min(8)).collect()
}
