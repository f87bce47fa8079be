//! Observable series with batch-mean error bars, plus the two-sample
//! Kolmogorov–Smirnov distance used by the bistability experiments.

use crate::error::{Error, Result};
use crate::fmt::sig12;

/// Per-sweep measurements of one observable with batch-mean statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub batch_count: usize,
    pub batch_size: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl ObservableSeries {
    pub const MIN_BATCHES: usize = 16;

    /// Split `values` into `batch_count` equal batches (a tail remainder is
    /// dropped) and estimate the mean and its standard error from the batch
    /// means.
    pub fn from_values(
        name: impl Into<String>,
        values: Vec<f64>,
        batch_count: usize,
    ) -> Result<Self> {
        if batch_count < Self::MIN_BATCHES {
            return Err(Error::InvalidParameter(format!(
                "need at least {} batches, got {batch_count}",
                Self::MIN_BATCHES
            )));
        }
        if values.len() < batch_count {
            return Err(Error::TooFewPoints {
                min: batch_count,
                got: values.len(),
            });
        }
        let batch_size = values.len() / batch_count;
        let used = batch_size * batch_count;
        let batch_means: Vec<f64> = values[..used]
            .chunks_exact(batch_size)
            .map(|b| b.iter().sum::<f64>() / batch_size as f64)
            .collect();
        let mean = batch_means.iter().sum::<f64>() / batch_count as f64;
        let var =
            batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batch_count - 1) as f64;
        let std_error = (var / batch_count as f64).sqrt();
        Ok(Self {
            name: name.into(),
            values,
            batch_count,
            batch_size,
            mean,
            std_error,
        })
    }

    pub const CSV_HEADER: &'static str = "sweep,value";

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", i, sig12(v)))
    }
}

/// Two-sample Kolmogorov–Smirnov statistic: the maximal gap between the
/// empirical distribution functions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewPoints { min: 1, got: 0 });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.total_cmp(v));
    ys.sort_by(|u, v| u.total_cmp(v));
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        let gap = (i as f64 / xs.len() as f64 - j as f64 / ys.len() as f64).abs();
        sup = sup.max(gap);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn batch_means_recover_the_plain_mean_on_divisible_input() {
        let values: Vec<f64> = (0..320).map(|i| (i % 7) as f64).collect();
        let series = ObservableSeries::from_values("x", values.clone(), 32).unwrap();
        let plain = values.iter().sum::<f64>() / values.len() as f64;
        assert_abs_diff_eq!(series.mean, plain, epsilon = 1e-12);
        assert_eq!(series.batch_size, 10);
    }

    #[test]
    fn constant_series_has_zero_error() {
        let series = ObservableSeries::from_values("c", vec![2.5; 64], 16).unwrap();
        assert_eq!(series.mean, 2.5);
        assert_eq!(series.std_error, 0.0);
    }

    #[test]
    fn error_shrinks_roughly_as_inverse_sqrt_of_length() {
        // Independent uniform draws: s.e. of the mean ~ σ/√N.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draw = |rng: &mut ChaCha8Rng, n: usize| -> f64 {
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            ObservableSeries::from_values("u", values, 32)
                .unwrap()
                .std_error
        };
        let se_small = draw(&mut rng, 2_000);
        let se_large = draw(&mut rng, 32_000);
        let ratio = se_small / se_large;
        assert!(
            (2.0..8.0).contains(&ratio),
            "expected ~4x shrink, got {ratio}"
        );
    }

    #[test]
    fn rejects_too_few_batches_or_points() {
        assert!(ObservableSeries::from_values("x", vec![1.0; 100], 8).is_err());
        assert!(ObservableSeries::from_values("x", vec![1.0; 10], 16).is_err());
    }

    #[test]
    fn ks_distance_known_cases() {
        // Identical samples: distance 0.
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        // Disjoint supports: distance 1.
        let b = [10.0, 11.0, 12.0];
        assert_eq!(ks_distance(&a, &b).unwrap(), 1.0);
        // Half-shifted grids interleave to 1/4.
        let c = [1.0, 2.0, 3.0, 4.0];
        let d = [1.5, 2.5, 3.5, 4.5];
        assert_abs_diff_eq!(ks_distance(&c, &d).unwrap(), 0.25, epsilon = 1e-12);
    }
}
