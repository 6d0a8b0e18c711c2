//! Per-sample rating data and the classical aggregators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scale maximum of the usual 5-point absolute category rating.
pub const DEFAULT_SCALE_MAX: u32 = 5;

/// The discrete ratings one sample received, on the scale `1..=scale_max`.
///
/// Construction validates every rating; a `RatingSet` in hand is always
/// non-empty and in range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSet {
    sample_id: String,
    ratings: Vec<u32>,
    scale_max: u32,
}

impl RatingSet {
    pub fn new(sample_id: impl Into<String>, ratings: Vec<u32>, scale_max: u32) -> Result<Self> {
        let sample_id = sample_id.into();
        if scale_max < 2 {
            return Err(Error::InvalidScale(scale_max));
        }
        if ratings.is_empty() {
            return Err(Error::EmptyRatings { sample_id });
        }
        if let Some(&bad) = ratings.iter().find(|&&r| r < 1 || r > scale_max) {
            return Err(Error::RatingOutOfRange {
                sample_id,
                value: i64::from(bad),
                scale_max,
            });
        }
        Ok(Self {
            sample_id,
            ratings,
            scale_max,
        })
    }

    /// Same as [`RatingSet::new`] on the default 1..=5 scale.
    pub fn five_point(sample_id: impl Into<String>, ratings: Vec<u32>) -> Result<Self> {
        Self::new(sample_id, ratings, DEFAULT_SCALE_MAX)
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn ratings(&self) -> &[u32] {
        &self.ratings
    }

    pub fn scale_max(&self) -> u32 {
        self.scale_max
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    fn sum(&self) -> u64 {
        self.ratings.iter().map(|&r| u64::from(r)).sum()
    }

    /// Mean opinion score: the arithmetic mean of the ratings.
    pub fn mos(&self) -> f64 {
        self.sum() as f64 / self.len() as f64
    }

    /// Mean of the `n` lowest ratings.
    ///
    /// `n` must lie in `1..=len()`; larger values are an error rather than
    /// being clamped.
    pub fn n_low_mos(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidLowestCount {
                requested: n,
                available: self.len(),
            });
        }
        let mut sorted = self.ratings.clone();
        sorted.sort_unstable();
        let sum: u64 = sorted[..n].iter().map(|&r| u64::from(r)).sum();
        Ok(sum as f64 / n as f64)
    }

    /// Relative frequency of each rating value.
    pub fn rel_freq(&self) -> RelFreq {
        let mut counts = vec![0usize; self.scale_max as usize];
        for &r in &self.ratings {
            counts[(r - 1) as usize] += 1;
        }
        let n = self.len() as f64;
        RelFreq {
            mass: counts.into_iter().map(|c| c as f64 / n).collect(),
        }
    }

    /// Mean and population standard deviation of the ratings.
    pub fn empirical_stats(&self) -> EmpiricalStats {
        let mean = self.mos();
        let var = self
            .ratings
            .iter()
            .map(|&r| {
                let d = f64::from(r) - mean;
                d * d
            })
            .sum::<f64>()
            / self.len() as f64;
        EmpiricalStats {
            mean,
            stddev: var.sqrt(),
        }
    }

    /// The shared value when every rating is identical.
    pub fn constant_value(&self) -> Option<u32> {
        let first = self.ratings[0];
        self.ratings.iter().all(|&r| r == first).then_some(first)
    }
}

/// Relative frequency of ratings over the scale; entry `k - 1` holds the
/// share of rating `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelFreq {
    mass: Vec<f64>,
}

impl RelFreq {
    /// Sum tolerance accepted by [`RelFreq::new`].
    pub const SUM_TOLERANCE: f64 = 1e-9;

    /// Builds a distribution from explicit masses, e.g. an analytic histogram.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::InvalidScale(mass.len() as u32));
        }
        if mass.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("relative frequency"));
        }
        if mass.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidParameter(
                "relative frequencies must be non-negative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "relative frequencies must sum to 1, got {total}"
            )));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn scale_max(&self) -> u32 {
        self.mass.len() as u32
    }

    /// Mean and population standard deviation of the distribution.
    pub fn stats(&self) -> EmpiricalStats {
        let mean: f64 = self
            .mass
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum();
        let var: f64 = self
            .mass
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (i + 1) as f64 - mean;
                p * d * d
            })
            .sum();
        EmpiricalStats {
            mean,
            stddev: var.sqrt(),
        }
    }

    /// The rating holding all of the mass, if any.
    pub fn point_mass(&self) -> Option<u32> {
        let nonzero: Vec<usize> = (0..self.mass.len()).filter(|&i| self.mass[i] > 0.0).collect();
        match nonzero.as_slice() {
            [only] => Some(*only as u32 + 1),
            _ => None,
        }
    }
}

impl AsRef<[f64]> for RelFreq {
    fn as_ref(&self) -> &[f64] {
        &self.mass
    }
}

/// Mean (the MOS) and population standard deviation of observed ratings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub mean: f64,
    pub stddev: f64,
}
