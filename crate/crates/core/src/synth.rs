//! Synthetic raters following the quantized latent normal model.
//!
//! Each simulated rater draws a latent score `u ~ N(mu*, sigma*)` and reports
//! `clamp(round(u), 1, K)`. Rounding is half away from zero; ties sit on bin
//! edges and have probability zero.
//!
//! # Random streams
//!
//! Sample `i` of a run with seed `s` draws from ChaCha8 keyed with the
//! little-endian bytes of `s` (zero padded to 32 bytes), stream number `i`,
//! starting at word position 0. A uniform draw takes the top 52 bits of one
//! `next_u64` output as `(m + 0.5) / 2^52`, which lies strictly inside
//! `(0, 1)`, and is mapped through the normal quantile. Nothing here depends
//! on platform or on sample scheduling, so datasets are byte-for-byte
//! reproducible and can be generated in parallel.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit, FitConfig};
use crate::normal;
use crate::ratings::{RatingSet, DEFAULT_SCALE_MAX};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub mu_star: f64,
    pub sigma_star: f64,
    /// Ratings per sample.
    pub n_ratings: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub scale_max: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            mu_star: 3.0,
            sigma_star: 1.0,
            n_ratings: 8,
            n_samples: 1,
            seed: 0,
            scale_max: DEFAULT_SCALE_MAX,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_latent(self.mu_star, self.sigma_star)?;
        if self.n_ratings == 0 {
            return Err(Error::InvalidParameter("n_ratings must be at least 1".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        if self.scale_max < 2 {
            return Err(Error::InvalidScale(self.scale_max));
        }
        Ok(())
    }
}

fn check_latent(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::NonFinite("mu_star"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_star must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// The random stream used for sample `index` of a run seeded with `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn unit_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((rng.next_u64() >> 12) as f64 + 0.5) * SCALE
}

/// One simulated rating: a latent normal score rounded to the nearest
/// category and clamped to `1..=scale_max`.
///
/// `sigma` must be positive.
pub fn sample_rating<R: RngCore + ?Sized>(mu: f64, sigma: f64, scale_max: u32, rng: &mut R) -> u32 {
    debug_assert!(sigma > 0.0, "sigma must be positive");
    let latent = mu + sigma * normal::quantile(unit_open(rng));
    latent.round().clamp(1.0, f64::from(scale_max)) as u32
}

/// A simulated sample with the latent parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub ratings: RatingSet,
    pub mu_star: f64,
    pub sigma_star: f64,
}

/// `cfg.n_samples` rating sets of `cfg.n_ratings` draws each.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<Vec<RatingSet>> {
    Ok(generate_grid(cfg, &[cfg.mu_star], &[cfg.sigma_star])?
        .into_iter()
        .map(|s| s.ratings)
        .collect())
}

/// Generates `cfg.n_samples` samples for every `(mu*, sigma*)` cell of the
/// grid, ignoring `cfg.mu_star` and `cfg.sigma_star`. Cells are visited with
/// `mus` outermost; sample ids and stream numbers run on across cells.
pub fn generate_grid(cfg: &SynthConfig, mus: &[f64], sigmas: &[f64]) -> Result<Vec<SyntheticSample>> {
    cfg.validate()?;
    if mus.is_empty() || sigmas.is_empty() {
        return Err(Error::InvalidParameter("grid axes must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(mus.len() * sigmas.len() * cfg.n_samples);
    for &mu in mus {
        for &sigma in sigmas {
            check_latent(mu, sigma)?;
            for _ in 0..cfg.n_samples {
                let index = out.len() as u64;
                let mut rng = sample_stream(cfg.seed, index);
                let ratings = (0..cfg.n_ratings)
                    .map(|_| sample_rating(mu, sigma, cfg.scale_max, &mut rng))
                    .collect();
                out.push(SyntheticSample {
                    ratings: RatingSet::new(format!("synth-{index:06}"), ratings, cfg.scale_max)?,
                    mu_star: mu,
                    sigma_star: sigma,
                });
            }
        }
    }
    Ok(out)
}

/// Per-cell error of the latent estimate and of the MOS against `mu*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorCell {
    pub mu_star: f64,
    pub sigma_star: f64,
    pub mae_latent: f64,
    pub mae_mos: f64,
}

impl EstimatorCell {
    /// Cells where the latent estimate is expected to beat the MOS: means
    /// near the ends of the scale, where clamping biases the MOS toward the
    /// center, with enough spread for the clamping to matter.
    pub fn expects_latent_advantage(&self) -> bool {
        !(2.0..=4.0).contains(&self.mu_star) && self.sigma_star >= 0.7
    }

    pub fn latent_not_worse(&self) -> bool {
        self.mae_latent <= self.mae_mos
    }
}

/// Simulates every grid cell and compares mean absolute errors of the
/// fitted latent mean and of the MOS against the true `mu*`.
pub fn compare_estimators(
    cfg: &SynthConfig,
    mus: &[f64],
    sigmas: &[f64],
    fit_cfg: &FitConfig,
) -> Result<Vec<EstimatorCell>> {
    let samples = generate_grid(cfg, mus, sigmas)?;
    samples
        .chunks(cfg.n_samples)
        .map(|cell| {
            let (mut latent, mut mos) = (0.0, 0.0);
            for s in cell {
                latent += (fit(&s.ratings, fit_cfg)?.representative - s.mu_star).abs();
                mos += (s.ratings.mos() - s.mu_star).abs();
            }
            let n = cell.len() as f64;
            Ok(EstimatorCell {
                mu_star: cell[0].mu_star,
                sigma_star: cell[0].sigma_star,
                mae_latent: latent / n,
                mae_mos: mos / n,
            })
        })
        .collect()
}

/// Quotas and gap window for choosing A/B listening-test pairs by MOS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampling {
    pub min_gap: f64,
    pub max_gap: f64,
    /// Pairs with at least one sample at or below `low_mos`.
    pub low_quota: usize,
    /// Pairs with at least one sample at or above `high_mos`.
    pub high_quota: usize,
    /// Pairs with both samples strictly between the two thresholds.
    pub mid_quota: usize,
    pub low_mos: f64,
    pub high_mos: f64,
}

impl Default for PairSampling {
    fn default() -> Self {
        Self {
            min_gap: 0.5,
            max_gap: 1.0,
            low_quota: 50,
            high_quota: 50,
            mid_quota: 50,
            low_mos: 2.0,
            high_mos: 4.0,
        }
    }
}

/// Picks candidate comparison pairs whose MOS differ by an amount in
/// `[min_gap, max_gap]`, filling each MOS band up to its quota.
///
/// `samples` holds `(sample_id, mos)`. The selection is a deterministic
/// function of `seed`. Bands that lack candidates return fewer pairs.
pub fn select_comparison_pairs(
    samples: &[(String, f64)],
    rule: &PairSampling,
    seed: u64,
) -> Vec<(String, String)> {
    let mut bands: [Vec<(usize, usize)>; 3] = Default::default();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let (a, b) = (samples[i].1, samples[j].1);
            let gap = (a - b).abs();
            if gap < rule.min_gap || gap > rule.max_gap {
                continue;
            }
            let band = if a <= rule.low_mos || b <= rule.low_mos {
                0
            } else if a >= rule.high_mos || b >= rule.high_mos {
                1
            } else {
                2
            };
            bands[band].push((i, j));
        }
    }
    let quotas = [rule.low_quota, rule.high_quota, rule.mid_quota];
    let mut out = Vec::new();
    for (stream, (band, quota)) in bands.iter_mut().zip(quotas).enumerate() {
        let mut rng = sample_stream(seed, stream as u64);
        shuffle(band, &mut rng);
        out.extend(
            band.iter()
                .take(quota)
                .map(|&(i, j)| (samples[i].0.clone(), samples[j].0.clone())),
        );
    }
    out
}

fn shuffle<T, R: RngCore>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Uniform integer in `0..n` by rejection.
fn below<R: RngCore>(rng: &mut R, n: u64) -> u64 {
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % n;
        }
    }
}
