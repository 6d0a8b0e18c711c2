//! The quantized latent normal model.
//!
//! A rater is assumed to hold a continuous score `u ~ N(mu, sigma)` and to
//! report the nearest category. Rating `k` therefore collects the latent
//! mass on `(k - 0.5, k + 0.5]`, with the two end categories absorbing the
//! tails: `(-inf, 1.5]` and `(K - 0.5, inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// Default strict lower bound on the latent standard deviation.
pub const DEFAULT_SIGMA_MIN: f64 = 1e-5;

/// Mean and standard deviation of the latent score distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentParams {
    mu: f64,
    sigma: f64,
}

impl LatentParams {
    /// Fails unless both values are finite and `sigma > sigma_min`.
    pub fn new(mu: f64, sigma: f64, sigma_min: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::NonFinite("mu"));
        }
        if !sigma.is_finite() {
            return Err(Error::NonFinite("sigma"));
        }
        if sigma <= sigma_min {
            return Err(Error::InvalidParameter(format!(
                "sigma must exceed {sigma_min}, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Probability of each rating under a quantized latent normal; entry
/// `k - 1` holds rating `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedPmf {
    mass: Vec<f64>,
}

impl QuantizedPmf {
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Running sums of the mass; the last entry is 1.
    pub fn cumulative(&self) -> Vec<f64> {
        cumulative(&self.mass)
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }
}

impl AsRef<[f64]> for QuantizedPmf {
    fn as_ref(&self) -> &[f64] {
        &self.mass
    }
}

/// Rating distribution induced by quantizing `N(mu, sigma)` to `1..=scale_max`.
///
/// ```
/// use latent_mos::latent::{quantized_pmf, LatentParams};
///
/// let p = LatentParams::new(3.0, 1.0, 1e-5).unwrap();
/// let pmf = quantized_pmf(&p, 5).unwrap();
/// assert!((pmf.mass()[2] - 0.382_924_922_548_026).abs() < 1e-12);
/// assert_eq!(pmf.mass()[0], pmf.mass()[4]);
/// ```
pub fn quantized_pmf(params: &LatentParams, scale_max: u32) -> Result<QuantizedPmf> {
    if scale_max < 2 {
        return Err(Error::InvalidScale(scale_max));
    }
    if !params.mu.is_finite() || !params.sigma.is_finite() {
        return Err(Error::NonFinite("latent parameters"));
    }
    let mut mass = vec![0.0; scale_max as usize];
    fill_masses(params.mu, params.sigma, &mut mass);
    Ok(QuantizedPmf { mass })
}

/// Writes the quantized masses for `N(mu, sigma)` into `out`, whose length
/// sets the scale maximum.
pub(crate) fn fill_masses(mu: f64, sigma: f64, out: &mut [f64]) {
    let k_max = out.len();
    // Standardized bin edges; edge i separates rating i+1 from i+2.
    let edge = |i: usize| ((i + 1) as f64 + 0.5 - mu) / sigma;
    for (k, slot) in out.iter_mut().enumerate() {
        let lo = if k == 0 { f64::NEG_INFINITY } else { edge(k - 1) };
        let hi = if k + 1 == k_max { f64::INFINITY } else { edge(k) };
        // Difference taken in whichever tail keeps both terms small.
        let m = if lo >= 0.0 {
            normal::cdf(-lo) - normal::cdf(-hi)
        } else {
            normal::cdf(hi) - normal::cdf(lo)
        };
        *slot = m.max(0.0);
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        out.iter_mut().for_each(|m| *m /= total);
    }
}

fn cumulative(mass: &[f64]) -> Vec<f64> {
    mass.iter()
        .scan(0.0, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect()
}

/// L1 distance between the cumulative sums of two rating distributions.
///
/// On a line of unit-spaced categories this is the earth mover's distance.
/// Both inputs are expected to sum to one.
///
/// ```
/// use latent_mos::latent::cdf_l1_distance;
/// let d = cdf_l1_distance(&[1.0, 0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
/// assert_eq!(d, 4.0);
/// ```
pub fn cdf_l1_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cdf_l1_unchecked(a, b))
}

#[inline]
pub(crate) fn cdf_l1_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let (mut ha, mut hb, mut d) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        ha += x;
        hb += y;
        d += (ha - hb).abs();
    }
    d
}
