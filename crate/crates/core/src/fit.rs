//! Fitting the quantized latent normal to observed ratings.
//!
//! The loss for parameters `(mu, sigma)` is
//!
//! ```text
//! L = D(pmf(mu, sigma), r) + beta * (sigma - sigma0)^2
//! ```
//!
//! where `D` is [`cdf_l1_distance`], `r` the relative frequency of the
//! observed ratings and `sigma0` their population standard deviation.
//!
//! Minimization runs Nelder-Mead over `(mu, ln(sigma - sigma_min))`, which
//! keeps `sigma > sigma_min` at every trial point. Every evaluated point is
//! a candidate; the result is the lowest one seen, including the starting
//! point `(mu0, sigma0)`. When nothing beats the start, the MOS is used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{cdf_l1_distance, cdf_l1_unchecked, fill_masses, LatentParams, DEFAULT_SIGMA_MIN};
use crate::nelder_mead::{self, Termination};
use crate::normal;
use crate::ratings::{EmpiricalStats, RatingSet, RelFreq, DEFAULT_SCALE_MAX};

/// Edge length of the initial simplex in both search coordinates.
pub const INITIAL_STEP: f64 = 0.25;
/// Simplex diameter below which the search stops early.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Weight of the pull of sigma toward the empirical standard deviation.
    pub beta: f64,
    /// Cap on simplex updates.
    pub max_iters: usize,
    /// Strict lower bound on sigma.
    pub sigma_min: f64,
    pub scale_max: u32,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            beta: 0.03,
            max_iters: 100,
            sigma_min: DEFAULT_SIGMA_MIN,
            scale_max: DEFAULT_SCALE_MAX,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.sigma_min.is_finite() && self.sigma_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_min must be finite and positive, got {}",
                self.sigma_min
            )));
        }
        if self.scale_max < 2 {
            return Err(Error::InvalidScale(self.scale_max));
        }
        Ok(())
    }
}

/// How a fit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOutcome {
    /// Some visited point had a lower loss than the start.
    Improved,
    /// No visited point beat the start; the MOS is reported.
    NoImprovement,
    /// All ratings were identical; that rating is reported and no search ran.
    Degenerate,
    /// The loss became non-finite and the search was abandoned; the MOS is reported.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Lowest-loss point visited. `None` for degenerate rating sets.
    pub params: Option<LatentParams>,
    /// Lowest loss observed. Zero for degenerate sets, the limit as sigma
    /// shrinks to zero around the shared rating.
    pub loss: f64,
    /// Loss at the starting point.
    pub initial_loss: f64,
    pub iterations_run: usize,
    /// Number of loss evaluations, including the starting simplex.
    pub evaluations: usize,
    /// Iteration at which the best point was first evaluated (0 = initial simplex).
    pub best_iteration: usize,
    pub fell_back: bool,
    pub outcome: FitOutcome,
    /// The fitted mean, or the fallback value.
    pub representative: f64,
}

/// One loss evaluation made during a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub iteration: usize,
    pub mu: f64,
    pub sigma: f64,
    pub loss: f64,
}

/// Regularized CDF-L1 loss of `params` against an observed distribution.
pub fn loss(
    params: &LatentParams,
    observed: &RelFreq,
    stats: &EmpiricalStats,
    cfg: &FitConfig,
) -> Result<f64> {
    check_scale(observed, cfg)?;
    let mut model = vec![0.0; observed.mass().len()];
    fill_masses(params.mu(), params.sigma(), &mut model);
    let d = cdf_l1_distance(&model, observed.mass())?;
    Ok(d + regularizer(params.sigma(), stats.stddev, cfg.beta))
}

/// Gradient of [`loss`] with respect to `(mu, sigma)`.
///
/// The distance term is piecewise smooth; at a kink (a model CDF value
/// exactly equal to the observed one) that term contributes zero.
pub fn loss_gradient(
    params: &LatentParams,
    observed: &RelFreq,
    stats: &EmpiricalStats,
    cfg: &FitConfig,
) -> Result<[f64; 2]> {
    check_scale(observed, cfg)?;
    let (mu, sigma) = (params.mu(), params.sigma());
    let mut observed_cdf = 0.0;
    let mut grad = [0.0, 2.0 * cfg.beta * (sigma - stats.stddev)];
    let k_max = observed.mass().len();
    // The last cumulative value is 1 on both sides and carries no gradient.
    for (k, &m) in observed.mass()[..k_max - 1].iter().enumerate() {
        observed_cdf += m;
        let z = ((k + 1) as f64 + 0.5 - mu) / sigma;
        let diff = normal::cdf(z) - observed_cdf;
        let sign = if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            -1.0
        } else {
            0.0
        };
        let density = normal::pdf(z);
        grad[0] -= sign * density / sigma;
        grad[1] -= sign * density * z / sigma;
    }
    Ok(grad)
}

/// Fits one sample's ratings.
///
/// Identical ratings short-circuit to that rating. Otherwise the search
/// starts at the sample's mean and population standard deviation.
///
/// ```
/// use latent_mos::{fit, FitConfig, RatingSet};
///
/// let set = RatingSet::five_point("utt-1", vec![3, 3, 4, 4, 4, 4, 5, 5]).unwrap();
/// let res = fit(&set, &FitConfig::default()).unwrap();
/// assert!(!res.fell_back);
/// assert!(res.loss < res.initial_loss);
/// ```
pub fn fit(ratings: &RatingSet, cfg: &FitConfig) -> Result<FitResult> {
    run(&ratings.rel_freq(), &ratings.empirical_stats(), cfg, None)
}

/// Like [`fit`], also returning every loss evaluation in order.
pub fn fit_traced(ratings: &RatingSet, cfg: &FitConfig) -> Result<(FitResult, Vec<Evaluation>)> {
    let mut trace = Vec::new();
    let res = run(&ratings.rel_freq(), &ratings.empirical_stats(), cfg, Some(&mut trace))?;
    Ok((res, trace))
}

/// Fits a distribution given directly as relative frequencies, e.g. an
/// analytic histogram. The starting point is the distribution's own mean
/// and standard deviation.
pub fn fit_distribution(observed: &RelFreq, cfg: &FitConfig) -> Result<FitResult> {
    run(observed, &observed.stats(), cfg, None)
}

fn run(
    observed: &RelFreq,
    stats: &EmpiricalStats,
    cfg: &FitConfig,
    mut trace: Option<&mut Vec<Evaluation>>,
) -> Result<FitResult> {
    cfg.validate()?;
    check_scale(observed, cfg)?;

    if let Some(value) = observed.point_mass() {
        return Ok(FitResult {
            params: None,
            loss: 0.0,
            initial_loss: 0.0,
            iterations_run: 0,
            evaluations: 0,
            best_iteration: 0,
            fell_back: true,
            outcome: FitOutcome::Degenerate,
            representative: f64::from(value),
        });
    }

    let mu0 = stats.mean;
    // A very large, nearly constant sample can have sigma0 at or below the
    // bound; start just inside the feasible region then.
    let sigma0 = stats.stddev.max(2.0 * cfg.sigma_min);
    let to_sigma = |t: f64| {
        let s = cfg.sigma_min + t.exp();
        if s > cfg.sigma_min {
            s
        } else {
            cfg.sigma_min * (1.0 + f64::EPSILON)
        }
    };

    let mut model = vec![0.0; observed.mass().len()];
    let mut objective = |mu: f64, sigma: f64| {
        fill_masses(mu, sigma, &mut model);
        cdf_l1_unchecked(&model, observed.mass()) + regularizer(sigma, stats.stddev, cfg.beta)
    };

    let initial_loss = objective(mu0, sigma0);
    let mut best = (mu0, sigma0, initial_loss, 0usize);
    if let Some(t) = trace.as_deref_mut() {
        t.push(Evaluation {
            iteration: 0,
            mu: mu0,
            sigma: sigma0,
            loss: initial_loss,
        });
    }

    let report = if initial_loss.is_finite() {
        Some(nelder_mead::minimize(
            |iteration, x| {
                let (mu, sigma) = (x[0], to_sigma(x[1]));
                let value = objective(mu, sigma);
                if let Some(t) = trace.as_deref_mut() {
                    t.push(Evaluation {
                        iteration,
                        mu,
                        sigma,
                        loss: value,
                    });
                }
                if value < best.2 {
                    best = (mu, sigma, value, iteration);
                }
                value
            },
            &[mu0, (sigma0 - cfg.sigma_min).ln()],
            &[INITIAL_STEP, INITIAL_STEP],
            nelder_mead::Options {
                max_iters: cfg.max_iters,
                tolerance: CONVERGENCE_TOLERANCE,
            },
        ))
    } else {
        None
    };

    let (iterations_run, evaluations, aborted) = match &report {
        Some(r) => (
            r.iterations,
            r.evaluations + 1,
            r.termination == Termination::NonFinite,
        ),
        None => (0, 1, true),
    };
    let (mu, sigma, best_loss, best_iteration) = best;
    let outcome = if aborted {
        FitOutcome::NonFinite
    } else if best_loss < initial_loss {
        FitOutcome::Improved
    } else {
        FitOutcome::NoImprovement
    };
    let fell_back = outcome != FitOutcome::Improved;

    Ok(FitResult {
        params: LatentParams::new(mu, sigma, cfg.sigma_min).ok(),
        loss: best_loss,
        initial_loss,
        iterations_run,
        evaluations,
        best_iteration,
        fell_back,
        outcome,
        representative: if fell_back { mu0 } else { mu },
    })
}

#[inline]
fn regularizer(sigma: f64, sigma0: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        0.0
    } else {
        beta * (sigma - sigma0) * (sigma - sigma0)
    }
}

fn check_scale(observed: &RelFreq, cfg: &FitConfig) -> Result<()> {
    if observed.scale_max() != cfg.scale_max {
        return Err(Error::InvalidParameter(format!(
            "ratings use scale 1..={} but the fit is configured for 1..={}",
            observed.scale_max(),
            cfg.scale_max
        )));
    }
    Ok(())
}
