//! Aggregating discrete opinion ratings into quality scores.
//!
//! Alongside the mean opinion score (MOS) and the mean of the N lowest
//! ratings, this crate estimates a latent continuous score per sample. Each
//! rater is modelled as holding a score drawn from `N(mu, sigma)` and
//! reporting the nearest category on a `1..=K` scale. Fitting `(mu, sigma)`
//! to the observed rating histogram gives `mu` as the sample's
//! representative value. Unlike the MOS it is not pulled toward the middle
//! of the scale by the end categories, and it can fall outside `[1, K]`.
//!
//! ```
//! use latent_mos::{fit, FitConfig, RatingSet};
//!
//! let set = RatingSet::five_point("utt-17", vec![3, 5, 5, 5, 5, 5, 5, 5]).unwrap();
//! let res = fit(&set, &FitConfig::default()).unwrap();
//! assert_eq!(set.mos(), 4.75);
//! assert!(res.representative > 5.0);
//! ```
//!
//! Modules:
//! - [`ratings`]: rating sets, MOS, N-lowest MOS, histograms
//! - [`latent`]: the quantized normal model and the CDF-L1 distance
//! - [`fit`]: the regularized fit with best-iterate and fallback rules
//! - [`metrics`]: LCC, SRCC, preference screening and ppref
//! - [`synth`]: simulated raters for validating estimators
//! - [`io`]: the CSV/JSONL file formats
//!
//! The guide in `book/` walks through the model; its code listings run as
//! doctests of this crate.

pub mod error;
pub mod fit;
pub mod io;
pub mod latent;
pub mod metrics;
pub mod nelder_mead;
pub mod normal;
pub mod ratings;
pub mod synth;

pub use error::{Error, RecordError, Result};
pub use fit::{fit, fit_distribution, fit_traced, loss, FitConfig, FitOutcome, FitResult};
pub use latent::{cdf_l1_distance, quantized_pmf, LatentParams, QuantizedPmf};
pub use metrics::{lcc, ppref, screen_preferences, srcc, PreferenceAnnotation, PreferencePair, ScoredSample, Vote};
pub use ratings::{EmpiricalStats, RatingSet, RelFreq};
pub use synth::{generate_dataset, SynthConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ratings.md")]
    mod ratings {}
    #[doc = include_str!("../../../book/src/latent-model.md")]
    mod latent_model {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
