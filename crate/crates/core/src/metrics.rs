//! Agreement between predicted scores and reference values: Pearson (LCC),
//! Spearman (SRCC), and pairwise preference precision (ppref).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of directional votes the screening rule asks for.
pub const DEFAULT_MIN_AGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub sample_id: String,
    pub score: f64,
}

impl ScoredSample {
    pub fn new(sample_id: impl Into<String>, score: f64) -> Self {
        Self {
            sample_id: sample_id.into(),
            score,
        }
    }
}

/// Pearson linear correlation of id-aligned scores.
pub fn lcc(pred: &[ScoredSample], truth: &[ScoredSample]) -> Result<f64> {
    let (x, y) = align(pred, truth)?;
    pearson(&x, &y)
}

/// Spearman rank correlation of id-aligned scores, with average ranks for ties.
pub fn srcc(pred: &[ScoredSample], truth: &[ScoredSample]) -> Result<f64> {
    let (x, y) = align(pred, truth)?;
    spearman(&x, &y)
}

/// Pairs up scores by sample id, in `truth` order.
fn align(pred: &[ScoredSample], truth: &[ScoredSample]) -> Result<(Vec<f64>, Vec<f64>)> {
    let pred_index = index_scores(pred)?;
    let truth_index = index_scores(truth)?;
    let missing_in_left: Vec<String> = truth
        .iter()
        .filter(|s| !pred_index.contains_key(s.sample_id.as_str()))
        .map(|s| s.sample_id.clone())
        .collect();
    let missing_in_right: Vec<String> = pred
        .iter()
        .filter(|s| !truth_index.contains_key(s.sample_id.as_str()))
        .map(|s| s.sample_id.clone())
        .collect();
    if !missing_in_left.is_empty() || !missing_in_right.is_empty() {
        return Err(Error::IdMismatch {
            missing_in_left,
            missing_in_right,
        });
    }
    let x = truth
        .iter()
        .map(|s| pred_index[s.sample_id.as_str()])
        .collect();
    let y = truth.iter().map(|s| s.score).collect();
    Ok((x, y))
}

fn index_scores(samples: &[ScoredSample]) -> Result<HashMap<&str, f64>> {
    let mut index = HashMap::with_capacity(samples.len());
    for s in samples {
        if !s.score.is_finite() {
            return Err(Error::NonFinite("score"));
        }
        if index.insert(s.sample_id.as_str(), s.score).is_some() {
            return Err(Error::DuplicateId(s.sample_id.clone()));
        }
    }
    Ok(index)
}

/// Pearson correlation of two equal-length vectors.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedMetric(
            "correlation needs at least two samples".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation is undefined for a constant input".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// 1-based ranks; tied values share the mean of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 2) as f64 / 2.0;
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    ranks
}

/// One annotator's answer to "which sample sounds better?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vote {
    #[serde(rename = "A_sure")]
    ASure,
    #[serde(rename = "A_unsure")]
    AUnsure,
    #[serde(rename = "B_unsure")]
    BUnsure,
    #[serde(rename = "B_sure")]
    BSure,
}

impl Vote {
    pub fn as_str(self) -> &'static str {
        match self {
            Vote::ASure => "A_sure",
            Vote::AUnsure => "A_unsure",
            Vote::BUnsure => "B_unsure",
            Vote::BSure => "B_sure",
        }
    }
}

impl FromStr for Vote {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A_sure" => Ok(Vote::ASure),
            "A_unsure" => Ok(Vote::AUnsure),
            "B_unsure" => Ok(Vote::BUnsure),
            "B_sure" => Ok(Vote::BSure),
            other => Err(Error::InvalidParameter(format!(
                "unknown vote `{other}` (expected A_sure, A_unsure, B_unsure or B_sure)"
            ))),
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw votes collected for one A/B question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceAnnotation {
    pair_id: String,
    id_a: String,
    id_b: String,
    votes: Vec<Vote>,
}

impl PreferenceAnnotation {
    pub fn new(
        pair_id: impl Into<String>,
        id_a: impl Into<String>,
        id_b: impl Into<String>,
        votes: Vec<Vote>,
    ) -> Result<Self> {
        let (pair_id, id_a, id_b) = (pair_id.into(), id_a.into(), id_b.into());
        if id_a == id_b {
            return Err(Error::InvalidParameter(format!(
                "pair `{pair_id}` compares `{id_a}` with itself"
            )));
        }
        if votes.is_empty() {
            return Err(Error::InvalidParameter(format!("pair `{pair_id}` has no votes")));
        }
        Ok(Self {
            pair_id,
            id_a,
            id_b,
            votes,
        })
    }

    pub fn pair_id(&self) -> &str {
        &self.pair_id
    }

    pub fn id_a(&self) -> &str {
        &self.id_a
    }

    pub fn id_b(&self) -> &str {
        &self.id_b
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    /// A is better than B.
    #[serde(rename = "A")]
    AOverB,
    /// B is better than A.
    #[serde(rename = "B")]
    BOverA,
}

impl Preference {
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::AOverB => "A",
            Preference::BOverA => "B",
        }
    }
}

impl FromStr for Preference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" => Ok(Preference::AOverB),
            "B" => Ok(Preference::BOverA),
            other => Err(Error::InvalidParameter(format!(
                "unknown preference label `{other}` (expected A or B)"
            ))),
        }
    }
}

/// A binary ordering label that survived screening.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub id_a: String,
    pub id_b: String,
    pub label: Preference,
}

/// Keeps questions with a clear majority direction.
///
/// A is labelled better when at least `min_agree` annotators chose A (sure
/// or not) and nobody chose "B (sure)"; the mirrored rule labels B. Other
/// questions, and those where both rules hold, are dropped.
pub fn screen_preferences(annotations: &[PreferenceAnnotation], min_agree: usize) -> Vec<PreferencePair> {
    annotations
        .iter()
        .filter_map(|ann| {
            let count = |v: Vote| ann.votes.iter().filter(|&&x| x == v).count();
            let a_votes = count(Vote::ASure) + count(Vote::AUnsure);
            let b_votes = count(Vote::BSure) + count(Vote::BUnsure);
            let a_wins = a_votes >= min_agree && count(Vote::BSure) == 0;
            let b_wins = b_votes >= min_agree && count(Vote::ASure) == 0;
            // Both rules can hold only when min_agree is at most half the
            // panel; such questions are ambiguous and dropped.
            let label = match (a_wins, b_wins) {
                (true, false) => Preference::AOverB,
                (false, true) => Preference::BOverA,
                _ => return None,
            };
            Some(PreferencePair {
                id_a: ann.id_a.clone(),
                id_b: ann.id_b.clone(),
                label,
            })
        })
        .collect()
}

/// Correct and total counts behind a ppref value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PprefTally {
    pub n_correct: usize,
    pub n_all: usize,
}

impl PprefTally {
    pub fn value(&self) -> Result<f64> {
        if self.n_all == 0 {
            return Err(Error::UndefinedMetric("no preference pairs".into()));
        }
        Ok(self.n_correct as f64 / self.n_all as f64)
    }
}

/// Counts the labelled pairs that the predicted scores order correctly.
/// Equal predictions count as incorrect.
pub fn ppref_tally(pred: &[ScoredSample], pairs: &[PreferencePair]) -> Result<PprefTally> {
    let index = index_scores(pred)?;
    let mut missing = Vec::new();
    let mut seen = HashSet::new();
    let mut n_correct = 0;
    for pair in pairs {
        let (a, b) = match (index.get(pair.id_a.as_str()), index.get(pair.id_b.as_str())) {
            (Some(a), Some(b)) => (*a, *b),
            (a, b) => {
                for (found, id) in [(a.is_some(), &pair.id_a), (b.is_some(), &pair.id_b)] {
                    if !found && seen.insert(id.clone()) {
                        missing.push(id.clone());
                    }
                }
                continue;
            }
        };
        let correct = match pair.label {
            Preference::AOverB => a > b,
            Preference::BOverA => b > a,
        };
        n_correct += usize::from(correct);
    }
    if !missing.is_empty() {
        return Err(Error::IdMismatch {
            missing_in_left: missing,
            missing_in_right: Vec::new(),
        });
    }
    Ok(PprefTally {
        n_correct,
        n_all: pairs.len(),
    })
}

/// Fraction of labelled pairs ordered correctly by the predictions.
pub fn ppref(pred: &[ScoredSample], pairs: &[PreferencePair]) -> Result<f64> {
    ppref_tally(pred, pairs)?.value()
}
