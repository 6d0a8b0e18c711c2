//! File formats.
//!
//! | file | layout |
//! |------|--------|
//! | ratings (CSV) | `sample_id,rating_1,...,rating_N`, rows may differ in length, header optional |
//! | ratings (JSONL) | `{"sample_id": "...", "ratings": [4, 4, 5, 3]}` per line |
//! | scores | `sample_id,score` |
//! | preference annotations | `pair_id,id_a,id_b,vote_1,vote_2,...` |
//! | screened pairs | `id_a,id_b,label` with label `A` or `B` |
//! | ground truth | `sample_id,mu_star,sigma_star` |
//!
//! CSV headers are optional and recognized by a non-numeric (or, for vote
//! and label columns, unrecognized) value where the first data field
//! would be. Readers collect every bad record before failing, so one run
//! reports all of them.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordError, Result};
use crate::metrics::{PreferenceAnnotation, PreferencePair, ScoredSample, Vote};
use crate::ratings::RatingSet;
use crate::synth::SyntheticSample;

/// Significant digits used when writing real numbers.
pub const DEFAULT_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Jsonl,
}

impl DatasetFormat {
    /// Guesses the format from a file extension (`.csv`, `.jsonl`, `.ndjson`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "jsonl" | "ndjson" => Some(Self::Jsonl),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Jsonl => "jsonl",
        }
    }
}

/// Formats `x` rounded to `digits` significant digits, in the shortest
/// form that parses back to the rounded value.
///
/// ```
/// use latent_mos::io::format_number;
/// assert_eq!(format_number(22.0 / 6.0, 12), "3.66666666667");
/// assert_eq!(format_number(4.0, 12), "4");
/// ```
pub fn format_number(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.clamp(1, 17);
    let rounded: f64 = format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("formatted float parses");
    // Avoid printing "-0".
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn record_error(line: usize, sample_id: Option<&str>, message: impl Into<String>) -> RecordError {
    RecordError {
        line,
        sample_id: sample_id.map(str::to_owned),
        message: message.into(),
    }
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn finish<T>(items: T, errors: Vec<RecordError>) -> Result<T> {
    if errors.is_empty() {
        Ok(items)
    } else {
        Err(Error::Parse(errors))
    }
}

/// Reads a ratings file in either format.
pub fn read_dataset<R: Read>(input: R, format: DatasetFormat, scale_max: u32) -> Result<Vec<RatingSet>> {
    if scale_max < 2 {
        return Err(Error::InvalidScale(scale_max));
    }
    let (raw, mut errors) = match format {
        DatasetFormat::Csv => read_csv_ratings(input)?,
        DatasetFormat::Jsonl => read_jsonl_ratings(input)?,
    };
    let mut seen = HashSet::new();
    let mut sets = Vec::with_capacity(raw.len());
    for RawRatings { line, sample_id, ratings } in raw {
        if !seen.insert(sample_id.clone()) {
            errors.push(record_error(line, Some(&sample_id), "duplicate sample id"));
            continue;
        }
        let ratings = match ratings {
            Ok(r) => r,
            Err(msg) => {
                errors.push(record_error(line, Some(&sample_id), msg));
                continue;
            }
        };
        if let Some(&bad) = ratings.iter().find(|&&r| r < 1 || r > i64::from(scale_max)) {
            errors.push(record_error(
                line,
                Some(&sample_id),
                format!("rating {bad} is outside 1..={scale_max}"),
            ));
            continue;
        }
        match RatingSet::new(sample_id.clone(), ratings.into_iter().map(|r| r as u32).collect(), scale_max) {
            Ok(set) => sets.push(set),
            Err(e) => errors.push(record_error(line, Some(&sample_id), e.to_string())),
        }
    }
    errors.sort_by_key(|e| e.line);
    finish(sets, errors)
}

struct RawRatings {
    line: usize,
    sample_id: String,
    ratings: std::result::Result<Vec<i64>, String>,
}

type RawOutcome = (Vec<RawRatings>, Vec<RecordError>);

fn read_csv_ratings<R: Read>(input: R) -> Result<RawOutcome> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let sample_id = rec.get(0).unwrap_or_default().to_owned();
        if i == 0 && rec.get(1).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if sample_id.is_empty() {
            errors.push(record_error(line, None, "missing sample id"));
            continue;
        }
        // Trailing empty cells come from spreadsheet exports of ragged rows.
        let ratings = rec
            .iter()
            .skip(1)
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<i64>()
                    .map_err(|_| format!("rating `{f}` is not an integer"))
            })
            .collect::<std::result::Result<Vec<_>, _>>();
        out.push(RawRatings {
            line,
            sample_id,
            ratings,
        });
    }
    Ok((out, errors))
}

#[derive(Deserialize)]
struct JsonRatings {
    sample_id: String,
    ratings: Vec<serde_json::Value>,
}

fn read_jsonl_ratings<R: Read>(input: R) -> Result<RawOutcome> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: JsonRatings = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => {
                errors.push(record_error(line_no, None, e.to_string()));
                continue;
            }
        };
        let ratings = rec
            .ratings
            .iter()
            .map(|v| v.as_i64().ok_or_else(|| format!("rating `{v}` is not an integer")))
            .collect();
        out.push(RawRatings {
            line: line_no,
            sample_id: rec.sample_id,
            ratings,
        });
    }
    Ok((out, errors))
}

/// Writes rating sets in the given format. CSV output has no header.
pub fn write_dataset<W: Write>(mut out: W, sets: &[RatingSet], format: DatasetFormat) -> Result<()> {
    match format {
        DatasetFormat::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
            for s in sets {
                let mut row = vec![s.sample_id().to_owned()];
                row.extend(s.ratings().iter().map(u32::to_string));
                w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        DatasetFormat::Jsonl => {
            #[derive(Serialize)]
            struct Row<'a> {
                sample_id: &'a str,
                ratings: &'a [u32],
            }
            for s in sets {
                let row = Row {
                    sample_id: s.sample_id(),
                    ratings: s.ratings(),
                };
                serde_json::to_writer(&mut out, &row).map_err(|e| Error::Io(e.to_string()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads `sample_id,score` rows.
///
/// With a header, the score comes from a `score` column, or failing that a
/// `representative` column, so aggregation output can serve as reference
/// values directly. Without one, the second column is used.
pub fn read_scores<R: Read>(input: R) -> Result<Vec<ScoredSample>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut column = 1;
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.get(1).is_some_and(|f| f.parse::<f64>().is_err()) {
            let find = |name: &str| rec.iter().position(|h| h.eq_ignore_ascii_case(name));
            column = find("score").or_else(|| find("representative")).unwrap_or(1);
            continue;
        }
        let id = rec.get(0).unwrap_or_default();
        match rec.get(column).map(|f| (f, f.parse::<f64>())) {
            Some((_, Ok(v))) if v.is_finite() => out.push(ScoredSample::new(id, v)),
            Some((f, _)) => errors.push(record_error(line, Some(id), format!("score `{f}` is not a finite number"))),
            None => errors.push(record_error(line, Some(id), "missing score")),
        }
    }
    finish(out, errors)
}

pub fn write_scores<W: Write>(out: W, scores: &[ScoredSample], digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "score"]).map_err(|e| Error::Io(e.to_string()))?;
    for s in scores {
        w.write_record([s.sample_id.as_str(), &format_number(s.score, digits)])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `pair_id,id_a,id_b,vote_1,...` rows.
pub fn read_annotations<R: Read>(input: R) -> Result<Vec<PreferenceAnnotation>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.get(3).is_some_and(|f| f.parse::<Vote>().is_err()) {
            continue;
        }
        if rec.len() < 4 {
            errors.push(record_error(line, rec.get(0), "expected pair_id,id_a,id_b and at least one vote"));
            continue;
        }
        let votes = rec
            .iter()
            .skip(3)
            .filter(|f| !f.is_empty())
            .map(str::parse::<Vote>)
            .collect::<Result<Vec<_>>>();
        match votes.and_then(|v| PreferenceAnnotation::new(&rec[0], &rec[1], &rec[2], v)) {
            Ok(a) => out.push(a),
            Err(e) => errors.push(record_error(line, Some(&rec[0]), e.to_string())),
        }
    }
    finish(out, errors)
}

/// Reads `id_a,id_b,label` rows.
pub fn read_pairs<R: Read>(input: R) -> Result<Vec<PreferencePair>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, rec) in csv_reader(input).records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let line = line_of(&rec);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let label = rec.get(2).map(str::parse);
        if i == 0 && matches!(label, Some(Err(_))) {
            continue;
        }
        match (rec.len(), label) {
            (3, Some(Ok(label))) if rec[0] != rec[1] => out.push(PreferencePair {
                id_a: rec[0].to_owned(),
                id_b: rec[1].to_owned(),
                label,
            }),
            (3, Some(Ok(_))) => errors.push(record_error(line, None, "a pair must name two different samples")),
            (_, Some(Err(e))) => errors.push(record_error(line, None, e.to_string())),
            _ => errors.push(record_error(line, None, "expected id_a,id_b,label")),
        }
    }
    finish(out, errors)
}

pub fn write_pairs<W: Write>(out: W, pairs: &[PreferencePair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id_a", "id_b", "label"]).map_err(|e| Error::Io(e.to_string()))?;
    for p in pairs {
        w.write_record([p.id_a.as_str(), p.id_b.as_str(), p.label.as_str()])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the `sample_id,mu_star,sigma_star` sidecar of a simulated dataset.
pub fn write_ground_truth<W: Write>(out: W, samples: &[SyntheticSample], digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "mu_star", "sigma_star"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for s in samples {
        w.write_record([
            s.ratings.sample_id(),
            &format_number(s.mu_star, digits),
            &format_number(s.sigma_star, digits),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
