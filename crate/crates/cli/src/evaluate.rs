use std::path::Path;

use latent_mos::io::{format_number, read_annotations, read_pairs, read_scores};
use latent_mos::metrics::{lcc, ppref_tally, screen_preferences, srcc, ScoredSample};
use latent_mos::Error;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cli::{EvaluateArgs, Mode};
use crate::error::{CliError, CliResult};
use crate::manifest::{read_input, write_file, RunManifest};

#[derive(Debug, Serialize)]
struct Config {
    mode: Mode,
    min_agree: Option<usize>,
    precision: u64,
}

/// Runs the evaluation and returns the report that was printed.
pub fn run(args: EvaluateArgs) -> CliResult<Value> {
    let mut manifest_inputs = Vec::new();
    let mut load = |path: &Path| -> CliResult<Vec<u8>> {
        let bytes = read_input(path)?;
        manifest_inputs.push((path.to_owned(), bytes.clone()));
        Ok(bytes)
    };
    let digits = args.precision as usize;
    let pred = read_scores(load(&args.pred)?.as_slice())?;

    let mut report = Map::new();
    report.insert("mode".into(), json!(args.mode));
    let mut reasons = Map::new();
    let mut min_agree = None;
    match args.mode {
        Mode::Correlation => {
            let truth_path = args
                .truth
                .as_deref()
                .ok_or_else(|| CliError::Usage("correlation mode needs --truth".into()))?;
            let truth = read_scores(load(truth_path)?.as_slice())?;
            report.insert("n_samples".into(), json!(truth.len()));
            for (name, metric) in [("lcc", lcc as Metric), ("srcc", srcc as Metric)] {
                let value = defined(metric(&pred, &truth), name, &mut reasons)?;
                report.insert(name.into(), number(value, digits));
            }
        }
        Mode::Ppref => {
            if args.min_agree == 0 {
                return Err(CliError::Usage("--min-agree must be at least 1".into()));
            }
            let pairs = match (&args.pairs, &args.annotations) {
                (Some(p), None) => read_pairs(load(p)?.as_slice())?,
                (None, Some(a)) => {
                    let annotations = read_annotations(load(a)?.as_slice())?;
                    let kept = screen_preferences(&annotations, args.min_agree);
                    report.insert("n_pairs_screened".into(), json!(kept.len()));
                    report.insert("n_pairs_dropped".into(), json!(annotations.len() - kept.len()));
                    min_agree = Some(args.min_agree);
                    kept
                }
                _ => return Err(CliError::Usage("ppref mode needs exactly one of --pairs or --annotations".into())),
            };
            let tally = ppref_tally(&pred, &pairs)?;
            let value = defined(tally.value(), "ppref", &mut reasons)?;
            report.insert("ppref".into(), number(value, digits));
            report.insert("n_all".into(), json!(tally.n_all));
            report.insert("n_correct".into(), json!(tally.n_correct));
        }
    }
    if !reasons.is_empty() {
        report.insert("reasons".into(), Value::Object(reasons));
    }
    let report = Value::Object(report);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    print!("{text}");

    if let Some(out) = &args.output {
        write_file(out, text.as_bytes())?;
        let mut manifest = RunManifest::new(
            "evaluate",
            Config {
                mode: args.mode,
                min_agree,
                precision: args.precision,
            },
        );
        for (path, bytes) in &manifest_inputs {
            manifest.add_input(path, bytes);
        }
        manifest.write_beside(out)?;
    }
    Ok(report)
}

type Metric = fn(&[ScoredSample], &[ScoredSample]) -> latent_mos::Result<f64>;

/// Undefined metrics become `None` with a recorded reason; other errors
/// abort the run.
fn defined(r: latent_mos::Result<f64>, name: &str, reasons: &mut Map<String, Value>) -> CliResult<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(why)) => {
            reasons.insert(name.into(), json!(why));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn number(v: Option<f64>, digits: usize) -> Value {
    v.map_or(Value::Null, |x| {
        json!(format_number(x, digits).parse::<f64>().expect("formatted number parses"))
    })
}
