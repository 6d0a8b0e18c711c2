use std::path::Path;

use latent_mos::io::{format_number, read_dataset, DatasetFormat};
use latent_mos::{fit, FitConfig, FitResult, RatingSet};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{AggregateArgs, Format, Method};
use crate::error::{CliError, CliResult};
use crate::manifest::{read_input, write_file, RunManifest};

pub const HEADER: [&str; 10] = [
    "sample_id",
    "n_ratings",
    "mos",
    "representative",
    "method",
    "sigma_hat",
    "loss",
    "initial_loss",
    "fell_back",
    "iterations",
];

#[derive(Debug, Serialize)]
struct Config {
    method: Method,
    n_low: Option<usize>,
    beta: f64,
    max_iters: usize,
    sigma_min: f64,
    scale_max: u32,
    format: Format,
    jobs: usize,
    precision: u64,
}

pub fn resolve_format(explicit: Option<Format>, path: &Path) -> Format {
    explicit.unwrap_or(match DatasetFormat::from_path(path) {
        Some(DatasetFormat::Jsonl) => Format::Jsonl,
        _ => Format::Csv,
    })
}

pub fn run(args: AggregateArgs) -> CliResult<()> {
    let fit_cfg = FitConfig {
        beta: args.fit.beta,
        max_iters: args.fit.max_iters,
        sigma_min: args.fit.sigma_min,
        scale_max: args.scale_max,
    };
    fit_cfg.validate()?;
    let n_low = match (args.method, args.n_low) {
        (Method::Nlow, None) => return Err(CliError::Usage("--method nlow needs --n-low".into())),
        (Method::Nlow, Some(0)) => return Err(CliError::Usage("--n-low must be at least 1".into())),
        (_, n) => n,
    };
    let format = resolve_format(args.format, &args.dataset);

    let bytes = read_input(&args.dataset)?;
    let sets = read_dataset(bytes.as_slice(), format.into(), args.scale_max)?;

    let digits = args.precision as usize;
    let rows = pool(args.jobs)?.install(|| {
        sets.par_iter()
            .map(|set| row(set, args.method, n_low, &fit_cfg, digits).map_err(|e| e.in_sample(set.sample_id())))
            .collect::<Vec<_>>()
    });
    let rows = collect_rows(rows)?;

    let mut w = csv_writer();
    w.write_record(HEADER).map_err(io_err)?;
    for r in &rows {
        w.write_record(r).map_err(io_err)?;
    }
    let out = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&args.output, &out)?;

    let mut manifest = RunManifest::new(
        "aggregate",
        Config {
            method: args.method,
            n_low,
            beta: fit_cfg.beta,
            max_iters: fit_cfg.max_iters,
            sigma_min: fit_cfg.sigma_min,
            scale_max: fit_cfg.scale_max,
            format,
            jobs: args.jobs,
            precision: args.precision,
        },
    );
    manifest.add_input(&args.dataset, &bytes);
    manifest.write_beside(&args.output)?;
    Ok(())
}

pub fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// Samples too short for `--n-low` are all reported together.
fn collect_rows(rows: Vec<CliResult<Vec<String>>>) -> CliResult<Vec<Vec<String>>> {
    let mut ok = Vec::with_capacity(rows.len());
    let mut failures = Vec::new();
    for r in rows {
        match r {
            Ok(r) => ok.push(r),
            Err(e) => failures.push(e),
        }
    }
    match failures.len() {
        0 => Ok(ok),
        1 => Err(failures.remove(0)),
        n => {
            let code = failures[0].exit_code();
            let msg = format!(
                "{n} samples failed:\n  {}",
                failures.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  ")
            );
            Err(match code {
                3 => CliError::Numerical(msg),
                _ => CliError::Data(msg),
            })
        }
    }
}

fn row(set: &RatingSet, method: Method, n_low: Option<usize>, cfg: &FitConfig, digits: usize) -> CliResult<Vec<String>> {
    let num = |x: f64| format_number(x, digits);
    let mos = set.mos();
    let mut r = vec![
        set.sample_id().to_owned(),
        set.len().to_string(),
        num(mos),
        String::new(),
        method.as_str().to_owned(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ];
    match method {
        Method::Mos => r[3] = num(mos),
        Method::Nlow => {
            let n = n_low.expect("checked before aggregation");
            r[3] = num(set.n_low_mos(n)?);
        }
        Method::Latent => {
            let FitResult {
                params,
                loss,
                initial_loss,
                iterations_run,
                fell_back,
                representative,
                ..
            } = fit(set, cfg)?;
            r[3] = num(representative);
            r[5] = params.map(|p| num(p.sigma())).unwrap_or_default();
            r[6] = num(loss);
            r[7] = num(initial_loss);
            r[8] = fell_back.to_string();
            r[9] = iterations_run.to_string();
        }
    }
    Ok(r)
}
