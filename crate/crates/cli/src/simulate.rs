use std::path::{Path, PathBuf};

use latent_mos::io::{write_dataset, write_ground_truth};
use latent_mos::synth::{generate_grid, SynthConfig};
use serde::Serialize;

use crate::aggregate::resolve_format;
use crate::cli::{Format, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{read_input, write_file, RunManifest};

#[derive(Debug, Serialize)]
struct Config<'a> {
    #[serde(flatten)]
    synth: &'a SynthConfig,
    grid_mu: &'a [f64],
    grid_sigma: &'a [f64],
    format: Format,
    precision: u64,
}

/// `runs/sim.csv` -> `runs/sim.truth.csv`.
pub fn default_truth_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.truth.csv"))
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let config_bytes = args.config.as_deref().map(read_input).transpose()?;
    let mut cfg: SynthConfig = match &config_bytes {
        Some(b) => serde_json::from_slice(b)
            .map_err(|e| CliError::Usage(format!("invalid simulation config: {e}")))?,
        None => SynthConfig::default(),
    };
    macro_rules! overlay {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field {
                cfg.$field = v;
            }
        )*};
    }
    overlay!(mu_star, sigma_star, n_ratings, n_samples, seed, scale_max);
    cfg.validate()?;

    let mus = if args.grid_mu.is_empty() { vec![cfg.mu_star] } else { args.grid_mu.clone() };
    let sigmas = if args.grid_sigma.is_empty() { vec![cfg.sigma_star] } else { args.grid_sigma.clone() };
    let samples = generate_grid(&cfg, &mus, &sigmas)?;

    let format = resolve_format(args.format, &args.output);
    let digits = args.precision as usize;
    let sets: Vec<_> = samples.iter().map(|s| s.ratings.clone()).collect();
    let mut data = Vec::new();
    write_dataset(&mut data, &sets, format.into())?;
    let mut truth = Vec::new();
    write_ground_truth(&mut truth, &samples, digits)?;

    let truth_path = args.truth.clone().unwrap_or_else(|| default_truth_path(&args.output));
    if truth_path == args.output {
        return Err(CliError::Usage("--truth must differ from --output".into()));
    }
    write_file(&args.output, &data)?;
    write_file(&truth_path, &truth)?;

    let mut manifest = RunManifest::new(
        "simulate",
        Config {
            synth: &cfg,
            grid_mu: &mus,
            grid_sigma: &sigmas,
            format,
            precision: args.precision,
        },
    );
    if let (Some(path), Some(bytes)) = (&args.config, &config_bytes) {
        manifest.add_input(path, bytes);
    }
    manifest.write_beside(&args.output)?;
    Ok(())
}
