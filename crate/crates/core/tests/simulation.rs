use latent_mos::fit::{fit, FitConfig};
use latent_mos::synth::{compare_estimators, generate_dataset, generate_grid, SynthConfig};

#[test]
fn large_sample_fit_is_consistent() {
    let cfg = SynthConfig {
        mu_star: 3.2,
        sigma_star: 0.8,
        n_ratings: 100_000,
        n_samples: 1,
        seed: 11,
        scale_max: 5,
    };
    let set = &generate_dataset(&cfg).unwrap()[0];
    let res = fit(set, &FitConfig { beta: 0.0, ..FitConfig::default() }).unwrap();
    assert!((res.representative - 3.2).abs() < 0.02, "{}", res.representative);
}

#[test]
fn vanishing_spread_repeats_the_mean() {
    let cfg = SynthConfig {
        mu_star: 4.0,
        sigma_star: 1e-9,
        n_ratings: 50,
        n_samples: 3,
        ..SynthConfig::default()
    };
    for set in generate_dataset(&cfg).unwrap() {
        assert!(set.ratings().iter().all(|&r| r == 4));
    }
}

#[test]
fn grid_ids_and_cells() {
    let cfg = SynthConfig { n_samples: 2, ..SynthConfig::default() };
    let samples = generate_grid(&cfg, &[1.5, 3.0, 4.5], &[0.5, 1.0]).unwrap();
    assert_eq!(samples.len(), 12);
    assert_eq!(samples[0].ratings.sample_id(), "synth-000000");
    assert_eq!(samples[11].ratings.sample_id(), "synth-000011");
    assert_eq!((samples[2].mu_star, samples[2].sigma_star), (1.5, 1.0));
    assert_eq!((samples[4].mu_star, samples[4].sigma_star), (3.0, 0.5));
}

// Prints the per-cell comparison at eight ratings per sample and at a
// hundred. Cells where the latent estimate is expected to win but does not
// are reported, not failed.
#[test]
fn estimator_comparison_report() {
    let mus = [1.0, 1.5, 2.0, 3.0, 4.0, 4.5, 5.0];
    let sigmas = [0.4, 0.7, 1.0, 1.5];
    let fit_cfg = FitConfig { beta: 0.0, ..FitConfig::default() };
    for (n_ratings, n_samples) in [(8, 200), (100, 100)] {
        let cfg = SynthConfig { n_ratings, n_samples, seed: 5, ..SynthConfig::default() };
        let cells = compare_estimators(&cfg, &mus, &sigmas, &fit_cfg).unwrap();
        assert_eq!(cells.len(), mus.len() * sigmas.len());
        println!("{n_ratings} ratings per sample\nmu*   sigma*  mae_latent  mae_mos");
        for c in &cells {
            let flag = if c.expects_latent_advantage() && !c.latent_not_worse() { "  <- MOS better" } else { "" };
            println!("{:<5} {:<7} {:<11.4} {:.4}{flag}", c.mu_star, c.sigma_star, c.mae_latent, c.mae_mos);
        }
    }
}
