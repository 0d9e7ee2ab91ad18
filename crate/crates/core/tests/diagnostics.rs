use gossip_pca::diagnostics::{
    absorbing_check, measure_contraction, measure_mixing, mixing_horizon, variance_of_time_average,
    ChainSetup,
};
use gossip_pca::estimators::bounds::theta_hypothesis;
use gossip_pca::experiments::make_synthetic;
use gossip_pca::linalg::spectral_oracle;
use gossip_pca::par::Executor;
use gossip_pca::rng::SeedStream;
use gossip_pca::sparsifier::{calibrate_d, SampleMode, SparsifyScheme};
use gossip_pca::stats;

fn chain_setup(n: usize, l2: f64, theta: f64, seed: u64) -> ChainSetup {
    let root = SeedStream::new(seed);
    let m = make_synthetic(n, l2, &mut root.child(0).rng()).unwrap();
    let d = calibrate_d(&m, theta, SampleMode::SymmetricPair, 20, root.child(1)).unwrap();
    ChainSetup::new(
        m,
        SparsifyScheme::new(n, d).unwrap(),
        50,
        &mut root.child(2).rng(),
    )
    .unwrap()
}

/// Exact multiplication with a small nominal `θ`, so the good set has a
/// positive radius.
fn exact_setup(n: usize, seed: u64) -> ChainSetup {
    let m = make_synthetic(n, 0.5, &mut SeedStream::new(seed).rng()).unwrap();
    let spec = spectral_oracle(&m).unwrap();
    ChainSetup {
        u: spec.u().to_vec(),
        l2: spec.l2(),
        scheme: SparsifyScheme::exact(n),
        m,
        theta: 0.01,
    }
}

#[test]
fn exact_chain_contracts_at_the_gap() {
    let setup = exact_setup(80, 1);
    let rep = measure_contraction(&setup, 200, 1, SeedStream::new(2), &Executor::Sequential);
    assert!(
        rep.rho_empirical <= setup.l2 + 0.05,
        "{} vs l2 {}",
        rep.rho_empirical,
        setup.l2
    );
    assert_eq!(rep.violations, 0);
}

#[test]
fn contraction_ignores_matrix_scale() {
    let setup = chain_setup(60, 0.5, 0.01, 3);
    let scaled = ChainSetup {
        m: setup.m.scaled(4.0),
        ..setup.clone()
    };
    let a = measure_contraction(&setup, 100, 20, SeedStream::new(4), &Executor::Sequential);
    let b = measure_contraction(&scaled, 100, 20, SeedStream::new(4), &Executor::Sequential);
    assert_eq!(a.rho_empirical.to_bits(), b.rho_empirical.to_bits());
    assert_eq!(a.max_pair_mean.to_bits(), b.max_pair_mean.to_bits());
}

#[test]
fn hypothesis_warning_fires_only_beyond_limit() {
    let mut setup = exact_setup(30, 5);
    setup.theta = 0.5 * theta_hypothesis(setup.l2);
    assert!(setup.hypothesis_warning().is_none());
    setup.theta = 2.0 * theta_hypothesis(setup.l2);
    assert!(setup.hypothesis_warning().is_some());
}

#[test]
fn mixing_rate_respects_contraction_bound() {
    let setup = chain_setup(100, 0.5, 0.05, 6);
    let horizon = mixing_horizon(1e-3, setup.rho_bound());
    let mix = measure_mixing(
        &setup,
        horizon,
        500,
        SeedStream::new(7),
        &Executor::Sequential,
    );
    // No fitted rate means the curve hits the noise floor after one step.
    let rate = mix.fitted_rate.unwrap_or(0.0);
    assert!(
        rate <= setup.rho_bound() + 0.05,
        "rate {rate} vs {}",
        setup.rho_bound()
    );
    assert_eq!(mix.escapes, 0);
}

#[test]
fn mixing_curve_trends_down() {
    let setup = chain_setup(100, 0.5, 0.05, 8);
    let mix = measure_mixing(&setup, 30, 500, SeedStream::new(9), &Executor::Sequential);
    let curve = stats::smooth(&mix.mixing_curve, 5);
    let t: Vec<f64> = (0..curve.len()).map(|k| k as f64).collect();
    let critical = 1.645 / ((curve.len() - 1) as f64).sqrt();
    let rho = stats::spearman(&t, &curve);
    assert!(rho < -critical, "spearman {rho} vs -{critical}");
}

#[test]
fn exact_chain_is_stationary_at_the_eigenvector() {
    let setup = exact_setup(60, 10);
    let mix = measure_mixing(&setup, 200, 20, SeedStream::new(11), &Executor::Sequential);
    assert!(mix.mu_mean_dist <= 1e-9, "{}", mix.mu_mean_dist);
}

#[test]
fn single_step_variance_within_bound() {
    let setup = chain_setup(100, 0.5, 0.05, 12);
    let mix = measure_mixing(&setup, 20, 500, SeedStream::new(13), &Executor::Sequential);
    let v = variance_of_time_average(
        &setup,
        &mix,
        1,
        500,
        SeedStream::new(14),
        &Executor::Sequential,
    );
    assert!(
        v.estimate <= v.single_sample_bound,
        "{} vs {}",
        v.estimate,
        v.single_sample_bound
    );
}

#[test]
fn time_average_variance_falls_like_one_over_t() {
    let setup = chain_setup(100, 0.5, 0.05, 15);
    let mix = measure_mixing(&setup, 20, 4000, SeedStream::new(16), &Executor::Sequential);
    let at = |t: usize, s: u64| {
        variance_of_time_average(
            &setup,
            &mix,
            t,
            400,
            SeedStream::new(s),
            &Executor::Sequential,
        )
        .estimate
    };
    let ratio = at(400, 17) / at(100, 18);
    assert!((0.15..=0.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn chains_started_in_good_set_stay_there() {
    let setup = chain_setup(100, 0.5, 0.01, 19);
    let rep = absorbing_check(&setup, 200, 100, SeedStream::new(20), &Executor::Sequential);
    assert_eq!(rep.escapes, 0);
    assert!(rep.max_distance <= rep.radius);
}
