mod common;

use gossip_pca::experiments::{
    make_synthetic, make_synthetic_with, procrustes_distance, random_block, run_positioning,
    run_tradeoff, run_warmstart_table, ExperimentConfig, MatrixSource, MdsInstance, SyntheticSpec,
};
use gossip_pca::linalg::{spectral_oracle, SymmetricMatrix};
use gossip_pca::par::Executor;
use gossip_pca::rng::SeedStream;
use gossip_pca::Error;

#[test]
fn synthetic_gap_lands_near_target() {
    for seed in 0..5u64 {
        let m = make_synthetic(150, 0.5, &mut SeedStream::new(seed).rng()).unwrap();
        let l2 = spectral_oracle(&m).unwrap().l2();
        assert!((0.48..=0.52).contains(&l2), "seed {seed}: l2 = {l2}");
    }
}

#[test]
fn noiseless_synthetic_gap_is_exact() {
    let spec = SyntheticSpec::new(64, 0.3).with_noise_ratio(0.0);
    let out = make_synthetic_with(&spec, &mut SeedStream::new(1).rng()).unwrap();
    let l2 = spectral_oracle(&out.m).unwrap().l2();
    assert!((l2 - out.lambda2 / out.lambda1).abs() <= 1e-12);
    assert!((l2 - 0.3).abs() <= 1e-12);
}

#[test]
fn synthetic_is_reproducible() {
    let a = make_synthetic(50, 0.5, &mut SeedStream::new(2).rng()).unwrap();
    let b = make_synthetic(50, 0.5, &mut SeedStream::new(2).rng()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn distance_matrix_is_a_valid_dissimilarity() {
    let inst = MdsInstance::random(40, &mut SeedStream::new(3).rng()).unwrap();
    let n = inst.n();
    for i in 0..n {
        assert_eq!(inst.distances.get(i, i), 0.0);
        for j in 0..n {
            assert!(inst.distances.get(i, j) >= 0.0);
            assert_eq!(inst.distances.get(i, j), inst.distances.get(j, i));
        }
        let row_sum: f64 = inst.centered.row(i).iter().sum();
        assert!(row_sum.abs() <= 1e-9, "row {i}: {row_sum}");
    }
}

#[test]
fn collinear_positions_give_rank_one() {
    let positions: Vec<[f64; 2]> = (0..12)
        .map(|k| [k as f64 * 0.3, 1.0 + k as f64 * 0.6])
        .collect();
    let inst = MdsInstance::from_positions(positions).unwrap();
    let mut eig = common::jacobi_eigenvalues(inst.n(), inst.centered.as_slice());
    eig.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    assert!(eig[1].abs() <= 1e-9 * eig[0].abs(), "{eig:?}");
}

#[test]
fn procrustes_error_ignores_rigid_motions() {
    let base = MdsInstance::random(30, &mut SeedStream::new(4).rng()).unwrap();
    let (c, s) = (0.6_f64.cos(), 0.6_f64.sin());
    let moved: Vec<[f64; 2]> = base
        .positions
        .iter()
        .map(|p| [c * p[0] - s * p[1] + 3.0, s * p[0] + c * p[1] - 1.5])
        .collect();
    let moved = MdsInstance::from_positions(moved).unwrap();
    let estimate = random_block(30, 2, &mut SeedStream::new(5).rng());
    let a = procrustes_distance(&base.true_basis(2).unwrap(), &estimate);
    let b = procrustes_distance(&moved.true_basis(2).unwrap(), &estimate);
    assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
}

#[test]
fn exact_eigenvectors_have_zero_error() {
    let inst = MdsInstance::random(25, &mut SeedStream::new(6).rng()).unwrap();
    let u = inst.true_basis(2).unwrap();
    let flipped: Vec<Vec<f64>> = vec![u[1].clone(), u[0].iter().map(|v| -v).collect()];
    assert!(procrustes_distance(&u, &u) <= 1e-12);
    assert!(procrustes_distance(&u, &flipped) <= 1e-12);
}

#[test]
fn positioning_error_falls_with_budget() {
    let cfg = ExperimentConfig {
        n: 200,
        trials: 4,
        seed: 7,
        ..Default::default()
    };
    let report = run_positioning(&cfg, &Executor::Sequential).unwrap();
    let first = report.rows.first().unwrap().delta;
    let last = report.rows.last().unwrap().delta;
    assert!(first >= 2.0 * last, "first {first}, last {last}");
    assert!(report.spearman < 0.0);
    assert!(report.csv().starts_with("chi,d,delta,seed\n"));
}

#[test]
fn warmstart_table_has_expected_shape() {
    let cfg = ExperimentConfig {
        n: 200,
        l2: 0.1,
        trials: 3,
        seed: 8,
        d_list: vec![20.0, 80.0],
        ..Default::default()
    };
    let a = run_warmstart_table(&cfg, &Executor::Sequential).unwrap();
    let b = run_warmstart_table(&cfg, &Executor::Sequential).unwrap();
    assert_eq!(a.csv(), b.csv());
    assert_eq!(a.rows.len(), 2);
    let mut lines = a
        .csv()
        .lines()
        .map(str::to_owned)
        .collect::<Vec<_>>()
        .into_iter();
    assert_eq!(lines.next().unwrap(), "d,tau,err,censored,trials,seed");
    assert!(lines.all(|l| l.ends_with(",8")));
}

#[test]
fn tradeoff_report_is_reproducible() {
    let cfg = ExperimentConfig {
        n: 100,
        trials: 2,
        seed: 9,
        matrix_source: MatrixSource::Mds,
        d_list: vec![5.0, 50.0],
        chi_list: vec![500.0, 2000.0, 8000.0],
        ..Default::default()
    };
    let a = run_tradeoff(&cfg, &Executor::Sequential).unwrap();
    let b = run_tradeoff(&cfg, &Executor::Sequential).unwrap();
    assert_eq!(a.csv(), b.csv());
    assert!(a.csv().starts_with("chi,method,d,err,seed\n"));
    assert_eq!(a.rows.len(), 3 * 2);
    assert_eq!(a.curves.len(), 2 * 2);
    assert!(a.rows.iter().all(|r| r.err.is_finite() && r.err >= 0.0));
}

#[test]
fn config_text_sets_fields_and_rejects_unknown_keys() {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text("# comment\nn = 64\nd_list = 4, 8 # trailing\nmatrix_source = mds\nseed = 3\n")
        .unwrap();
    assert_eq!(cfg.n, 64);
    assert_eq!(cfg.d_list, vec![4.0, 8.0]);
    assert_eq!(cfg.matrix_source, MatrixSource::Mds);
    assert_eq!(cfg.seed, 3);
    assert!(matches!(
        cfg.apply_text("colour = blue"),
        Err(Error::Parse(_))
    ));
    assert!(matches!(cfg.apply_text("n 12"), Err(Error::Parse(_))));
}

#[test]
fn config_validation_catches_bad_ranges() {
    let ok = ExperimentConfig::default();
    assert!(ok.validate().is_ok());
    let bad = [
        ExperimentConfig { n: 2, ..ok.clone() },
        ExperimentConfig {
            d: Some(0.5),
            ..ok.clone()
        },
        ExperimentConfig {
            delta: 1.0,
            ..ok.clone()
        },
        ExperimentConfig {
            epsilon: 0.0,
            ..ok.clone()
        },
        ExperimentConfig {
            l2: 1.0,
            ..ok.clone()
        },
        ExperimentConfig {
            t: Some(0),
            ..ok.clone()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidInput(_))));
    }
}

#[test]
fn degenerate_spectrum_is_rejected() {
    let m = SymmetricMatrix::identity(5).unwrap();
    assert!(matches!(
        spectral_oracle(&m),
        Err(Error::DegenerateSpectrum { .. })
    ));
}
