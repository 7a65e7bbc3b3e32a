mod common;

use common::*;
use exit_core::labels::{compute_gci, label_dataset, IclMode};
use exit_core::model::Model;
use exit_core::training::{
    build_requests, default_lambda_grid, fit, oracle_scores, run_experiment, simulate_exposure, sweep_lambda,
    sweep_table, Dataset, ExposureConfig, LossWeights, MetricsReport, TrainConfig, Variant,
};
use exit_core::Error;

fn dataset(seed: u64) -> (Dataset, exit_core::datagen::Vocab) {
    let (train, _, _, vocab) = small_split(seed);
    let gci = compute_gci(&train).unwrap();
    (Dataset::new(label_dataset(&train, &gci, IclMode::Standard, &vocab).unwrap()), vocab)
}

#[test]
fn zero_epochs_changes_nothing() {
    let (data, vocab) = dataset(1);
    let mut model = Model::new(tiny_model_config(), vocab, 3).unwrap();
    let before = model.params().clone();
    let cfg = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    let report = fit(&mut model, &data, &cfg).unwrap();
    assert!(report.epoch_losses.is_empty());
    assert_eq!(report.steps, 0);
    assert_eq!(model.params(), &before);
}

#[test]
fn fitting_is_deterministic() {
    let (data, vocab) = dataset(2);
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 256,
        ..TrainConfig::default()
    };
    let run = || {
        let mut m = Model::new(tiny_model_config(), vocab, 5).unwrap();
        let r = fit(&mut m, &data, &cfg).unwrap();
        (m.params().clone(), r)
    };
    assert_eq!(run(), run());
}

#[test]
fn joint_loss_falls_over_first_epochs() {
    let (data, vocab) = dataset(3);
    let mut model = Model::new(tiny_model_config(), vocab, 4).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 128,
        ..TrainConfig::default()
    };
    let report = fit(&mut model, &data, &cfg).unwrap();
    let l = &report.epoch_losses;
    assert!(l[1] < l[0] && l[2] < l[1], "{l:?}");
}

#[test]
fn oracle_exposure_beats_learned_and_full_slate_is_policy_free() {
    let data = small_data(6);
    let cfg = small_experiment(2);
    let (model, _) = run_experiment(&data, &cfg).unwrap();
    let truth = data.truth.as_ref().unwrap();
    let requests = build_requests(&data.test, &cfg.sim).unwrap();
    let oracle = oracle_scores(truth, &requests).unwrap();
    let learned = exit_core::training::score_requests(&model, &requests).unwrap();
    let best = simulate_exposure(&requests, &oracle, Some(truth), &cfg.sim).unwrap();
    let ours = simulate_exposure(&requests, &learned, Some(truth), &cfg.sim).unwrap();
    assert!(best.ctcvr_proxy >= ours.ctcvr_proxy);

    let all = ExposureConfig {
        k: cfg.sim.candidates,
        ..cfg.sim.clone()
    };
    let a = simulate_exposure(&requests, &oracle, Some(truth), &all).unwrap();
    let b = simulate_exposure(&requests, &learned, Some(truth), &all).unwrap();
    assert!((a.ctcvr_proxy - b.ctcvr_proxy).abs() < 1e-12);
    assert_eq!(a.nfr_proxy, b.nfr_proxy);
    assert_eq!(a.exposed, requests.len() * cfg.sim.candidates);

    assert!(matches!(
        simulate_exposure(&requests, &oracle, None, &cfg.sim),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn random_scores_expose_the_population_mean() {
    use rand::Rng;
    let data = small_data(7);
    let truth = data.truth.as_ref().unwrap();
    let cfg = ExposureConfig {
        requests: 2000,
        ..ExposureConfig::default()
    };
    let requests = build_requests(&data.test, &cfg).unwrap();
    let mut r = rng(8);
    let random: Vec<Vec<f64>> = requests.iter().map(|q| q.candidates.iter().map(|_| r.gen()).collect()).collect();
    let got = simulate_exposure(&requests, &random, Some(truth), &cfg).unwrap();
    let all: Vec<f64> = requests
        .iter()
        .flat_map(|q| q.candidates.iter().map(|c| truth.cell_for(c).unwrap().p_target()))
        .collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    assert!((got.ctcvr_proxy - mean).abs() < 0.1 * mean, "{} vs {mean}", got.ctcvr_proxy);
}

#[test]
fn sweep_over_one_point() {
    let data = small_data(9);
    let cfg = small_experiment(1);
    let rows = sweep_lambda(&[LossWeights::default()], &data, &cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(!rows[0].degenerate);
    assert_eq!(sweep_table(&rows).lines().count(), 2);
}

#[test]
fn default_grid_has_baseline() {
    let grid = default_lambda_grid();
    assert_eq!(grid.len(), 10);
    assert!(grid.contains(&LossWeights::new(1.0, 1.0, 1.0)));
    assert!(grid.contains(&LossWeights::new(1.0, 1.0, 0.0)));
}

#[test]
fn variants_parse_by_name() {
    for v in Variant::ALL {
        assert_eq!(v.name().parse::<Variant>().unwrap(), v);
    }
    assert!(matches!("no_such".parse::<Variant>(), Err(Error::Config(_))));
}

#[test]
fn ledger_gets_header_once() {
    let data = small_data(10);
    let cfg = small_experiment(1);
    let (_, report) = run_experiment(&data, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.tsv");
    report.append_to_ledger(&path).unwrap();
    report.append_to_ledger(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], MetricsReport::TSV_HEADER);
    assert_eq!(lines[1], lines[2]);
}
