#![allow(dead_code)]

mod fd;
#[allow(unused_imports)]
pub use fd::*;

use exit_core::datagen::{generate, split, FeatureRow, Field, InteractionRecord, Vocab, WorldConfig, NUM_FIELDS};
use exit_core::model::ModelConfig;
use exit_core::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(shape: &[usize], lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

/// Values bounded away from zero, so kinks at 0 are never straddled.
pub fn away_from_zero(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            let m = rng.gen_range(0.1..1.5);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

pub fn with_value(t: &Tensor, i: usize, v: f64) -> Tensor {
    let mut data = t.data().to_vec();
    data[i] = v;
    Tensor::new(t.shape().to_vec(), data).unwrap()
}

/// `|a - n| <= rel * max(|a|, |n|, floor)`.
pub fn close(analytic: f64, numeric: f64, rel: f64, floor: f64) -> bool {
    (analytic - numeric).abs() <= rel * analytic.abs().max(numeric.abs()).max(floor)
}

pub fn tiny_vocab() -> Vocab {
    Vocab { sizes: [5; NUM_FIELDS] }
}

pub fn tiny_model_config() -> ModelConfig {
    ModelConfig {
        embedding_dim: 3,
        expert_hidden: vec![6, 4],
        tower_hidden: vec![4],
        ssn_compressed_width: 4,
        ssn_hidden: vec![5],
        ..ModelConfig::default()
    }
}

pub fn random_rows(n: usize, vocab: &Vocab, rng: &mut ChaCha8Rng) -> Vec<FeatureRow> {
    (0..n)
        .map(|_| {
            let mut row = [0u32; NUM_FIELDS];
            for f in Field::ALL {
                row[f.index()] = rng.gen_range(0..vocab.size(f)) as u32;
            }
            row
        })
        .collect()
}

/// A world small enough for fast end-to-end tests.
pub fn small_world(seed: u64) -> WorldConfig {
    WorldConfig {
        n_users: 400,
        n_items: 120,
        exposures: 6_000,
        seed,
        ..WorldConfig::default()
    }
}

pub fn small_split(seed: u64) -> (Vec<InteractionRecord>, Vec<InteractionRecord>, exit_core::datagen::GroundTruth, Vocab) {
    let cfg = small_world(seed);
    let (records, truth) = generate(&cfg).unwrap();
    let (train, test) = split(&records, cfg.train_fraction, cfg.seed);
    (train, test, truth, cfg.vocab())
}

/// Log rows over a small id space so items collect several payers.
pub fn random_log(n: usize, users: u32, items: u32, rng: &mut ChaCha8Rng) -> Vec<InteractionRecord> {
    (0..n)
        .map(|_| {
            let mut features = [0u32; NUM_FIELDS];
            features[Field::UserId.index()] = rng.gen_range(0..users);
            features[Field::ItemId.index()] = rng.gen_range(0..items);
            InteractionRecord {
                features,
                y_target: u8::from(rng.gen_bool(0.3)),
                y_sources: vec![u8::from(rng.gen_bool(0.2)), u8::from(rng.gen_bool(0.2))],
            }
        })
        .collect()
}

/// Per-item Jaccard of target and source payer sets, built the slow way.
pub fn gci_oracle(records: &[InteractionRecord], item: u32) -> f64 {
    let mut target = Vec::new();
    let mut source = Vec::new();
    for r in records.iter().filter(|r| r.item_id() == item) {
        if r.y_target == 1 && !target.contains(&r.user_id()) {
            target.push(r.user_id());
        }
        if r.y_sources.contains(&1) && !source.contains(&r.user_id()) {
            source.push(r.user_id());
        }
    }
    let inter = target.iter().filter(|u| source.contains(u)).count();
    let mut union = target.clone();
    union.extend(source.iter().filter(|u| !target.contains(u)));
    if union.is_empty() {
        0.0
    } else {
        inter as f64 / union.len() as f64
    }
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
pub fn auc_oracle(scores: &[f64], labels: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1.0 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0.0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}

pub fn logloss_oracle(scores: &[f64], labels: &[f64]) -> f64 {
    let eps = 1e-7;
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(eps, 1.0 - eps);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    total / scores.len() as f64
}

pub fn small_data(seed: u64) -> exit_core::training::ExperimentData {
    let (train, test, truth, vocab) = small_split(seed);
    exit_core::training::ExperimentData {
        train,
        test,
        truth: Some(truth),
        vocab,
        gci: None,
    }
}

pub fn small_experiment(epochs: usize) -> exit_core::training::ExperimentConfig {
    let mut cfg = exit_core::training::ExperimentConfig::default();
    cfg.train.epochs = epochs;
    cfg.train.batch_size = 128;
    cfg.model.expert_hidden = vec![16, 8];
    cfg.model.tower_hidden = vec![8];
    cfg.model.ssn_compressed_width = 8;
    cfg.model.ssn_hidden = vec![16];
    cfg.sim.requests = 100;
    cfg
}
