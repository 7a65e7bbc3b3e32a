use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{FeatureRow, Field, FieldGroup, GroundTruth, InteractionRecord, NEGATIVE_TRANSFER_MAX};
use crate::model::Model;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExposureConfig {
    pub requests: usize,
    pub candidates: usize,
    pub k: usize,
    /// True target interest below this counts as "not interested".
    pub nfr_threshold: f64,
    pub seed: u64,
}

impl Default for ExposureConfig {
    fn default() -> Self {
        Self {
            requests: 500,
            candidates: 20,
            k: 5,
            nfr_threshold: 0.01,
            seed: 77,
        }
    }
}

impl ExposureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.candidates == 0 || self.requests == 0 {
            return Err(Error::Config("sim.requests, sim.candidates and sim.k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.nfr_threshold) {
            return Err(Error::Config("sim.nfr_threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One user in one context, with a slate of candidate items to rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    pub candidates: Vec<FeatureRow>,
}

/// Builds requests from held-out exposures: the user and context come from
/// one record, the candidates are items drawn uniformly from the catalog seen
/// in `records`.
pub fn build_requests(records: &[InteractionRecord], cfg: &ExposureConfig) -> Result<Vec<Request>> {
    cfg.validate()?;
    let catalog: Vec<FeatureRow> = records
        .iter()
        .map(|r| (r.item_id(), r.features))
        .collect::<BTreeMap<_, _>>()
        .into_values()
        .collect();
    if catalog.is_empty() {
        return Err(Error::Contract("cannot simulate exposure without records".into()));
    }
    let item_fields: Vec<Field> = Field::ALL
        .into_iter()
        .filter(|f| f.group() == FieldGroup::Item)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_cand = cfg.candidates.min(catalog.len());
    Ok((0..cfg.requests)
        .map(|_| {
            let base = records[rng.gen_range(0..records.len())].features;
            let candidates = sample(&mut rng, catalog.len(), n_cand)
                .into_iter()
                .map(|i| {
                    let mut row = base;
                    for f in &item_fields {
                        row[f.index()] = catalog[i][f.index()];
                    }
                    row
                })
                .collect();
            Request { candidates }
        })
        .collect())
}

/// Model serving scores for every candidate of every request.
pub fn score_requests(model: &Model, requests: &[Request]) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<FeatureRow> = requests.iter().flat_map(|r| r.candidates.iter().copied()).collect();
    let mut flat = model.score(&rows)?.into_iter();
    Ok(requests
        .iter()
        .map(|r| flat.by_ref().take(r.candidates.len()).collect())
        .collect())
}

/// Scores each candidate by its true target-domain purchase probability.
pub fn oracle_scores(truth: &GroundTruth, requests: &[Request]) -> Result<Vec<Vec<f64>>> {
    requests
        .iter()
        .map(|r| {
            r.candidates
                .iter()
                .map(|c| truth.cell_for(c).map(|cell| cell.p_target()))
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExposureReport {
    /// Mean true target purchase probability of exposed items.
    pub ctcvr_proxy: f64,
    /// Share of exposures that put a low-transferability category in front
    /// of a user with no target interest in it.
    pub nfr_proxy: f64,
    pub exposed: usize,
}

/// Exposes the top `k` candidates of each request by score. Ties keep
/// candidate order.
pub fn simulate_exposure(
    requests: &[Request],
    scores: &[Vec<f64>],
    truth: Option<&GroundTruth>,
    cfg: &ExposureConfig,
) -> Result<ExposureReport> {
    let truth = truth.ok_or_else(|| {
        Error::Unsupported("exposure simulation needs the synthetic ground truth".into())
    })?;
    if cfg.k == 0 {
        return Err(Error::Config("sim.k must be >= 1".into()));
    }
    if scores.len() != requests.len() {
        return Err(Error::Dimension(format!(
            "{} score lists for {} requests",
            scores.len(),
            requests.len()
        )));
    }
    let mut exposed = 0usize;
    let mut p_sum = 0.0;
    let mut negative = 0usize;
    for (req, s) in requests.iter().zip(scores) {
        if s.len() != req.candidates.len() {
            return Err(Error::Dimension(format!(
                "{} scores for {} candidates",
                s.len(),
                req.candidates.len()
            )));
        }
        if let Some(bad) = s.iter().find(|v| v.is_nan()) {
            return Err(Error::NonFinite(format!("candidate score {bad}")));
        }
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        for &i in order.iter().take(cfg.k) {
            let row = &req.candidates[i];
            let cell = truth.cell_for(row)?;
            let p = cell.p_target();
            let cat = row[Field::Cat1.index()] as usize;
            if truth.transferability(cat) <= NEGATIVE_TRANSFER_MAX && p < cfg.nfr_threshold {
                negative += 1;
            }
            p_sum += p;
            exposed += 1;
        }
    }
    if exposed == 0 {
        return Err(Error::Contract("no exposures simulated".into()));
    }
    Ok(ExposureReport {
        ctcvr_proxy: p_sum / exposed as f64,
        nfr_proxy: negative as f64 / exposed as f64,
        exposed,
    })
}
