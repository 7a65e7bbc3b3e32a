use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fit::{fit, Dataset, TrainConfig};
use super::loss::{LossBreakdown, LossWeights};
use super::metrics::{auc, logloss};
use super::simulate::{build_requests, score_requests, simulate_exposure, ExposureConfig};
use crate::datagen::{Field, GroundTruth, InteractionRecord, Vocab};
use crate::labels::{compute_gci, label_dataset, GciMap, IclMode};
use crate::model::{Model, ModelConfig, ServingScore, SsnMode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Full,
    /// No selector and no combination loss: every source signal is added.
    NoIcl,
    /// Selector without scene features.
    NoSsn,
    /// Combination loss alone, no stop-gradient.
    NoJointLoss,
    IclEtaZero,
    IclAlwaysEta,
    /// Target tower alone.
    SingleDomainDnn,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Full,
        Variant::NoIcl,
        Variant::NoSsn,
        Variant::NoJointLoss,
        Variant::IclEtaZero,
        Variant::IclAlwaysEta,
        Variant::SingleDomainDnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoIcl => "no_icl",
            Variant::NoSsn => "no_ssn",
            Variant::NoJointLoss => "no_joint_loss",
            Variant::IclEtaZero => "icl_eta_zero",
            Variant::IclAlwaysEta => "icl_always_eta",
            Variant::SingleDomainDnn => "single_domain_dnn",
        }
    }

    /// Rewrites the configs into this variant.
    pub fn apply(self, train: &mut TrainConfig, model: &mut ModelConfig) {
        train.variant = self;
        match self {
            Variant::Full => {}
            Variant::NoIcl => {
                model.ssn = SsnMode::Off;
                train.lambda3 = 0.0;
            }
            Variant::NoSsn => model.ssn = SsnMode::HiddenOnly,
            Variant::NoJointLoss => {
                train.lambda1 = 0.0;
                train.lambda2 = 0.0;
                train.stop_gradient = false;
            }
            Variant::IclEtaZero => train.icl_mode = IclMode::EtaZero,
            Variant::IclAlwaysEta => train.icl_mode = IclMode::AlwaysEta,
            Variant::SingleDomainDnn => {
                train.lambda2 = 0.0;
                train.lambda3 = 0.0;
                model.ssn = SsnMode::Off;
                model.serving_score = ServingScore::TargetOnly;
            }
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                Error::Config(format!("unknown variant `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Logs and, for synthetic data, the planted truth.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    pub train: Vec<InteractionRecord>,
    pub test: Vec<InteractionRecord>,
    pub truth: Option<GroundTruth>,
    pub vocab: Vocab,
    /// Precomputed group consistency interest; derived from `train` if absent.
    pub gci: Option<GciMap>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub model: ModelConfig,
    pub sim: ExposureConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: Variant,
    pub seed: u64,
    pub weights: LossWeights,
    pub auc: f64,
    pub logloss: f64,
    pub ctcvr_proxy: Option<f64>,
    pub nfr_proxy: Option<f64>,
    /// Mean `P_trans` over held-out rows of low- and high-transferability
    /// categories.
    pub p_trans_negative: Option<f64>,
    pub p_trans_positive: Option<f64>,
    pub final_terms: LossBreakdown,
    pub epoch_losses: Vec<f64>,
    pub converged: bool,
    pub test_examples: usize,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |x| format!("{x:.6}"))
}

impl MetricsReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let losses: Vec<String> = self.epoch_losses.iter().map(|l| format!("{l:.6}")).collect();
        let _ = writeln!(s, "variant: {}", self.variant);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(
            s,
            "lambdas: {} {} {}",
            self.weights.lambda1, self.weights.lambda2, self.weights.lambda3
        );
        let _ = writeln!(s, "auc: {:.6}", self.auc);
        let _ = writeln!(s, "logloss: {:.6}", self.logloss);
        let _ = writeln!(s, "ctcvr_proxy: {}", opt(self.ctcvr_proxy));
        let _ = writeln!(s, "nfr_proxy: {}", opt(self.nfr_proxy));
        let _ = writeln!(s, "p_trans_negative: {}", opt(self.p_trans_negative));
        let _ = writeln!(s, "p_trans_positive: {}", opt(self.p_trans_positive));
        let _ = writeln!(s, "loss_ce_target: {:.6}", self.final_terms.ce_target);
        let _ = writeln!(s, "loss_ce_source: {:.6}", self.final_terms.ce_source);
        let _ = writeln!(s, "loss_icl_l1: {:.6}", self.final_terms.icl_l1);
        let _ = writeln!(s, "epoch_losses: {}", losses.join(" "));
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "test_examples: {}", self.test_examples);
        s
    }

    pub const TSV_HEADER: &'static str =
        "variant\tseed\tlambda1\tlambda2\tlambda3\tauc\tlogloss\tctcvr_proxy\tnfr_proxy\tp_trans_negative\tp_trans_positive\tconverged";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
            self.variant,
            self.seed,
            self.weights.lambda1,
            self.weights.lambda2,
            self.weights.lambda3,
            self.auc,
            self.logloss,
            opt(self.ctcvr_proxy),
            opt(self.nfr_proxy),
            opt(self.p_trans_negative),
            opt(self.p_trans_positive),
            self.converged
        )
    }

    /// Appends one row to a TSV ledger in a single write, adding the header
    /// to a new file.
    pub fn append_to_ledger(&self, path: &Path) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut line = String::new();
        if fresh {
            line.push_str(Self::TSV_HEADER);
            line.push('\n');
        }
        line.push_str(&self.tsv_row());
        line.push('\n');
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        f.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Trains and evaluates the configured variant.
pub fn run_experiment(data: &ExperimentData, cfg: &ExperimentConfig) -> Result<(Model, MetricsReport)> {
    let mut train_cfg = cfg.train.clone();
    let mut model_cfg = cfg.model.clone();
    train_cfg.variant.apply(&mut train_cfg, &mut model_cfg);
    train_cfg.validate()?;

    let gci = match &data.gci {
        Some(g) => g.clone(),
        None => compute_gci(&data.train)?,
    };
    let examples = label_dataset(&data.train, &gci, train_cfg.icl_mode, &data.vocab)?;
    let dataset = Dataset::new(examples);
    let mut model = Model::new(model_cfg, data.vocab, train_cfg.seed)?;
    let fitted = fit(&mut model, &dataset, &train_cfg)?;
    let report = evaluate(&model, data, cfg, &train_cfg, fitted.epoch_losses, fitted.epoch_terms.last().copied(), fitted.converged)?;
    Ok((model, report))
}

/// Held-out metrics for a trained model.
fn evaluate(
    model: &Model,
    data: &ExperimentData,
    cfg: &ExperimentConfig,
    train_cfg: &TrainConfig,
    epoch_losses: Vec<f64>,
    final_terms: Option<LossBreakdown>,
    converged: bool,
) -> Result<MetricsReport> {
    let rows: Vec<_> = data.test.iter().map(|r| r.features).collect();
    let labels: Vec<f64> = data.test.iter().map(|r| f64::from(r.y_target)).collect();
    let preds = model.predict(&rows)?;
    let mode = model.config().serving_score;
    let scores: Vec<f64> = preds.iter().map(|p| p.serving(mode)).collect();

    let (mut ctcvr, mut nfr, mut neg, mut pos) = (None, None, None, None);
    if let Some(truth) = &data.truth {
        let requests = build_requests(&data.test, &cfg.sim)?;
        let slate_scores = score_requests(model, &requests)?;
        let exposure = simulate_exposure(&requests, &slate_scores, Some(truth), &cfg.sim)?;
        ctcvr = Some(exposure.ctcvr_proxy);
        nfr = Some(exposure.nfr_proxy);
        let mean_over = |cats: &[usize]| -> Option<f64> {
            let vals: Vec<f64> = rows
                .iter()
                .zip(&preds)
                .filter(|(r, _)| cats.contains(&(r[Field::Cat1.index()] as usize)))
                .map(|(_, p)| p.p_trans)
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        neg = mean_over(&truth.negative_categories());
        pos = mean_over(&truth.positive_categories());
    }
    Ok(MetricsReport {
        variant: train_cfg.variant,
        seed: train_cfg.seed,
        weights: train_cfg.weights(),
        auc: auc(&scores, &labels)?,
        logloss: logloss(&scores, &labels)?,
        ctcvr_proxy: ctcvr,
        nfr_proxy: nfr,
        p_trans_negative: neg,
        p_trans_positive: pos,
        final_terms: final_terms.unwrap_or_default(),
        epoch_losses,
        converged,
        test_examples: data.test.len(),
    })
}

/// Evaluates an already trained model without further training.
pub fn evaluate_model(model: &Model, data: &ExperimentData, cfg: &ExperimentConfig) -> Result<MetricsReport> {
    evaluate(model, data, cfg, &cfg.train, Vec::new(), None, true)
}

pub fn run_ablation(variant: Variant, data: &ExperimentData, cfg: &ExperimentConfig) -> Result<MetricsReport> {
    let mut cfg = cfg.clone();
    cfg.train.variant = variant;
    run_experiment(data, &cfg).map(|(_, report)| report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub weights: LossWeights,
    pub auc: f64,
    pub logloss: f64,
    pub converged: bool,
    /// Every λ is zero, so nothing was trained.
    pub degenerate: bool,
}

/// Each λ in turn over `{0, 0.5, 1, 2}` with the other two at 1.
pub fn default_lambda_grid() -> Vec<LossWeights> {
    let mut grid = vec![LossWeights::default()];
    for which in 0..3 {
        for v in [0.0, 0.5, 2.0] {
            let mut l = [1.0; 3];
            l[which] = v;
            grid.push(LossWeights::new(l[0], l[1], l[2]));
        }
    }
    grid
}

/// One fit per grid point at the configured seed.
pub fn sweep_lambda(grid: &[LossWeights], data: &ExperimentData, cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|w| {
            let mut c = cfg.clone();
            c.train.lambda1 = w.lambda1;
            c.train.lambda2 = w.lambda2;
            c.train.lambda3 = w.lambda3;
            let (_, r) = run_experiment(data, &c)?;
            Ok(SweepRow {
                weights: *w,
                auc: r.auc,
                logloss: r.logloss,
                converged: r.converged,
                degenerate: w.all_zero(),
            })
        })
        .collect()
}

/// Tab-separated table, one row per grid point.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("lambda1\tlambda2\tlambda3\tauc\tlogloss\tconverged\tflag\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
            r.weights.lambda1,
            r.weights.lambda2,
            r.weights.lambda3,
            r.auc,
            r.logloss,
            r.converged,
            if r.degenerate { "degenerate" } else { "ok" }
        );
    }
    s
}

/// Comparison table for a set of ablation reports; the full variant is
/// marked as the baseline.
pub fn ablation_table(reports: &[MetricsReport]) -> String {
    let mut s = String::from("variant\tauc\tlogloss\tctcvr_proxy\tnfr_proxy\tconverged\trole\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
            r.variant,
            r.auc,
            r.logloss,
            opt(r.ctcvr_proxy),
            opt(r.nfr_proxy),
            r.converged,
            if r.variant == Variant::Full { "baseline" } else { "ablation" }
        );
    }
    s
}
