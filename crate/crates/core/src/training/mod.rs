//! Joint loss, the training loop, offline metrics, exposure simulation and
//! the ablation and λ-sweep runners.
//!
//! The joint loss is
//!
//! ```text
//! λ1·CE(y_t, P_target) + λ2·CE(y_s, P_source) + λ3·|y_icl − (P_target + P_source·P_trans)|
//! ```
//!
//! with each term averaged over the batch.

mod ablation;
mod fit;
mod loss;
mod metrics;
mod simulate;

pub use ablation::{
    ablation_table, default_lambda_grid, evaluate_model, run_ablation, run_experiment, sweep_lambda,
    sweep_table, ExperimentConfig, ExperimentData, MetricsReport, SweepRow, Variant,
};
pub use fit::{fit, ConvergenceRule, Dataset, FitReport, TrainConfig};
pub use loss::{joint_loss, joint_loss_on_tape, BatchLabels, LossBreakdown, LossWeights};
pub use metrics::{auc, logloss};
pub use simulate::{
    build_requests, oracle_scores, score_requests, simulate_exposure, ExposureConfig, ExposureReport,
    Request,
};
