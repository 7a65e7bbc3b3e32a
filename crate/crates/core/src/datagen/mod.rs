//! Synthetic multi-domain purchase logs with a known interest model.
//!
//! Users belong to segments (age × gender × occupation); items belong to a
//! level-1 category with a level-2/3 taxonomy underneath. For every
//! (segment, category) pair the world draws how the segment's interest in the
//! category shows up across domains:
//!
//! * `shared`: purchases in the source domains carry over to the target domain
//!   with a scene-dependent transfer rate;
//! * `source_only`: purchases happen in source domains only (the sporadic
//!   "medicine in search" pattern), so transferring them is harmful;
//! * `target_only`: purchases happen in the target domain only;
//! * `none`: only a small background target rate.
//!
//! A category's transferability τ is the probability that an interested
//! segment is `shared`. Categories with τ ≤ 0.05 are the negative-transfer
//! plant and categories with τ ≥ 0.8 the positive plant.

mod log;
mod record;
mod split;
mod world;

pub use log::{read_log, read_log_from, write_log, write_log_to, LogStats};
pub use record::{FeatureRow, Field, FieldGroup, InteractionRecord, Vocab, NUM_FIELDS};
pub use split::split;
pub use world::{
    generate, CategorySpec, GroundTruth, InterestMode, InterestModel, TruthCell, WorldConfig,
    NEGATIVE_TRANSFER_MAX, POSITIVE_TRANSFER_MIN,
};
