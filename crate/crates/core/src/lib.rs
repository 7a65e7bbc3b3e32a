//! Explicit cross-domain interest transfer for CTCVR prediction.
//!
//! The crate builds supervision for interest transfer from multi-domain
//! purchase logs and trains a model whose score is the sum of a target-domain
//! interest and a gated share of source-domain interest:
//!
//! ```text
//! P_whole = P_target + P_source * P_trans,   served as min(1, P_whole)
//! ```
//!
//! * [`tensor`]: dense tensors, a reverse-mode tape and Adam.
//! * [`datagen`]: a synthetic multi-domain world with planted transferable and
//!   non-transferable categories, plus the log file format.
//! * [`labels`]: source-label aggregation, item group consistency interest and
//!   the interest combination label.
//! * [`model`]: shared-expert interest towers, the scene selector and the
//!   explicit combination.
//! * [`training`]: joint loss, training loop, metrics, exposure simulation,
//!   ablations and λ sweeps.
//! * [`cli`]: the `exit-cdr` command-line front end.
//!
//! The guide in `book/` walks through each piece; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod cli;
pub mod config;
pub mod datagen;
mod error;
pub mod labels;
pub mod model;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/tensor.md")]
    mod tensor {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/labels.md")]
    mod labels {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
