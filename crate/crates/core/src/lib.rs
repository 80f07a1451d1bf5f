//! Evaluation with graded relevance judgments whose levels are mapped to
//! probabilities of relevance estimated from assessor disagreement.
//!
//! The crate reads judgments, runs and scale descriptors, estimates the
//! disagreement table `p(R | i)` from double judgments, computes count,
//! precision and nDCG variants on top of it, and provides the
//! meta-analyses (topic bootstrap, annotation budget, sample quality,
//! ranking robustness) used to check that the estimates are trustworthy.

pub mod analysis;
pub mod disagreement;
pub mod error;
pub mod gains;
pub mod judgments;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod run;
pub mod scale;
pub mod stats;
pub mod synth;
mod textio;
pub mod topics;

pub use disagreement::{
    estimate, estimate_one_sided, estimate_symmetric, stratified_estimate, Direction,
    DisagreementCell, DisagreementTable, Estimator, JudgingDesign, UserModel,
};
pub use error::{PrmError, Result};
pub use gains::{Discount, GainKind, GainScheme};
pub use judgments::{
    pair_judgments, parse_pairs, parse_qrels, Judgment, JudgmentPair, JudgmentSet, NeedId,
};
pub use metrics::{EvalOptions, Evaluator, IdealPool, MetricReport};
pub use run::{parse_run, RunRanking};
pub use scale::{Level, RelevanceScale};
