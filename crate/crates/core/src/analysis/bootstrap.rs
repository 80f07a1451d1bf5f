//! Topic bootstrap of the disagreement estimates.
//!
//! Each resample draws as many topics as there are, with replacement, and
//! re-estimates the table from all pairs of the drawn topics (a topic drawn
//! twice contributes its pairs twice). Cells that are undefined in a
//! resample are recorded as missing rather than zero.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disagreement::{estimate, Estimator, JudgingDesign, UserModel};
use crate::error::{PrmError, Result};
use crate::judgments::JudgmentPair;
use crate::rng;
use crate::scale::{Level, RelevanceScale};
use crate::stats::{self, FiveNumber};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub level: Level,
    pub label: String,
    /// Defined estimates, in resample order.
    pub samples: Vec<f64>,
    pub missing: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation across resamples.
    pub std: Option<f64>,
    pub summary: Option<FiveNumber>,
}

impl BootstrapResult {
    fn from_samples(level: Level, label: String, samples: Vec<f64>, missing: usize) -> Self {
        Self {
            level,
            label,
            mean: stats::mean(&samples),
            std: stats::sample_std(&samples),
            summary: FiveNumber::of(&samples),
            samples,
            missing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub n_resamples: usize,
    pub seed: u64,
    /// Resamples in which estimation failed outright (e.g. no usable pairs).
    pub failed_resamples: usize,
    pub levels: Vec<BootstrapResult>,
}

impl BootstrapSummary {
    pub fn level(&self, level: Level) -> Option<&BootstrapResult> {
        self.levels.iter().find(|l| l.level == level)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn bootstrap_topics(
    pairs_by_topic: &BTreeMap<String, Vec<JudgmentPair>>,
    user_model: UserModel,
    scale: &RelevanceScale,
    estimator: Estimator,
    design: JudgingDesign,
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    let topics: Vec<&Vec<JudgmentPair>> = pairs_by_topic
        .values()
        .filter(|pairs| !pairs.is_empty())
        .collect();
    if topics.len() < 2 {
        return Err(PrmError::Analysis(format!(
            "the topic bootstrap needs at least two topics with double judgments, found {}",
            topics.len()
        )));
    }
    if n_resamples == 0 {
        return Err(PrmError::Analysis("n_resamples must be ≥ 1".into()));
    }

    let resamples: Vec<Option<Vec<Option<f64>>>> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream_rng(seed, r as u64);
            let mut pairs = Vec::new();
            for _ in 0..topics.len() {
                pairs.extend_from_slice(topics[rng::index(&mut rng, topics.len())]);
            }
            estimate(&pairs, user_model, scale, estimator, design)
                .ok()
                .map(|t| t.cells().iter().map(|c| c.estimate()).collect())
        })
        .collect();

    let failed_resamples = resamples.iter().filter(|r| r.is_none()).count();
    let levels = (0..scale.n_levels())
        .map(|level| {
            let mut samples = Vec::with_capacity(n_resamples);
            let mut missing = 0;
            for r in &resamples {
                match r.as_ref().and_then(|cells| cells[level]) {
                    Some(p) => samples.push(p),
                    None => missing += 1,
                }
            }
            BootstrapResult::from_samples(
                level,
                scale.label(level).unwrap_or_default().to_string(),
                samples,
                missing,
            )
        })
        .collect();

    Ok(BootstrapSummary {
        n_resamples,
        seed,
        failed_resamples,
        levels,
    })
}
