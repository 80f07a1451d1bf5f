//! Meta-analyses over disagreement estimates and system evaluations.

mod bootstrap;
mod budget;
mod quality;
mod robustness;
mod tau;

pub use bootstrap::{bootstrap_topics, BootstrapResult, BootstrapSummary};
pub use budget::{first_separation, simulate_annotation_rounds};
pub use quality::{quality_sensitivity, QualityOptions};
pub use robustness::{
    robustness_study, scheme_correlations, system_ranking, NamedScheme, RobustnessRow,
    SchemeCorrelation,
};
pub use tau::{kendall_tau, pair_counts, tau, PairCounts, SystemRanking, TauVariant};

use serde::{Deserialize, Serialize};

use crate::scale::Level;

/// One point of a per-level curve: a central value and its spread.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Number of observations behind the point (rounds, or conditioning judgments).
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSeries {
    pub level: Level,
    pub label: String,
    pub points: Vec<CurvePoint>,
}

/// `p(R | i)` as a function of a sweep coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub x_label: String,
    pub x: Vec<usize>,
    pub series: Vec<LevelSeries>,
}

impl SensitivityCurve {
    pub fn series(&self, level: Level) -> Option<&LevelSeries> {
        self.series.iter().find(|s| s.level == level)
    }
}
