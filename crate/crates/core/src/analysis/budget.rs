//! Annotation-budget simulation: how the estimates settle as the number of
//! double judgments grows.
//!
//! Each round samples the available pairs with replacement, one at a time,
//! and re-estimates the table whenever the sample reaches a budget on the
//! grid. Per budget the curve reports the mean and sample standard
//! deviation of each `p(R | i)` across rounds.

use rayon::prelude::*;

use super::{CurvePoint, LevelSeries, SensitivityCurve};
use crate::disagreement::{estimate, Estimator, JudgingDesign, UserModel};
use crate::error::{PrmError, Result};
use crate::judgments::JudgmentPair;
use crate::rng;
use crate::scale::{Level, RelevanceScale};
use crate::stats;

#[allow(clippy::too_many_arguments)]
pub fn simulate_annotation_rounds(
    pairs: &[JudgmentPair],
    user_model: UserModel,
    scale: &RelevanceScale,
    estimator: Estimator,
    design: JudgingDesign,
    n_rounds: usize,
    budgets: &[usize],
    seed: u64,
) -> Result<SensitivityCurve> {
    if pairs.is_empty() {
        return Err(PrmError::Analysis("no double judgments to resample".into()));
    }
    if n_rounds == 0 {
        return Err(PrmError::Analysis("n_rounds must be ≥ 1".into()));
    }
    let budgets: Vec<usize> = budgets.iter().copied().filter(|&b| b > 0).collect();
    if budgets.is_empty() {
        return Err(PrmError::Analysis("no positive budget on the grid".into()));
    }
    if budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PrmError::Analysis(
            "budgets must be strictly increasing".into(),
        ));
    }
    let max_budget = *budgets.last().expect("non-empty");

    // rounds[r][b][level]
    let rounds: Vec<Vec<Vec<Option<f64>>>> = (0..n_rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = rng::stream_rng(seed, round as u64);
            let mut sample = Vec::with_capacity(max_budget);
            let mut out = Vec::with_capacity(budgets.len());
            for &budget in &budgets {
                while sample.len() < budget {
                    sample.push(pairs[rng::index(&mut rng, pairs.len())].clone());
                }
                out.push(
                    match estimate(&sample, user_model, scale, estimator, design) {
                        Ok(t) => t.cells().iter().map(|c| c.estimate()).collect(),
                        Err(_) => vec![None; scale.n_levels()],
                    },
                );
            }
            out
        })
        .collect();

    let series = (0..scale.n_levels())
        .map(|level| LevelSeries {
            level,
            label: scale.label(level).unwrap_or_default().to_string(),
            points: (0..budgets.len())
                .map(|b| {
                    let values: Vec<f64> = rounds.iter().filter_map(|r| r[b][level]).collect();
                    CurvePoint {
                        mean: stats::mean(&values),
                        std: stats::sample_std(&values),
                        n: values.len() as u64,
                    }
                })
                .collect(),
        })
        .collect();

    Ok(SensitivityCurve {
        x_label: "double_judgments".into(),
        x: budgets,
        series,
    })
}

/// Smallest sweep coordinate at which the one-standard-deviation bands of
/// two levels no longer overlap.
pub fn first_separation(curve: &SensitivityCurve, a: Level, b: Level) -> Option<usize> {
    let sa = curve.series(a)?;
    let sb = curve.series(b)?;
    curve
        .x
        .iter()
        .zip(sa.points.iter().zip(&sb.points))
        .find(|(_, (pa, pb))| match (pa.mean, pa.std, pb.mean, pb.std) {
            (Some(ma), Some(da), Some(mb), Some(db)) => (ma - mb).abs() > da + db,
            _ => false,
        })
        .map(|(x, _)| *x)
}
