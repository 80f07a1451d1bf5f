//! Dependence of the estimates on the quality of the results sampled for
//! double judgment.
//!
//! Per topic, resources are ranked by how many of their results the
//! reference group labeled at the top quality levels (ties by resource id).
//! For `k = 1, 2, ...` the table is re-estimated from the pairs whose
//! documents belong to the top-`depth` results of the topic's `k` best
//! resources. A resource's results are taken in reference-file order.

use std::collections::{BTreeMap, HashSet};

use log::warn;

use super::{CurvePoint, LevelSeries, SensitivityCurve};
use crate::disagreement::{estimate, Estimator, JudgingDesign, UserModel};
use crate::error::{PrmError, Result};
use crate::judgments::{JudgmentPair, JudgmentSet};
use crate::scale::Level;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QualityOptions {
    /// Results per resource taken into account.
    pub depth: usize,
    /// Results at or above this level count toward a resource's quality.
    pub quality_level: Level,
}

impl QualityOptions {
    /// Top-10 results per resource, quality measured on the two highest levels.
    pub fn for_scale(scale: &crate::scale::RelevanceScale) -> Self {
        Self {
            depth: 10,
            quality_level: scale.top().saturating_sub(1).max(1),
        }
    }
}

struct RankedResources {
    /// Document lists of the topic's resources, best first.
    docs: Vec<Vec<String>>,
}

fn rank_resources(
    reference: &JudgmentSet,
    options: QualityOptions,
) -> Result<BTreeMap<String, RankedResources>> {
    // topic -> resource -> (quality count, docs in file order)
    let mut grouped: BTreeMap<&str, BTreeMap<&str, (usize, Vec<String>)>> = BTreeMap::new();
    let mut without_resource = 0usize;
    for j in reference.iter() {
        let Some(resource) = j.resource_id.as_deref() else {
            without_resource += 1;
            continue;
        };
        let entry = grouped
            .entry(&j.topic_id)
            .or_default()
            .entry(resource)
            .or_default();
        if entry.1.len() < options.depth {
            if j.level >= options.quality_level {
                entry.0 += 1;
            }
            entry.1.push(j.doc_id.clone());
        }
    }
    if grouped.is_empty() {
        return Err(PrmError::Analysis(
            "no resource metadata: reference judgments need resource=<id> annotations".into(),
        ));
    }
    if without_resource > 0 {
        warn!("{without_resource} reference judgments without a resource id are ignored");
    }
    Ok(grouped
        .into_iter()
        .map(|(topic, resources)| {
            let mut ranked: Vec<(&str, (usize, Vec<String>))> = resources.into_iter().collect();
            ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then_with(|| a.0.cmp(b.0)));
            (
                topic.to_string(),
                RankedResources {
                    docs: ranked.into_iter().map(|(_, (_, docs))| docs).collect(),
                },
            )
        })
        .collect())
}

/// Estimates `p(R | i)` from pairs restricted to the top-`k` resources per
/// topic, for `k = 1..=K` where `K` is the largest resource count of any topic.
pub fn quality_sensitivity(
    reference: &JudgmentSet,
    pairs: &[JudgmentPair],
    user_model: UserModel,
    estimator: Estimator,
    design: JudgingDesign,
    options: QualityOptions,
) -> Result<SensitivityCurve> {
    let scale = reference.scale();
    let ranked = rank_resources(reference, options)?;
    let max_k = ranked.values().map(|r| r.docs.len()).max().unwrap_or(0);

    let mut x = Vec::with_capacity(max_k);
    let mut points: Vec<Vec<CurvePoint>> = vec![Vec::with_capacity(max_k); scale.n_levels()];
    for k in 1..=max_k {
        let allowed: HashSet<(&str, &str)> = ranked
            .iter()
            .flat_map(|(topic, r)| {
                r.docs
                    .iter()
                    .take(k)
                    .flatten()
                    .map(move |d| (topic.as_str(), d.as_str()))
            })
            .collect();
        let subset: Vec<JudgmentPair> = pairs
            .iter()
            .filter(|p| allowed.contains(&(p.topic_id.as_str(), p.doc_id.as_str())))
            .cloned()
            .collect();
        let table = estimate(&subset, user_model, scale, estimator, design).ok();
        x.push(k);
        for (level, series) in points.iter_mut().enumerate() {
            let cell = table.as_ref().and_then(|t| t.cell(level));
            series.push(CurvePoint {
                mean: cell.and_then(|c| c.estimate()),
                std: cell.and_then(|c| c.sigma()),
                n: cell.map(|c| c.denominator).unwrap_or(0),
            });
        }
    }

    Ok(SensitivityCurve {
        x_label: "top_k_resources".into(),
        x,
        series: points
            .into_iter()
            .enumerate()
            .map(|(level, points)| LevelSeries {
                level,
                label: scale.label(level).unwrap_or_default().to_string(),
                points,
            })
            .collect(),
    })
}
