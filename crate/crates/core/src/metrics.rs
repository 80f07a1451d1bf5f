//! Relevance counts, expected precision and (n)DCG under pluggable gains.
//!
//! With gains `g(i) = p(R | i)` every measure here that is linear in the
//! per-result relevance becomes the expected value of its binary
//! counterpart for a random user: the count is the expected number of
//! relevant results and DCG@k is the expected binary DCG@k.

use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::disagreement::DisagreementTable;
use crate::error::{PrmError, Result};
use crate::gains::{Discount, GainScheme};
use crate::judgments::{JudgmentSet, NeedId};
use crate::run::RunRanking;
use crate::scale::Level;
use crate::stats;

/// Level of each ranked result; `None` marks a repeated document that
/// occupies its rank but earns nothing.
pub type RankedLevels = Vec<Option<Level>>;

/// Per-level counts `n_i` of a result set.
pub fn level_histogram<I>(levels: I, n_levels: usize) -> Vec<u64>
where
    I: IntoIterator<Item = Level>,
{
    let mut hist = vec![0u64; n_levels];
    for level in levels {
        hist[level] += 1;
    }
    hist
}

/// Number of results at or above the threshold.
pub fn count_binary(histogram: &[u64], threshold: Level) -> f64 {
    histogram.iter().skip(threshold).sum::<u64>() as f64
}

/// `Σ n_i g(i)`.
pub fn count_with_gains(histogram: &[u64], scheme: &GainScheme) -> f64 {
    histogram
        .iter()
        .zip(scheme.gains())
        .map(|(&n, g)| n as f64 * g)
        .sum()
}

/// Expected number of relevant results for a random user, `Σ n_i p(R | i)`.
pub fn count_prm(histogram: &[u64], table: &DisagreementTable) -> Result<f64> {
    let mut total = 0.0;
    for (level, &n) in histogram.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let p = table.p(level).ok_or_else(|| {
            PrmError::Metric(format!(
                "p(R|{level}) is undefined but {n} results have level {level}"
            ))
        })?;
        total += n as f64 * p;
    }
    Ok(total)
}

fn top_levels(levels: &[Option<Level>], depth: usize) -> impl Iterator<Item = Level> + '_ {
    levels.iter().take(depth).filter_map(|l| *l)
}

/// Expected precision at rank `n`: expected relevant count in the top `n`
/// divided by `n`.
pub fn expected_precision_at(
    levels: &[Option<Level>],
    table: &DisagreementTable,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(PrmError::validation("precision cutoff must be ≥ 1"));
    }
    let hist = level_histogram(top_levels(levels, n), table.scale().n_levels());
    Ok(count_prm(&hist, table)? / n as f64)
}

/// Classical precision at rank `n` for users relevant at `level ≥ θ`.
pub fn binary_precision_at(levels: &[Option<Level>], threshold: Level, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(PrmError::validation("precision cutoff must be ≥ 1"));
    }
    let hits = top_levels(levels, n).filter(|&l| l >= threshold).count();
    Ok(hits as f64 / n as f64)
}

/// `DCG@k = Σ_{r=1}^{min(k, len)} c(r) g(i(r))`.
pub fn dcg_at_k(
    levels: &[Option<Level>],
    scheme: &GainScheme,
    discount: Discount,
    k: usize,
) -> f64 {
    levels
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, level)| match level {
            Some(l) => discount.at(i + 1) * scheme.gain(*l),
            None => 0.0,
        })
        .sum()
}

/// DCG@k of `pool` ordered by non-increasing gain.
pub fn ideal_dcg_at_k(pool: &[Level], scheme: &GainScheme, discount: Discount, k: usize) -> f64 {
    if pool.is_empty() {
        warn!("ideal DCG requested for an empty judgment pool");
        return 0.0;
    }
    let mut gains: Vec<f64> = pool.iter().map(|&l| scheme.gain(l)).collect();
    gains.sort_by(|a, b| b.total_cmp(a));
    gains
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| discount.at(i + 1) * g)
        .sum()
}

/// Aggregated per-topic values of one measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discount: Option<String>,
    pub per_topic: BTreeMap<String, f64>,
    pub mean: f64,
    /// Sample standard deviation (`n - 1`) over `sqrt(n)`; absent for a single topic.
    pub stderr: Option<f64>,
    pub n_topics: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
}

impl MetricReport {
    /// Aggregates per-topic values; the reduction runs in ascending topic order.
    pub fn from_values(
        metric: impl Into<String>,
        per_topic: BTreeMap<String, f64>,
        excluded: Vec<String>,
    ) -> Result<Self> {
        let metric = metric.into();
        let values: Vec<f64> = per_topic.values().copied().collect();
        let mean = stats::mean(&values)
            .ok_or_else(|| PrmError::Metric(format!("{metric}: no topic could be evaluated")))?;
        Ok(Self {
            metric,
            k: None,
            discount: None,
            n_topics: values.len(),
            stderr: stats::std_error(&values),
            mean,
            per_topic,
            excluded,
        })
    }

    fn with_params(mut self, k: Option<usize>, discount: Option<Discount>) -> Self {
        self.k = k;
        self.discount = discount.map(|d| d.to_string());
        self
    }
}

/// Which documents form the nDCG normalization pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IdealPool {
    /// Every judged document of the topic.
    #[default]
    Judged,
    /// Only the documents the run retrieved.
    RunLocal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Fail on retrieved documents without a judgment instead of treating
    /// them as level 0.
    pub strict_unjudged: bool,
    /// Fail when the run contains topics that were never judged.
    pub strict_topics: bool,
    pub ideal_pool: IdealPool,
}

/// Evaluates runs against one set of single judgments.
///
/// With intent-level judgments every `(topic, intent)` is scored as its own
/// information need against the run's list for the topic.
pub struct Evaluator<'a> {
    qrels: &'a JudgmentSet,
    levels: BTreeMap<NeedId, HashMap<String, Level>>,
    options: EvalOptions,
}

impl<'a> Evaluator<'a> {
    pub fn new(qrels: &'a JudgmentSet, options: EvalOptions) -> Self {
        Self {
            qrels,
            levels: qrels.levels_by_need(),
            options,
        }
    }

    pub fn qrels(&self) -> &JudgmentSet {
        self.qrels
    }

    fn needs_for<'r>(&'r self, run: &'r RunRanking) -> Result<Vec<&'r NeedId>> {
        if self.options.strict_topics {
            let judged = self.qrels.topics();
            if let Some((topic, _)) = run.topics().find(|(t, _)| !judged.contains(*t)) {
                return Err(PrmError::Metric(format!(
                    "run {} contains unjudged topic {topic}",
                    run.system_id()
                )));
            }
        }
        Ok(self
            .levels
            .keys()
            .filter(|need| run.topic(&need.topic_id).is_some())
            .collect())
    }

    /// Levels of the run's results for one need, first occurrences only.
    pub fn ranked_levels(&self, run: &RunRanking, need: &NeedId) -> Result<RankedLevels> {
        let judged = self.levels.get(need);
        let entries = run.topic(&need.topic_id).unwrap_or(&[]);
        let mut seen = HashSet::with_capacity(entries.len());
        entries
            .iter()
            .map(|e| {
                if !seen.insert(e.doc_id.as_str()) {
                    return Ok(None);
                }
                match judged.and_then(|m| m.get(&e.doc_id)) {
                    Some(&level) => Ok(Some(level)),
                    None if self.options.strict_unjudged => Err(PrmError::Metric(format!(
                        "run {}: document {} for {need} is unjudged",
                        run.system_id(),
                        e.doc_id
                    ))),
                    None => Ok(Some(0)),
                }
            })
            .collect()
    }

    fn per_need<F>(&self, run: &RunRanking, mut f: F) -> Result<BTreeMap<String, f64>>
    where
        F: FnMut(&NeedId, &RankedLevels) -> Result<f64>,
    {
        let mut out = BTreeMap::new();
        for need in self.needs_for(run)? {
            let levels = self.ranked_levels(run, need)?;
            out.insert(need.to_string(), f(need, &levels)?);
        }
        Ok(out)
    }

    /// Binary count of results at or above θ in the top `k`.
    pub fn count_binary_at(
        &self,
        run: &RunRanking,
        threshold: Level,
        k: usize,
    ) -> Result<MetricReport> {
        let n_levels = self.qrels.scale().n_levels();
        let values = self.per_need(run, |_, levels| {
            Ok(count_binary(
                &level_histogram(top_levels(levels, k), n_levels),
                threshold,
            ))
        })?;
        Ok(
            MetricReport::from_values(format!("count@{k}"), values, vec![])?
                .with_params(Some(k), None),
        )
    }

    /// Expected count of relevant results in the top `k`.
    pub fn count_prm_at(
        &self,
        run: &RunRanking,
        table: &DisagreementTable,
        k: usize,
    ) -> Result<MetricReport> {
        let n_levels = self.qrels.scale().n_levels();
        let values = self.per_need(run, |_, levels| {
            count_prm(&level_histogram(top_levels(levels, k), n_levels), table)
        })?;
        Ok(
            MetricReport::from_values(format!("count@{k}"), values, vec![])?
                .with_params(Some(k), None),
        )
    }

    pub fn binary_precision_at(
        &self,
        run: &RunRanking,
        threshold: Level,
        n: usize,
    ) -> Result<MetricReport> {
        let values = self.per_need(run, |_, levels| binary_precision_at(levels, threshold, n))?;
        Ok(MetricReport::from_values(format!("P@{n}"), values, vec![])?.with_params(Some(n), None))
    }

    pub fn expected_precision_at(
        &self,
        run: &RunRanking,
        table: &DisagreementTable,
        n: usize,
    ) -> Result<MetricReport> {
        let values = self.per_need(run, |_, levels| expected_precision_at(levels, table, n))?;
        Ok(MetricReport::from_values(format!("P@{n}"), values, vec![])?.with_params(Some(n), None))
    }

    /// Mean nDCG@k. Needs whose ideal DCG is zero are excluded with a warning.
    pub fn ndcg_at_k(
        &self,
        run: &RunRanking,
        scheme: &GainScheme,
        discount: Discount,
        k: usize,
    ) -> Result<MetricReport> {
        if k == 0 {
            return Err(PrmError::validation("k must be ≥ 1"));
        }
        if scheme.n_levels() != self.qrels.scale().n_levels() {
            return Err(PrmError::validation(format!(
                "gain scheme has {} levels, judgments use {}",
                scheme.n_levels(),
                self.qrels.scale().n_levels()
            )));
        }
        let mut values = BTreeMap::new();
        let mut excluded = Vec::new();
        for need in self.needs_for(run)? {
            let levels = self.ranked_levels(run, need)?;
            let pool: Vec<Level> = match self.options.ideal_pool {
                IdealPool::Judged => self.levels[need].values().copied().collect(),
                IdealPool::RunLocal => levels.iter().filter_map(|l| *l).collect(),
            };
            let ideal = ideal_dcg_at_k(&pool, scheme, discount, k);
            if ideal <= 0.0 {
                warn!("{need}: ideal DCG@{k} is zero, excluded from the mean");
                excluded.push(need.to_string());
                continue;
            }
            values.insert(
                need.to_string(),
                dcg_at_k(&levels, scheme, discount, k) / ideal,
            );
        }
        if values.is_empty() {
            return Err(PrmError::Metric(format!(
                "ndcg@{k}: every topic has zero ideal DCG"
            )));
        }
        Ok(
            MetricReport::from_values(format!("ndcg@{k}"), values, excluded)?
                .with_params(Some(k), Some(discount)),
        )
    }
}
