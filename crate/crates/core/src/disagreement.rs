//! Disagreement parameters `p(R | i)`: the probability that a random user
//! finds a result relevant, given that an independent assessor labeled it
//! with level `i`.
//!
//! Two estimators are provided over double judgments:
//!
//! * one-sided: condition on one group's labels and count how often the
//!   other group's label reaches the user threshold,
//!   `p(R | i) = N(U2 ≥ θ, U1 = i) / N(U1 = i)`;
//! * symmetric: pool both directions,
//!   `p(R | i) = (N(U1 ≥ θ, U2 = i) + N(U2 ≥ θ, U1 = i)) / (N(U2 = i) + N(U1 = i))`.
//!
//! The symmetric estimator is only valid when both groups judged the same
//! pool. If the second round was restricted to results the first group
//! rated above the lowest level, the level distribution of the second group
//! is biased and the pooled estimate comes out artificially high; use the
//! one-sided estimator conditioned on the first group instead.
//!
//! Each cell carries the binomial standard deviation
//! `sqrt(p (1 - p) / N_D)` of its ratio. For the symmetric estimator the two
//! pooled directions share their pairs, so this is an approximation there.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PrmError, Result};
use crate::judgments::JudgmentPair;
use crate::scale::{Level, RelevanceScale, ScaleLevel};

/// Binary user relevance: a result is relevant iff its level is `≥ θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserModel {
    threshold: Level,
}

impl UserModel {
    pub fn new(threshold: Level, scale: &RelevanceScale) -> Result<Self> {
        if threshold == 0 || threshold > scale.top() {
            return Err(PrmError::validation(format!(
                "threshold θ={threshold} must lie in 1..={}",
                scale.top()
            )));
        }
        Ok(Self { threshold })
    }

    /// Users satisfied only by top-level results (`θ = T`).
    pub fn top(scale: &RelevanceScale) -> Self {
        Self {
            threshold: scale.top(),
        }
    }

    pub fn threshold(&self) -> Level {
        self.threshold
    }

    pub fn is_relevant(&self, level: Level) -> bool {
        level >= self.threshold
    }
}

/// Which group's labels a one-sided estimate conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    ConditionOnU1,
    ConditionOnU2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Estimator {
    Symmetric,
    OneSided(Direction),
    /// Values supplied directly rather than estimated.
    Fixed,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Symmetric => "symmetric",
            Estimator::OneSided(Direction::ConditionOnU1) => "one-sided-u1",
            Estimator::OneSided(Direction::ConditionOnU2) => "one-sided-u2",
            Estimator::Fixed => "fixed",
        })
    }
}

impl FromStr for Estimator {
    type Err = PrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Estimator::Symmetric),
            "one-sided" | "one-sided-u1" => Ok(Estimator::OneSided(Direction::ConditionOnU1)),
            "one-sided-u2" => Ok(Estimator::OneSided(Direction::ConditionOnU2)),
            "fixed" => Ok(Estimator::Fixed),
            other => Err(PrmError::Config(format!("unknown estimator {other:?}"))),
        }
    }
}

impl Serialize for Estimator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Estimator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the second judgment round was collected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JudgingDesign {
    /// Both groups independently judged the same pool.
    #[default]
    SamePool,
    /// The second group only judged results the first rated above level 0.
    RestrictedSecondRound,
}

/// Standard deviation of a binomial success-rate estimate `n / d`.
pub fn cell_sigma(numerator: u64, denominator: u64) -> Result<f64> {
    if denominator == 0 {
        return Err(PrmError::Estimation(
            "standard deviation undefined: no judgments at this level".into(),
        ));
    }
    let p = numerator as f64 / denominator as f64;
    Ok((p * (1.0 - p) / denominator as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisagreementCell {
    pub level: Level,
    pub numerator: u64,
    pub denominator: u64,
    pub override_value: Option<f64>,
}

impl DisagreementCell {
    /// The ratio estimate; `None` when no judgments conditioned on this level.
    pub fn estimate(&self) -> Option<f64> {
        (self.denominator > 0).then(|| self.numerator as f64 / self.denominator as f64)
    }

    /// The value used as gain: the override if present, else the estimate.
    pub fn p(&self) -> Option<f64> {
        self.override_value.or_else(|| self.estimate())
    }

    /// Binomial standard deviation of [`Self::estimate`], also for overridden cells.
    pub fn sigma(&self) -> Option<f64> {
        cell_sigma(self.numerator, self.denominator).ok()
    }

    pub fn is_overridden(&self) -> bool {
        self.override_value.is_some()
    }
}

/// Estimated `p(R | i)` for every level of a scale.
#[derive(Clone, Debug, PartialEq)]
pub struct DisagreementTable {
    scale: RelevanceScale,
    user_model: UserModel,
    cells: Vec<DisagreementCell>,
    estimator: Estimator,
    stratum: Option<String>,
}

impl DisagreementTable {
    /// Builds a table from `(numerator, denominator)` counts per level.
    pub fn from_counts(
        scale: RelevanceScale,
        user_model: UserModel,
        estimator: Estimator,
        counts: &[(u64, u64)],
    ) -> Result<Self> {
        if counts.len() != scale.n_levels() {
            return Err(PrmError::validation(format!(
                "expected {} cells, got {}",
                scale.n_levels(),
                counts.len()
            )));
        }
        UserModel::new(user_model.threshold, &scale)?;
        let cells = counts
            .iter()
            .enumerate()
            .map(|(level, &(numerator, denominator))| {
                if numerator > denominator {
                    Err(PrmError::validation(format!(
                        "level {level}: numerator {numerator} exceeds denominator {denominator}"
                    )))
                } else {
                    Ok(DisagreementCell {
                        level,
                        numerator,
                        denominator,
                        override_value: None,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scale,
            user_model,
            cells,
            estimator,
            stratum: None,
        })
    }

    /// A table without disagreement: `p = 1` at or above θ, `0` below.
    pub fn degenerate(scale: RelevanceScale, user_model: UserModel) -> Result<Self> {
        let counts: Vec<(u64, u64)> = (0..scale.n_levels())
            .map(|i| (u64::from(user_model.is_relevant(i)), 1))
            .collect();
        Self::from_counts(scale, user_model, Estimator::Fixed, &counts)
    }

    /// A table of fixed probabilities, one per level, stored as overrides.
    pub fn from_probabilities(
        scale: RelevanceScale,
        user_model: UserModel,
        probabilities: &[f64],
    ) -> Result<Self> {
        let counts = vec![(0, 0); probabilities.len()];
        let mut table = Self::from_counts(scale, user_model, Estimator::Fixed, &counts)?;
        for (level, &p) in probabilities.iter().enumerate() {
            table = table.with_override(level, p)?;
        }
        Ok(table)
    }

    pub fn scale(&self) -> &RelevanceScale {
        &self.scale
    }

    pub fn user_model(&self) -> UserModel {
        self.user_model
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn stratum(&self) -> Option<&str> {
        self.stratum.as_deref()
    }

    pub fn with_stratum(mut self, stratum: impl Into<String>) -> Self {
        self.stratum = Some(stratum.into());
        self
    }

    pub fn cells(&self) -> &[DisagreementCell] {
        &self.cells
    }

    pub fn cell(&self, level: Level) -> Option<&DisagreementCell> {
        self.cells.get(level)
    }

    pub fn p(&self, level: Level) -> Option<f64> {
        self.cells.get(level).and_then(DisagreementCell::p)
    }

    /// Forces the value of one cell; the cell is flagged as overridden.
    pub fn with_override(mut self, level: Level, value: f64) -> Result<Self> {
        self.scale.check(level)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(PrmError::validation(format!(
                "override for level {level} must lie in [0, 1], got {value}"
            )));
        }
        self.cells[level].override_value = Some(value);
        Ok(self)
    }

    /// Sets `p(R | 0) := 0`.
    pub fn with_p0_zero(self) -> Self {
        self.with_override(0, 0.0)
            .expect("level 0 always exists and 0 is a valid probability")
    }

    /// Gain vector `p(R | i)` for `i = 0..=T`; fails on any undefined cell.
    pub fn gains(&self) -> Result<Vec<f64>> {
        self.cells
            .iter()
            .map(|c| {
                c.p().ok_or_else(|| {
                    PrmError::Metric(format!(
                        "p(R|{}) is undefined (no double judgments at level {}); supply an override",
                        self.scale.label(c.level).unwrap_or("?"),
                        c.level
                    ))
                })
            })
            .collect()
    }

    /// Levels `i` whose estimate exceeds that of level `i + 1` by more than
    /// twice the sum of their standard deviations.
    pub fn monotonicity_violations(&self) -> Vec<Level> {
        self.cells
            .windows(2)
            .filter_map(|w| {
                let (lo, hi) = (&w[0], &w[1]);
                let (p_lo, p_hi) = (lo.p()?, hi.p()?);
                let band = 2.0 * (lo.sigma().unwrap_or(0.0) + hi.sigma().unwrap_or(0.0));
                (p_lo - p_hi > band).then_some(lo.level)
            })
            .collect()
    }

    /// Logs each of [`Self::monotonicity_violations`] as a warning.
    pub fn warn_non_monotone(&self) {
        for level in self.monotonicity_violations() {
            warn!(
                "p(R|{}) exceeds p(R|{}) by more than 2 standard deviations",
                level,
                level + 1
            );
        }
    }

    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            estimator: self.estimator,
            threshold: self.user_model.threshold,
            stratum: self.stratum.clone(),
            scale: self.scale.levels().collect(),
            cells: self
                .cells
                .iter()
                .map(|c| CellRecord {
                    level: c.level,
                    label: self.scale.label(c.level).unwrap_or_default().to_string(),
                    numerator: c.numerator,
                    denominator: c.denominator,
                    p: c.p(),
                    sigma: c.sigma(),
                    overridden: c.is_overridden(),
                })
                .collect(),
        }
    }

    /// Rebuilds a table from its serialized form. Stored `p` values are only
    /// trusted for overridden cells; everything else is recomputed from the
    /// counts.
    pub fn from_record(record: &TableRecord) -> Result<Self> {
        let scale =
            RelevanceScale::from_levels(record.scale.len().saturating_sub(1), &record.scale)?;
        let user_model = UserModel::new(record.threshold, &scale)?;
        let counts: Vec<(u64, u64)> = record
            .cells
            .iter()
            .map(|c| (c.numerator, c.denominator))
            .collect();
        for (i, c) in record.cells.iter().enumerate() {
            if c.level != i {
                return Err(PrmError::validation(format!(
                    "table cells must be listed in level order; found level {} at position {i}",
                    c.level
                )));
            }
        }
        let mut table = Self::from_counts(scale, user_model, record.estimator, &counts)?;
        for c in &record.cells {
            if c.overridden {
                let value = c.p.ok_or_else(|| {
                    PrmError::validation(format!("overridden cell {} has no p value", c.level))
                })?;
                table = table.with_override(c.level, value)?;
            }
        }
        table.stratum = record.stratum.clone();
        Ok(table)
    }
}

/// Serialized form of a [`DisagreementTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub estimator: Estimator,
    pub threshold: Level,
    #[serde(default)]
    pub stratum: Option<String>,
    pub scale: Vec<ScaleLevel>,
    pub cells: Vec<CellRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub level: Level,
    pub label: String,
    pub numerator: u64,
    pub denominator: u64,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(default)]
    pub overridden: bool,
}

fn check_pairs(pairs: &[JudgmentPair], scale: &RelevanceScale) -> Result<()> {
    if pairs.is_empty() {
        return Err(PrmError::Estimation("no double judgments".into()));
    }
    for p in pairs {
        scale.check(p.level_u1)?;
        scale.check(p.level_u2)?;
    }
    Ok(())
}

/// Adds the directed counts of `pairs` into `counts`.
fn add_directed_counts(
    counts: &mut [(u64, u64)],
    pairs: &[JudgmentPair],
    user_model: UserModel,
    direction: Direction,
) {
    for p in pairs {
        let (given, other) = match direction {
            Direction::ConditionOnU1 => (p.level_u1, p.level_u2),
            Direction::ConditionOnU2 => (p.level_u2, p.level_u1),
        };
        counts[given].1 += 1;
        if user_model.is_relevant(other) {
            counts[given].0 += 1;
        }
    }
}

fn finish(
    scale: &RelevanceScale,
    user_model: UserModel,
    estimator: Estimator,
    counts: &[(u64, u64)],
) -> Result<DisagreementTable> {
    if counts[1..].iter().all(|&(_, d)| d == 0) {
        return Err(PrmError::Estimation(
            "no usable double judgments: no pair is conditioned on a level above 0".into(),
        ));
    }
    DisagreementTable::from_counts(scale.clone(), user_model, estimator, counts)
}

/// One-sided estimate conditioned on the labels of one group.
pub fn estimate_one_sided(
    pairs: &[JudgmentPair],
    user_model: UserModel,
    scale: &RelevanceScale,
    direction: Direction,
) -> Result<DisagreementTable> {
    check_pairs(pairs, scale)?;
    let mut counts = vec![(0u64, 0u64); scale.n_levels()];
    add_directed_counts(&mut counts, pairs, user_model, direction);
    finish(scale, user_model, Estimator::OneSided(direction), &counts)
}

/// Symmetric estimate pooling both conditioning directions.
pub fn estimate_symmetric(
    pairs: &[JudgmentPair],
    user_model: UserModel,
    scale: &RelevanceScale,
    design: JudgingDesign,
) -> Result<DisagreementTable> {
    if design == JudgingDesign::RestrictedSecondRound {
        return Err(PrmError::Estimation(
            "the second judgment round only covers results rated above level 0 in the first; \
             the symmetric estimate would be artificially high, so the one-sided estimator \
             conditioned on u1 must be used"
                .into(),
        ));
    }
    check_pairs(pairs, scale)?;
    let mut counts = vec![(0u64, 0u64); scale.n_levels()];
    add_directed_counts(&mut counts, pairs, user_model, Direction::ConditionOnU1);
    add_directed_counts(&mut counts, pairs, user_model, Direction::ConditionOnU2);
    finish(scale, user_model, Estimator::Symmetric, &counts)
}

/// Dispatches to the estimator named by `estimator`.
pub fn estimate(
    pairs: &[JudgmentPair],
    user_model: UserModel,
    scale: &RelevanceScale,
    estimator: Estimator,
    design: JudgingDesign,
) -> Result<DisagreementTable> {
    match estimator {
        Estimator::Symmetric => estimate_symmetric(pairs, user_model, scale, design),
        Estimator::OneSided(direction) => estimate_one_sided(pairs, user_model, scale, direction),
        Estimator::Fixed => Err(PrmError::Estimation(
            "the fixed estimator takes its values from a table file".into(),
        )),
    }
}

/// Separate estimates per stratum (e.g. navigational vs informational
/// topics). Every paired topic must have a stratum; strata listed in
/// `strata` without any pair are omitted with a warning.
pub fn stratified_estimate(
    pairs: &[JudgmentPair],
    strata: &BTreeMap<String, String>,
    user_model: UserModel,
    scale: &RelevanceScale,
    estimator: Estimator,
    design: JudgingDesign,
) -> Result<BTreeMap<String, DisagreementTable>> {
    let mut grouped: BTreeMap<&str, Vec<JudgmentPair>> = BTreeMap::new();
    for p in pairs {
        let stratum = strata
            .get(&p.topic_id)
            .ok_or_else(|| PrmError::validation(format!("topic {} has no stratum", p.topic_id)))?;
        grouped.entry(stratum).or_default().push(p.clone());
    }
    for stratum in strata.values() {
        if !grouped.contains_key(stratum.as_str()) {
            warn!("stratum {stratum} has no double judgments and is omitted");
        }
    }
    grouped
        .into_par_iter()
        .map(|(stratum, pairs)| {
            estimate(&pairs, user_model, scale, estimator, design)
                .map(|t| (stratum.to_string(), t.with_stratum(stratum)))
        })
        .collect()
}

/// `P(X ≥ m)` for `X ~ Binomial(n, p)`.
pub fn binomial_upper_tail(p: f64, m: u32, n: u32) -> f64 {
    let q = 1.0 - p;
    let mut coeff = 1.0f64;
    let mut total = 0.0;
    for j in 0..=n {
        if j > 0 {
            coeff *= f64::from(n - j + 1) / f64::from(j);
        }
        if j >= m {
            total += coeff * p.powi(j as i32) * q.powi((n - j) as i32);
        }
    }
    total.clamp(0.0, 1.0)
}

/// Probability that at least `m` of `n` random users find a result of
/// level `level` relevant.
pub fn at_least_m_of_n(table: &DisagreementTable, level: Level, m: u32, n: u32) -> Result<f64> {
    if m == 0 || m > n {
        return Err(PrmError::validation(format!(
            "need 1 ≤ m ≤ n, got m={m}, n={n}"
        )));
    }
    let p = table
        .p(level)
        .ok_or_else(|| PrmError::Estimation(format!("p(R|{level}) is undefined")))?;
    Ok(binomial_upper_tail(p, m, n))
}
