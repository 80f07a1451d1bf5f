//! Kendall's rank correlation between system orderings.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PrmError, Result};

/// Systems ordered by non-increasing mean score; ties are listed by id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemRanking {
    pub metric: String,
    entries: Vec<(String, f64)>,
}

impl SystemRanking {
    pub fn new<I, S>(metric: impl Into<String>, scores: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, f64)> =
            scores.into_iter().map(|(s, v)| (s.into(), v)).collect();
        let mut seen = std::collections::HashSet::new();
        for (system, score) in &entries {
            if !score.is_finite() {
                return Err(PrmError::Analysis(format!(
                    "system {system} has a non-finite score"
                )));
            }
            if !seen.insert(system.as_str()) {
                return Err(PrmError::Analysis(format!("system {system} listed twice")));
            }
        }
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self {
            metric: metric.into(),
            entries,
        })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score(&self, system: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(s, _)| s == system)
            .map(|(_, v)| *v)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TauVariant {
    /// Tie-unaware: `(C - D) / (n (n - 1) / 2)`.
    A,
    /// Tie-corrected: `(C - D) / sqrt((n0 - n1) (n0 - n2))`.
    #[default]
    B,
}

impl fmt::Display for TauVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauVariant::A => "tau-a",
            TauVariant::B => "tau-b",
        })
    }
}

impl FromStr for TauVariant {
    type Err = PrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "tau-a" => Ok(TauVariant::A),
            "b" | "tau-b" => Ok(TauVariant::B),
            other => Err(PrmError::Config(format!("unknown tau variant {other:?}"))),
        }
    }
}

/// Pair counts behind Kendall's tau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub n_pairs: u64,
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs tied in `x` (including those also tied in `y`).
    pub tied_x: u64,
    /// Pairs tied in `y` (including those also tied in `x`).
    pub tied_y: u64,
    pub tied_both: u64,
}

impl PairCounts {
    pub fn tau(&self, variant: TauVariant) -> Result<f64> {
        let s = self.concordant as f64 - self.discordant as f64;
        let denom = match variant {
            TauVariant::A => self.n_pairs as f64,
            TauVariant::B => {
                ((self.n_pairs - self.tied_x) as f64 * (self.n_pairs - self.tied_y) as f64).sqrt()
            }
        };
        if denom == 0.0 {
            return Err(PrmError::Analysis(
                "Kendall's tau is undefined: one ordering is entirely tied".into(),
            ));
        }
        Ok(s / denom)
    }
}

fn tied_pairs(run: u64) -> u64 {
    run * run.saturating_sub(1) / 2
}

fn sum_tied_runs<T, F>(items: &[T], mut same: F) -> u64
where
    F: FnMut(&T, &T) -> bool,
{
    let mut total = 0;
    let mut run = 1u64;
    for w in items.windows(2) {
        if same(&w[0], &w[1]) {
            run += 1;
        } else {
            total += tied_pairs(run);
            run = 1;
        }
    }
    total + tied_pairs(run)
}

/// Sorts `ys` by merge sort and returns the number of strict inversions.
fn count_inversions(ys: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = ys.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut ys[..mid], buf) + count_inversions(&mut ys[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if ys[i].total_cmp(&ys[j]) != Ordering::Greater {
            buf.push(ys[i]);
            i += 1;
        } else {
            buf.push(ys[j]);
            swaps += (mid - i) as u64;
            j += 1;
        }
    }
    buf.extend_from_slice(&ys[i..mid]);
    buf.extend_from_slice(&ys[j..n]);
    ys.copy_from_slice(buf);
    swaps
}

/// Concordance counts in `O(n log n)` (Knight's algorithm).
pub fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(PrmError::Analysis(format!(
            "score lists differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(PrmError::Analysis(
            "Kendall's tau needs at least two items".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(PrmError::Analysis("scores must be finite".into()));
    }
    let n = x.len() as u64;
    // `+ 0.0` folds -0.0 into 0.0 so sorting and tie detection agree.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tied_x = sum_tied_runs(&pairs, |a, b| a.0 == b.0);
    let tied_both = sum_tied_runs(&pairs, |a, b| a.0 == b.0 && a.1 == b.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let discordant = count_inversions(&mut ys, &mut buf);
    let tied_y = sum_tied_runs(&ys, |a, b| a == b);

    let n_pairs = n * (n - 1) / 2;
    let concordant = n_pairs + tied_both - tied_x - tied_y - discordant;
    Ok(PairCounts {
        n_pairs,
        concordant,
        discordant,
        tied_x,
        tied_y,
        tied_both,
    })
}

pub fn tau(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64> {
    pair_counts(x, y)?.tau(variant)
}

/// Kendall's tau between two rankings of the same systems.
pub fn kendall_tau(a: &SystemRanking, b: &SystemRanking, variant: TauVariant) -> Result<f64> {
    if a.len() != b.len() {
        return Err(PrmError::Analysis(format!(
            "rankings cover different systems ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let b_scores: HashMap<&str, f64> = b.entries.iter().map(|(s, v)| (s.as_str(), *v)).collect();
    let mut x = Vec::with_capacity(a.len());
    let mut y = Vec::with_capacity(a.len());
    for (system, score) in &a.entries {
        let other = b_scores.get(system.as_str()).ok_or_else(|| {
            PrmError::Analysis(format!("system {system} missing from the second ranking"))
        })?;
        x.push(*score);
        y.push(*other);
    }
    tau(&x, &y, variant)
}
