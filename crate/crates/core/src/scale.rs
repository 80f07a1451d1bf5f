//! Ordered assessment levels `0..=T`.
//!
//! A scale descriptor is a small TOML document:
//!
//! ```toml
//! top = 3
//!
//! [[level]]
//! index = 0
//! label = "Non"
//!
//! [[level]]
//! index = 1
//! label = "Rel"
//! # ...
//! ```

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PrmError, Result};

/// Index of an assessment level on a [`RelevanceScale`].
pub type Level = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub index: Level,
    pub label: String,
}

/// Graded assessment levels, indexed `0..=top`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevanceScale {
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ScaleDescriptor {
    top: Level,
    #[serde(rename = "level")]
    levels: Vec<ScaleLevel>,
}

impl RelevanceScale {
    /// Builds a scale from labels in level order.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(PrmError::validation(format!(
                "a relevance scale needs at least two levels, got {}",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.trim().is_empty() {
                return Err(PrmError::validation("scale labels must be non-empty"));
            }
            if !seen.insert(label.as_str()) {
                return Err(PrmError::validation(format!(
                    "duplicate scale label {label:?}"
                )));
            }
        }
        Ok(Self { labels })
    }

    /// Scale with labels `"0"`, `"1"`, ..., `top`.
    pub fn numeric(top: Level) -> Result<Self> {
        Self::new((0..=top).map(|i| i.to_string()))
    }

    pub fn from_levels(top: Level, levels: &[ScaleLevel]) -> Result<Self> {
        let mut sorted = levels.to_vec();
        sorted.sort_by_key(|l| l.index);
        for (expected, level) in sorted.iter().enumerate() {
            if level.index != expected {
                return Err(PrmError::validation(format!(
                    "scale indices must be contiguous from 0; expected {expected}, found {}",
                    level.index
                )));
            }
        }
        if sorted.len() != top + 1 {
            return Err(PrmError::validation(format!(
                "scale declares top = {top} but lists {} levels",
                sorted.len()
            )));
        }
        Self::new(sorted.into_iter().map(|l| l.label))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let desc: ScaleDescriptor =
            toml::from_str(text).map_err(|e| PrmError::Config(format!("scale descriptor: {e}")))?;
        Self::from_levels(desc.top, &desc.levels)
    }

    pub fn to_toml_string(&self) -> String {
        let desc = ScaleDescriptor {
            top: self.top(),
            levels: self.levels().collect(),
        };
        toml::to_string(&desc).expect("scale descriptor is always serializable")
    }

    /// The top level index `T`.
    pub fn top(&self) -> Level {
        self.labels.len() - 1
    }

    pub fn n_levels(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, level: Level) -> Option<&str> {
        self.labels.get(level).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<Level> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn levels(&self) -> impl Iterator<Item = ScaleLevel> + '_ {
        self.labels
            .iter()
            .enumerate()
            .map(|(index, label)| ScaleLevel {
                index,
                label: label.clone(),
            })
    }

    pub fn contains(&self, level: Level) -> bool {
        level <= self.top()
    }

    pub fn check(&self, level: Level) -> Result<()> {
        if self.contains(level) {
            Ok(())
        } else {
            Err(PrmError::validation(format!(
                "level {level} > T={}",
                self.top()
            )))
        }
    }
}

impl fmt::Display for RelevanceScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(" < "))
    }
}
