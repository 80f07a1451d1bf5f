//! Relevance gains per assessment level and rank discounts.

use std::fmt;
use std::str::FromStr;

use crate::disagreement::DisagreementTable;
use crate::error::{PrmError, Result};
use crate::scale::{Level, RelevanceScale};

#[derive(Clone, Debug, PartialEq)]
pub enum GainKind {
    Binary { threshold: Level },
    Linear,
    Exponential,
    Prm,
    Udm,
    Custom,
}

impl fmt::Display for GainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainKind::Binary { threshold } => write!(f, "binary(θ={threshold})"),
            GainKind::Linear => f.write_str("linear"),
            GainKind::Exponential => f.write_str("exponential"),
            GainKind::Prm => f.write_str("prm"),
            GainKind::Udm => f.write_str("udm"),
            GainKind::Custom => f.write_str("custom"),
        }
    }
}

/// A resolved gain vector `g(0..=T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GainScheme {
    kind: GainKind,
    gains: Vec<f64>,
}

impl GainScheme {
    /// `g(i) = 1` if `i ≥ θ`, else `0`.
    pub fn binary(threshold: Level, scale: &RelevanceScale) -> Result<Self> {
        if threshold == 0 || threshold > scale.top() {
            return Err(PrmError::validation(format!(
                "threshold θ={threshold} must lie in 1..={}",
                scale.top()
            )));
        }
        let gains = (0..scale.n_levels())
            .map(|i| if i >= threshold { 1.0 } else { 0.0 })
            .collect();
        Ok(Self {
            kind: GainKind::Binary { threshold },
            gains,
        })
    }

    /// `g(i) = i`.
    pub fn linear(scale: &RelevanceScale) -> Self {
        Self {
            kind: GainKind::Linear,
            gains: (0..scale.n_levels()).map(|i| i as f64).collect(),
        }
    }

    /// `g(i) = 2^i - 1`.
    pub fn exponential(scale: &RelevanceScale) -> Self {
        Self {
            kind: GainKind::Exponential,
            gains: (0..scale.n_levels())
                .map(|i| 2f64.powi(i as i32) - 1.0)
                .collect(),
        }
    }

    /// `g(i) = p(R | i)`; every cell must be defined or overridden.
    pub fn prm(table: &DisagreementTable) -> Result<Self> {
        Ok(Self {
            kind: GainKind::Prm,
            gains: table.gains()?,
        })
    }

    /// `g(T) = 1`, `g(0) = 0` and `g(i) = p(T | i)` in between. The table
    /// must have been estimated for top-level users (`θ = T`).
    pub fn udm(table: &DisagreementTable) -> Result<Self> {
        let top = table.scale().top();
        if table.user_model().threshold() != top {
            return Err(PrmError::validation(format!(
                "UDM gains need a table estimated at θ = T = {top}, got θ = {}",
                table.user_model().threshold()
            )));
        }
        let gains = (0..=top)
            .map(|i| {
                if i == 0 {
                    Ok(0.0)
                } else if i == top {
                    Ok(1.0)
                } else {
                    table.p(i).ok_or_else(|| {
                        PrmError::Metric(format!("p(T|{i}) is undefined; supply an override"))
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: GainKind::Udm,
            gains,
        })
    }

    pub fn custom(gains: Vec<f64>, scale: &RelevanceScale) -> Result<Self> {
        if gains.len() != scale.n_levels() {
            return Err(PrmError::validation(format!(
                "custom gains need {} values, got {}",
                scale.n_levels(),
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(PrmError::validation(format!(
                "gains must be finite and non-negative, got {g}"
            )));
        }
        Ok(Self {
            kind: GainKind::Custom,
            gains,
        })
    }

    pub fn kind(&self) -> &GainKind {
        &self.kind
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn gain(&self, level: Level) -> f64 {
        self.gains[level]
    }

    pub fn n_levels(&self) -> usize {
        self.gains.len()
    }
}

/// Rank discount `c(r)`, `r ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Discount {
    /// `c(r) = 1 / log_b(r + 1)`.
    Log { base: f64 },
    /// `c(r) = 1 / r`.
    Zipf,
}

impl Default for Discount {
    fn default() -> Self {
        Discount::Log { base: 2.0 }
    }
}

impl Discount {
    pub fn log(base: f64) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(PrmError::validation(format!(
                "log discount base must be > 1, got {base}"
            )));
        }
        Ok(Discount::Log { base })
    }

    pub fn at(&self, rank: usize) -> f64 {
        debug_assert!(rank >= 1);
        match *self {
            Discount::Log { base } => base.ln() / ((rank + 1) as f64).ln(),
            Discount::Zipf => 1.0 / rank as f64,
        }
    }
}

impl fmt::Display for Discount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discount::Log { base } => write!(f, "log{base}"),
            Discount::Zipf => f.write_str("zipf"),
        }
    }
}

impl FromStr for Discount {
    type Err = PrmError;

    /// Accepts `log`, `log<base>` and `zipf`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zipf" => Ok(Discount::Zipf),
            "log" => Ok(Discount::default()),
            _ => match s.strip_prefix("log").map(str::parse::<f64>) {
                Some(Ok(base)) => Discount::log(base),
                _ => Err(PrmError::Config(format!("unknown discount {s:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disagreement::{Estimator, UserModel};
    use approx::assert_abs_diff_eq;

    fn scale4() -> RelevanceScale {
        RelevanceScale::new(["Non", "Rel", "HRel", "Key"]).unwrap()
    }

    #[test]
    fn standard_schemes() {
        let s = scale4();
        assert_eq!(
            GainScheme::binary(2, &s).unwrap().gains(),
            [0.0, 0.0, 1.0, 1.0]
        );
        assert_eq!(GainScheme::linear(&s).gains(), [0.0, 1.0, 2.0, 3.0]);
        assert_eq!(GainScheme::exponential(&s).gains(), [0.0, 1.0, 3.0, 7.0]);
        assert!(GainScheme::binary(0, &s).is_err());
    }

    #[test]
    fn udm_requires_top_threshold() {
        let s = scale4();
        let counts = [(1, 100), (4, 100), (27, 100), (53, 100)];
        let top = DisagreementTable::from_counts(
            s.clone(),
            UserModel::top(&s),
            Estimator::Symmetric,
            &counts,
        )
        .unwrap();
        let udm = GainScheme::udm(&top).unwrap();
        assert_eq!(udm.gains(), [0.0, 0.04, 0.27, 1.0]);
        let prm = GainScheme::prm(&top).unwrap();
        assert_eq!(prm.gains(), [0.01, 0.04, 0.27, 0.53]);

        let lower = DisagreementTable::from_counts(
            s.clone(),
            UserModel::new(2, &s).unwrap(),
            Estimator::Symmetric,
            &counts,
        )
        .unwrap();
        assert!(GainScheme::udm(&lower).is_err());
    }

    #[test]
    fn custom_gains_are_validated() {
        let s = scale4();
        assert!(GainScheme::custom(vec![0.0, 1.0], &s).is_err());
        assert!(GainScheme::custom(vec![0.0, -1.0, 1.0, 2.0], &s).is_err());
        assert!(GainScheme::custom(vec![0.0, f64::NAN, 1.0, 2.0], &s).is_err());
        assert!(GainScheme::custom(vec![0.0, 0.5, 1.0, 2.0], &s).is_ok());
    }

    #[test]
    fn discounts() {
        let log2 = Discount::default();
        assert_abs_diff_eq!(log2.at(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(log2.at(3), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(Discount::Zipf.at(4), 0.25);
        for r in 2..1000 {
            assert!(Discount::Zipf.at(r) <= log2.at(r));
            assert!(log2.at(r) <= log2.at(r - 1));
        }
        assert_eq!(
            "log10".parse::<Discount>().unwrap(),
            Discount::Log { base: 10.0 }
        );
        assert_eq!("zipf".parse::<Discount>().unwrap(), Discount::Zipf);
        assert!("log1".parse::<Discount>().is_err());
        assert!("cosine".parse::<Discount>().is_err());
    }
}
