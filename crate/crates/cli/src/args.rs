//! Command-line flags and the experiment config file.
//!
//! The config file is TOML with one optional table per flag group
//! (`[input]`, `[estimation]`, `[evaluation]`, `[analysis]`, `[output]`);
//! keys are the long flag names with `-` replaced by `_`. Relative paths
//! are resolved against the config file's directory. A flag given on the
//! command line always wins over the config file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use prm_core::{PrmError, Result};
use serde::Deserialize;

/// Fills every unset field of `self` from `other`.
macro_rules! merge_fields {
    ($self:ident, $other:ident; opt: $($o:ident),*; vec: $($v:ident),*; flag: $($f:ident),*) => {{
        $( if $self.$o.is_none() { $self.$o = $other.$o; } )*
        $( if $self.$v.is_empty() { $self.$v = $other.$v; } )*
        $( $self.$f = $self.$f || $other.$f; )*
    }};
}

fn rebase(base: &Path, path: &mut Option<PathBuf>) {
    if let Some(p) = path {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct InputArgs {
    /// Experiment config file (TOML); flags override its values
    #[arg(long, help_heading = "Input")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Scale descriptor (TOML: `top = T` and one `[[level]]` per index/label)
    #[arg(long, help_heading = "Input")]
    pub scale: Option<PathBuf>,

    /// Use the numeric scale 0..T instead of a descriptor file
    #[arg(
        long,
        value_name = "T",
        conflicts_with = "scale",
        help_heading = "Input"
    )]
    pub top: Option<usize>,

    /// Judgments of the first assessor group (`topic iteration doc level`)
    #[arg(long, help_heading = "Input")]
    pub qrels: Option<PathBuf>,

    /// Judgments of the second assessor group, same format
    #[arg(long, help_heading = "Input")]
    pub qrels2: Option<PathBuf>,

    /// Paired judgments (`topic doc level_u1 level_u2`), instead of two qrels files
    #[arg(long, conflicts_with = "qrels2", help_heading = "Input")]
    pub pairs: Option<PathBuf>,

    /// Run file (`topic Q0 doc rank score system`); repeatable
    #[arg(long = "run", help_heading = "Input")]
    #[serde(rename = "runs")]
    pub runs: Vec<PathBuf>,

    /// Topic strata (`topic stratum`); estimates one table per stratum
    #[arg(long, help_heading = "Input")]
    pub strata: Option<PathBuf>,

    /// Intent probabilities (`topic intent probability`)
    #[arg(long, help_heading = "Input")]
    pub intents: Option<PathBuf>,

    /// Keep only judgments for the most probable intent of each topic
    #[arg(long, requires = "intents", help_heading = "Input")]
    pub top_intent_only: bool,

    /// Read the qrels iteration column as the intent id
    #[arg(long, help_heading = "Input")]
    pub intent_column: bool,

    /// Replace intent-0 judgments by explicit level-0 judgments for every
    /// declared intent of the topic
    #[arg(long, help_heading = "Input")]
    pub expand_no_intent: bool,

    /// Accept repeated documents within a run topic (only the first occurrence earns gain)
    #[arg(long, help_heading = "Input")]
    pub allow_duplicates: bool,
}

impl InputArgs {
    fn merge(&mut self, other: InputArgs) {
        merge_fields!(self, other;
            opt: scale, top, qrels, qrels2, pairs, strata, intents;
            vec: runs;
            flag: top_intent_only, intent_column, expand_no_intent, allow_duplicates);
    }

    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.scale,
            &mut self.qrels,
            &mut self.qrels2,
            &mut self.pairs,
            &mut self.strata,
            &mut self.intents,
        ] {
            rebase(base, p);
        }
        for r in &mut self.runs {
            if r.is_relative() {
                *r = base.join(&*r);
            }
        }
    }
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Symmetric,
    OneSided,
    /// Both one-sided directions and the symmetric estimate
    All,
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    U1,
    U2,
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationArgs {
    /// User relevance threshold θ: a user finds a result relevant iff its level is ≥ θ [default: T]
    #[arg(long, help_heading = "Estimation")]
    pub theta: Option<usize>,

    /// Estimator for p(R|i) [default: symmetric]
    #[arg(long, value_enum, help_heading = "Estimation")]
    pub estimator: Option<EstimatorArg>,

    /// Group whose labels the one-sided estimator conditions on [default: u1]
    #[arg(long, value_enum, help_heading = "Estimation")]
    pub condition: Option<Group>,

    /// The second group only judged results the first rated above level 0
    /// (forbids the symmetric estimator)
    #[arg(long, help_heading = "Estimation")]
    pub restricted_second_round: bool,

    /// Force p(R|0) = 0
    #[arg(long, help_heading = "Estimation")]
    pub override_p0: bool,

    /// Disagreement table (JSON written by `prm estimate --format json`)
    #[arg(long, help_heading = "Estimation")]
    pub table: Option<PathBuf>,
}

impl EstimationArgs {
    fn merge(&mut self, other: EstimationArgs) {
        merge_fields!(self, other;
            opt: theta, estimator, condition, table;
            vec: ;
            flag: restricted_second_round, override_p0);
    }
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    /// nDCG@k
    Ndcg,
    /// (Expected) number of relevant results in the top k
    Count,
    /// (Expected) precision at k
    Precision,
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IdealPoolArg {
    Judged,
    Run,
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct EvalArgs {
    /// Gain scheme: binary, linear, exponential, prm, udm or custom:g0,g1,...; repeatable [default: prm]
    #[arg(long = "gains", help_heading = "Evaluation")]
    pub gains: Vec<String>,

    /// Measure to compute; repeatable [default: ndcg]
    #[arg(long = "metric", value_enum, help_heading = "Evaluation")]
    #[serde(rename = "metrics")]
    pub metrics: Vec<MetricArg>,

    /// Rank cutoff [default: 10]
    #[arg(long, help_heading = "Evaluation")]
    pub k: Option<usize>,

    /// Rank discount: log or zipf [default: log]
    #[arg(long, help_heading = "Evaluation")]
    pub discount: Option<String>,

    /// Base of the log discount [default: 2]
    #[arg(long, help_heading = "Evaluation")]
    pub log_base: Option<f64>,

    /// Documents forming the ideal ranking [default: judged]
    #[arg(long, value_enum, help_heading = "Evaluation")]
    pub ideal_pool: Option<IdealPoolArg>,

    /// Fail on unjudged retrieved documents and on unjudged run topics
    #[arg(long, help_heading = "Evaluation")]
    pub strict: bool,
}

impl EvalArgs {
    fn merge(&mut self, other: EvalArgs) {
        merge_fields!(self, other;
            opt: k, discount, log_base, ideal_pool;
            vec: gains, metrics;
            flag: strict);
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisArgs {
    /// Seed of the random streams (required by every stochastic analysis)
    #[arg(long, help_heading = "Analysis")]
    pub seed: Option<u64>,

    /// Topic bootstrap resamples [default: 300]
    #[arg(long, help_heading = "Analysis")]
    pub resamples: Option<usize>,

    /// Simulated annotation rounds [default: 50]
    #[arg(long, help_heading = "Analysis")]
    pub rounds: Option<usize>,

    /// Comma-separated, increasing numbers of double judgments [default: 25,50,...,3200]
    #[arg(long, value_delimiter = ',', help_heading = "Analysis")]
    pub budgets: Vec<usize>,

    /// Results per resource considered by the quality sweep [default: 10]
    #[arg(long, help_heading = "Analysis")]
    pub depth: Option<usize>,

    /// Results at or above this level count toward resource quality [default: T-1]
    #[arg(long, help_heading = "Analysis")]
    pub quality_level: Option<usize>,

    /// Group whose resource-annotated judgments order the resources [default: u1]
    #[arg(long, value_enum, help_heading = "Analysis")]
    pub reference: Option<Group>,

    /// Use Kendall's tau-a instead of the tie-corrected tau-b
    #[arg(long, help_heading = "Analysis")]
    pub tau_a: bool,
}

impl AnalysisArgs {
    fn merge(&mut self, other: AnalysisArgs) {
        merge_fields!(self, other;
            opt: seed, resamples, rounds, depth, quality_level, reference;
            vec: budgets;
            flag: tau_a);
    }
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

impl From<FormatArg> for prm_core::report::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Self::Text,
            FormatArg::Csv => Self::Csv,
            FormatArg::Json => Self::Json,
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct OutputArgs {
    /// Output format; text rounds to 4 decimals [default: text]
    #[arg(long, value_enum, help_heading = "Output")]
    pub format: Option<FormatArg>,

    /// Write the report to this file instead of stdout
    #[arg(long, help_heading = "Output")]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    fn merge(&mut self, other: OutputArgs) {
        merge_fields!(self, other; opt: format, out; vec: ; flag: );
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub input: InputArgs,
    pub estimation: EstimationArgs,
    #[serde(rename = "evaluation")]
    pub eval: EvalArgs,
    pub analysis: AnalysisArgs,
    pub output: OutputArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
        let mut config: ConfigFile = toml::from_str(&text)
            .map_err(|e| PrmError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.input.rebase(base);
        rebase(base, &mut config.estimation.table);
        rebase(base, &mut config.output.out);
        Ok(config)
    }
}

pub fn io_context(path: &Path, e: std::io::Error) -> PrmError {
    PrmError::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

/// Flag groups after merging with the config file.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    pub input: InputArgs,
    pub estimation: EstimationArgs,
    pub eval: EvalArgs,
    pub analysis: AnalysisArgs,
    pub output: OutputArgs,
}

impl Settings {
    pub fn resolve(mut self) -> Result<Self> {
        if let Some(path) = self.input.config.clone() {
            let config = ConfigFile::load(&path)?;
            self.input.merge(config.input);
            self.estimation.merge(config.estimation);
            self.eval.merge(config.eval);
            self.analysis.merge(config.analysis);
            self.output.merge(config.output);
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(
            &path,
            "[input]\nqrels = \"a.qrels\"\nruns = [\"r1\", \"/abs/r2\"]\n\n[estimation]\ntheta = 1\n\n[evaluation]\nk = 20\ngains = [\"binary\"]\n\n[analysis]\nseed = 3\n\n[output]\nformat = \"csv\"\n",
        )
        .unwrap();
        let settings = Settings {
            input: InputArgs {
                config: Some(path),
                ..Default::default()
            },
            estimation: EstimationArgs {
                theta: Some(2),
                ..Default::default()
            },
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(settings.estimation.theta, Some(2));
        assert_eq!(settings.eval.k, Some(20));
        assert_eq!(settings.eval.gains, vec!["binary".to_string()]);
        assert_eq!(settings.analysis.seed, Some(3));
        assert_eq!(settings.output.format, Some(FormatArg::Csv));
        assert_eq!(settings.input.qrels, Some(dir.path().join("a.qrels")));
        assert_eq!(
            settings.input.runs,
            vec![dir.path().join("r1"), PathBuf::from("/abs/r2")]
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(&path, "[estimation]\nthreshold = 2\n").unwrap();
        assert!(ConfigFile::load(&path).is_err());
    }
}
