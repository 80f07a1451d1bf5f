//! `prm`: disagreement-aware relevance gains and evaluation for test collections.

mod args;
mod load;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::warn;
use prm_core::analysis::{
    bootstrap_topics, kendall_tau, quality_sensitivity, robustness_study, scheme_correlations,
    simulate_annotation_rounds, NamedScheme, QualityOptions, TauVariant,
};
use prm_core::judgments::pairs_by_topic;
use prm_core::metrics::IdealPool;
use prm_core::report::{self, Format};
use prm_core::*;

use args::*;

const ESTIMATE_HELP: &str = "\
Estimates p(R|i), the probability that a random user finds a result relevant
given that an assessor labeled it i, from double judgments.

  one-sided (conditioning on U1):
      p(R|i) = N(U2 >= theta, U1 = i) / N(U1 = i)
  symmetric (pooling both directions):
      p(R|i) = [N(U1 >= theta, U2 = i) + N(U2 >= theta, U1 = i)] / [N(U2 = i) + N(U1 = i)]
  standard deviation of a cell with numerator N_N and denominator N_D:
      sigma = sqrt(p (1 - p) / N_D),  p = N_N / N_D

Cells with N_D = 0 are reported as NA, never as 0. The symmetric estimator is
refused with --restricted-second-round: when the second group only judged
results the first rated above 0, pooling would inflate the estimates.
For the symmetric estimator sigma is an approximation, since the two
directions share judgments.";

const EVAL_HELP: &str = "\
Evaluates runs against single judgments (--qrels).

  count      binary:  N_R = sum over i >= theta of n_i
             prm:     N_R = sum_i n_i p(R|i)   (expected relevant results in the top k)
  precision  N_R / k over the top k
  ndcg       DCG@k = sum_{r=1..k} c(r) g(i(r)),  nDCG@k = DCG@k / ideal DCG@k
             c(r) = 1 / log_b(r + 1)  (log, default b = 2)  or  1 / r  (zipf)

Gains g(i): binary 1[i >= theta]; linear i; exponential 2^i - 1; prm p(R|i);
udm 0 at level 0, 1 at level T and p(T|i) in between (needs theta = T);
custom:g0,g1,...,gT. The ideal ranking sorts the judged pool of the topic by
decreasing gain. Unjudged results count as level 0 unless --strict. Topics
whose ideal DCG is 0 are excluded from the mean with a warning. The standard
error is the sample standard deviation (n - 1) over sqrt(n).

prm and udm gains use --table, or estimate a table from --qrels2/--pairs.";

const BOOTSTRAP_HELP: &str = "\
Topic bootstrap: draws as many topics as there are, with replacement, and
re-estimates p(R|i) from all double judgments of the drawn topics. Reports
mean, standard deviation and five-number summary per level; cells undefined
in a resample are counted as missing.";

const BUDGET_HELP: &str = "\
Annotation-budget simulation: each round samples the double judgments with
replacement, re-estimating p(R|i) whenever the sample reaches a budget on the
grid. Reports the mean and standard deviation of each estimate across rounds.";

const QUALITY_HELP: &str = "\
Result-quality sweep: per topic, resources are ranked by how many of their
results the reference group labeled at or above --quality-level (ties by
resource id). For k = 1, 2, ... the table is re-estimated from the double
judgments of the top --depth results of the k best resources. Reference
judgments carry resource ids as `resource=<id>` annotations.";

const ROBUSTNESS_HELP: &str = "\
Ranks the runs by mean nDCG@k once with the U1 judgments and once with the U2
judgments, for each gain scheme, and reports Kendall's tau between the two
orderings. Also reports tau between the orderings of every pair of schemes on
the U1 judgments.";

const TAU_HELP: &str = "\
Kendall's tau between two system rankings, each a file of `system score`
lines. tau-b (default) = (C - D) / sqrt((n0 - n1)(n0 - n2)) with C/D the
concordant/discordant pairs, n0 all pairs and n1/n2 the pairs tied in either
ranking; tau-a = (C - D) / n0.";

#[derive(Parser, Debug)]
#[command(
    name = "prm",
    version,
    about = "Assessor-disagreement aware relevance gains and evaluation"
)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the disagreement table p(R|i) from double judgments
    #[command(long_about = ESTIMATE_HELP)]
    Estimate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        estimation: EstimationArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate runs with counts, precision and nDCG under a gain scheme
    #[command(long_about = EVAL_HELP)]
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        estimation: EstimationArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Meta-analyses of estimates and system rankings
    Analyze {
        #[command(subcommand)]
        kind: Analysis,
    },
    /// Parse and check input files without computing anything
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        estimation: EstimationArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand, Debug)]
enum Analysis {
    /// Kendall's tau between two system rankings
    #[command(long_about = TAU_HELP)]
    Tau {
        /// Ranking file (`system score` per line); give exactly two
        #[arg(long = "ranking", num_args = 1, required = true)]
        rankings: Vec<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Topic bootstrap of the disagreement estimates
    #[command(long_about = BOOTSTRAP_HELP)]
    Bootstrap(AnalysisCommon),
    /// Spread of the estimates as a function of the number of double judgments
    #[command(long_about = BUDGET_HELP)]
    Budget(AnalysisCommon),
    /// Estimates restricted to results of the best k resources
    #[command(long_about = QUALITY_HELP)]
    Quality(AnalysisCommon),
    /// Stability of system rankings across assessor groups and gain schemes
    #[command(long_about = ROBUSTNESS_HELP)]
    Robustness {
        #[command(flatten)]
        common: AnalysisCommon,
        #[command(flatten)]
        eval: EvalArgs,
    },
}

#[derive(clap::Args, Debug)]
struct AnalysisCommon {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    estimation: EstimationArgs,
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[command(flatten)]
    output: OutputArgs,
}

impl AnalysisCommon {
    fn settings(self, eval: Option<EvalArgs>) -> Settings {
        Settings {
            input: self.input,
            estimation: self.estimation,
            eval: eval.unwrap_or_default(),
            analysis: self.analysis,
            output: self.output,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Estimate {
            input,
            estimation,
            output,
        } => cmd_estimate(
            Settings {
                input,
                estimation,
                output,
                ..Default::default()
            }
            .resolve()?,
        ),
        Command::Eval {
            input,
            estimation,
            eval,
            output,
        } => cmd_eval(
            Settings {
                input,
                estimation,
                eval,
                output,
                ..Default::default()
            }
            .resolve()?,
        ),
        Command::Validate {
            input,
            estimation,
            output,
        } => cmd_validate(
            Settings {
                input,
                estimation,
                output,
                ..Default::default()
            }
            .resolve()?,
        ),
        Command::Analyze { kind } => match kind {
            Analysis::Tau {
                rankings,
                analysis,
                output,
            } => cmd_tau(&rankings, analysis, output),
            Analysis::Bootstrap(c) => cmd_bootstrap(c.settings(None).resolve()?),
            Analysis::Budget(c) => cmd_budget(c.settings(None).resolve()?),
            Analysis::Quality(c) => cmd_quality(c.settings(None).resolve()?),
            Analysis::Robustness { common, eval } => {
                cmd_robustness(common.settings(Some(eval)).resolve()?)
            }
        },
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| io_context(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn format(output: &OutputArgs) -> Format {
    output.format.map(Format::from).unwrap_or_default()
}

fn user_model(est: &EstimationArgs, scale: &RelevanceScale) -> Result<UserModel> {
    match est.theta {
        Some(theta) => UserModel::new(theta, scale),
        None => Ok(UserModel::top(scale)),
    }
}

fn design(est: &EstimationArgs) -> JudgingDesign {
    if est.restricted_second_round {
        JudgingDesign::RestrictedSecondRound
    } else {
        JudgingDesign::SamePool
    }
}

fn direction(est: &EstimationArgs) -> Direction {
    match est.condition {
        Some(Group::U2) => Direction::ConditionOnU2,
        _ => Direction::ConditionOnU1,
    }
}

fn estimators(est: &EstimationArgs) -> Vec<Estimator> {
    match est.estimator.unwrap_or(EstimatorArg::Symmetric) {
        EstimatorArg::Symmetric => vec![Estimator::Symmetric],
        EstimatorArg::OneSided => vec![Estimator::OneSided(direction(est))],
        EstimatorArg::All => {
            let mut v = vec![
                Estimator::OneSided(Direction::ConditionOnU1),
                Estimator::OneSided(Direction::ConditionOnU2),
            ];
            if est.restricted_second_round {
                warn!("restricted second round: the symmetric estimate is left out");
            } else {
                v.push(Estimator::Symmetric);
            }
            v
        }
    }
}

fn single_estimator(est: &EstimationArgs) -> Result<Estimator> {
    match est.estimator {
        Some(EstimatorArg::All) => Err(PrmError::Config(
            "this command needs a single estimator; use symmetric or one-sided".into(),
        )),
        _ => Ok(estimators(est)[0]),
    }
}

fn finish_table(est: &EstimationArgs, table: DisagreementTable) -> DisagreementTable {
    table.warn_non_monotone();
    if est.override_p0 {
        table.with_p0_zero()
    } else {
        table
    }
}

fn cmd_estimate(s: Settings) -> Result<()> {
    let scale = load::scale(&s.input)?;
    let pairs = load::pairs(&s.input, &scale)?;
    let um = user_model(&s.estimation, &scale)?;
    let strata = load::strata(&s.input)?;
    let mut tables = Vec::new();
    for estimator in estimators(&s.estimation) {
        match &strata {
            Some(strata) => {
                let per = stratified_estimate(
                    &pairs,
                    strata,
                    um,
                    &scale,
                    estimator,
                    design(&s.estimation),
                )?;
                tables.extend(per.into_values().map(|t| finish_table(&s.estimation, t)));
            }
            None => {
                let t = estimate(&pairs, um, &scale, estimator, design(&s.estimation))?;
                tables.push(finish_table(&s.estimation, t));
            }
        }
    }
    emit(&s.output, &report::tables(&tables, format(&s.output))?)
}

/// The table behind prm/udm gains: loaded with --table, or estimated from
/// the double judgments.
fn table_for_gains(s: &Settings, scale: &RelevanceScale) -> Result<DisagreementTable> {
    let table = match &s.estimation.table {
        Some(path) => {
            let t = load::table(path)?;
            if t.scale().n_levels() != scale.n_levels() {
                return Err(PrmError::validation(format!(
                    "table has {} levels, the scale {}",
                    t.scale().n_levels(),
                    scale.n_levels()
                )));
            }
            if let Some(theta) = s.estimation.theta {
                if theta != t.user_model().threshold() {
                    return Err(PrmError::Config(format!(
                        "--theta {theta} disagrees with the table's theta {}",
                        t.user_model().threshold()
                    )));
                }
            }
            t
        }
        None if load::has_double_judgments(&s.input) => {
            let pairs = load::pairs(&s.input, scale)?;
            let um = user_model(&s.estimation, scale)?;
            estimate(&pairs, um, scale, single_estimator(&s.estimation)?, design(&s.estimation))?
        }
        None => {
            return Err(PrmError::Estimation(
                "prm and udm gains need a table: pass --table, or double judgments (--qrels2 or --pairs)".into(),
            ))
        }
    };
    Ok(finish_table(&s.estimation, table))
}

struct GainContext<'a> {
    settings: &'a Settings,
    scale: &'a RelevanceScale,
    table: Option<DisagreementTable>,
}

impl GainContext<'_> {
    fn table(&mut self) -> Result<&DisagreementTable> {
        if self.table.is_none() {
            self.table = Some(table_for_gains(self.settings, self.scale)?);
        }
        Ok(self.table.as_ref().expect("just set"))
    }

    /// θ for binary gains: --theta, else the loaded table's θ, else T.
    fn theta(&self) -> Result<Level> {
        if let Some(theta) = self.settings.estimation.theta {
            return Ok(UserModel::new(theta, self.scale)?.threshold());
        }
        if let Some(path) = &self.settings.estimation.table {
            return Ok(load::table(path)?.user_model().threshold());
        }
        Ok(self.scale.top())
    }

    fn scheme(&mut self, spec: &str) -> Result<GainScheme> {
        match spec {
            "binary" => GainScheme::binary(self.theta()?, self.scale),
            "linear" => Ok(GainScheme::linear(self.scale)),
            "exponential" | "exp" => Ok(GainScheme::exponential(self.scale)),
            "prm" => GainScheme::prm(self.table()?),
            "udm" => GainScheme::udm(self.table()?),
            other => match other.strip_prefix("custom:") {
                Some(values) => {
                    let gains = values
                        .split(',')
                        .map(|v| {
                            v.trim().parse::<f64>().map_err(|_| {
                                PrmError::Config(format!("custom gain {v:?} is not a number"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    GainScheme::custom(gains, self.scale)
                }
                None => Err(PrmError::Config(format!(
                    "unknown gain scheme {other:?} (binary, linear, exponential, prm, udm, custom:g0,...)"
                ))),
            },
        }
    }
}

fn discount(eval: &EvalArgs) -> Result<Discount> {
    let d: Discount = eval.discount.as_deref().unwrap_or("log").parse()?;
    match (d, eval.log_base) {
        (Discount::Log { .. }, Some(base)) => Discount::log(base),
        (Discount::Zipf, Some(_)) => Err(PrmError::Config(
            "--log-base only applies to the log discount".into(),
        )),
        (d, None) => Ok(d),
    }
}

fn eval_options(eval: &EvalArgs) -> prm_core::EvalOptions {
    prm_core::EvalOptions {
        strict_unjudged: eval.strict,
        strict_topics: eval.strict,
        ideal_pool: match eval.ideal_pool {
            Some(IdealPoolArg::Run) => IdealPool::RunLocal,
            _ => IdealPool::Judged,
        },
    }
}

fn k(eval: &EvalArgs) -> Result<usize> {
    match eval.k.unwrap_or(10) {
        0 => Err(PrmError::validation("k must be ≥ 1")),
        k => Ok(k),
    }
}

fn cmd_eval(s: Settings) -> Result<()> {
    let scale = load::scale(&s.input)?;
    let qrels_path = s
        .input
        .qrels
        .clone()
        .ok_or_else(|| PrmError::Config("eval needs --qrels".into()))?;
    let qrels = load::qrels(&qrels_path, &scale, "U1", &s.input)?;
    let runs = load::runs(&s.input)?;
    let k = k(&s.eval)?;
    let discount = discount(&s.eval)?;
    let gains = if s.eval.gains.is_empty() {
        vec!["prm".to_string()]
    } else {
        s.eval.gains.clone()
    };
    let metrics = if s.eval.metrics.is_empty() {
        vec![MetricArg::Ndcg]
    } else {
        s.eval.metrics.clone()
    };

    let mut ctx = GainContext {
        settings: &s,
        scale: &scale,
        table: None,
    };
    let evaluator = Evaluator::new(&qrels, eval_options(&s.eval));
    let mut reports = Vec::new();
    for run in &runs {
        for spec in &gains {
            let label = if gains.len() > 1 {
                format!("{}[{spec}]", run.system_id())
            } else {
                run.system_id().to_string()
            };
            for metric in &metrics {
                let report = match (metric, spec.as_str()) {
                    (MetricArg::Ndcg, _) => {
                        evaluator.ndcg_at_k(run, &ctx.scheme(spec)?, discount, k)?
                    }
                    (MetricArg::Count, "binary") => {
                        evaluator.count_binary_at(run, ctx.theta()?, k)?
                    }
                    (MetricArg::Count, "prm") => evaluator.count_prm_at(run, ctx.table()?, k)?,
                    (MetricArg::Precision, "binary") => {
                        evaluator.binary_precision_at(run, ctx.theta()?, k)?
                    }
                    (MetricArg::Precision, "prm") => {
                        evaluator.expected_precision_at(run, ctx.table()?, k)?
                    }
                    (_, other) => {
                        return Err(PrmError::Config(format!(
                            "count and precision are defined for binary and prm gains, not {other}"
                        )))
                    }
                };
                reports.push((label.clone(), report));
            }
        }
    }
    emit(
        &s.output,
        &report::metric_reports(&reports, format(&s.output))?,
    )
}

fn require_seed(a: &AnalysisArgs) -> Result<u64> {
    a.seed.ok_or_else(|| {
        PrmError::Config(
            "--seed is required: stochastic analyses only run with an explicit seed".into(),
        )
    })
}

fn cmd_bootstrap(s: Settings) -> Result<()> {
    let seed = require_seed(&s.analysis)?;
    let scale = load::scale(&s.input)?;
    let pairs = load::pairs(&s.input, &scale)?;
    let summary = bootstrap_topics(
        &pairs_by_topic(&pairs),
        user_model(&s.estimation, &scale)?,
        &scale,
        single_estimator(&s.estimation)?,
        design(&s.estimation),
        s.analysis.resamples.unwrap_or(300),
        seed,
    )?;
    emit(&s.output, &report::bootstrap(&summary, format(&s.output))?)
}

fn cmd_budget(s: Settings) -> Result<()> {
    let seed = require_seed(&s.analysis)?;
    let scale = load::scale(&s.input)?;
    let pairs = load::pairs(&s.input, &scale)?;
    let budgets = if s.analysis.budgets.is_empty() {
        vec![25, 50, 100, 200, 400, 800, 1600, 3200]
    } else {
        s.analysis.budgets.clone()
    };
    let curve = simulate_annotation_rounds(
        &pairs,
        user_model(&s.estimation, &scale)?,
        &scale,
        single_estimator(&s.estimation)?,
        design(&s.estimation),
        s.analysis.rounds.unwrap_or(50),
        &budgets,
        seed,
    )?;
    emit(&s.output, &report::curve(&curve, format(&s.output))?)
}

fn cmd_quality(s: Settings) -> Result<()> {
    let scale = load::scale(&s.input)?;
    let (reference_path, group) = match s.analysis.reference.unwrap_or(Group::U1) {
        Group::U1 => (s.input.qrels.clone(), "U1"),
        Group::U2 => (s.input.qrels2.clone(), "U2"),
    };
    let reference_path = reference_path.ok_or_else(|| {
        PrmError::Config(format!(
            "the quality sweep needs the {group} judgments with resource ids"
        ))
    })?;
    let reference = load::qrels(&reference_path, &scale, group, &s.input)?;
    let pairs = load::pairs(&s.input, &scale)?;
    let mut options = QualityOptions::for_scale(&scale);
    if let Some(depth) = s.analysis.depth {
        options.depth = depth;
    }
    if let Some(level) = s.analysis.quality_level {
        scale.check(level)?;
        options.quality_level = level;
    }
    let curve = quality_sensitivity(
        &reference,
        &pairs,
        user_model(&s.estimation, &scale)?,
        single_estimator(&s.estimation)?,
        design(&s.estimation),
        options,
    )?;
    emit(&s.output, &report::curve(&curve, format(&s.output))?)
}

fn cmd_robustness(s: Settings) -> Result<()> {
    let scale = load::scale(&s.input)?;
    let (Some(q1), Some(q2)) = (s.input.qrels.clone(), s.input.qrels2.clone()) else {
        return Err(PrmError::Config(
            "robustness needs --qrels and --qrels2".into(),
        ));
    };
    let u1 = load::qrels(&q1, &scale, "U1", &s.input)?;
    let u2 = load::qrels(&q2, &scale, "U2", &s.input)?;
    let runs = load::runs(&s.input)?;
    let specs = if s.eval.gains.is_empty() {
        ["binary", "linear", "exponential", "prm"]
            .map(String::from)
            .to_vec()
    } else {
        s.eval.gains.clone()
    };
    let mut ctx = GainContext {
        settings: &s,
        scale: &scale,
        table: None,
    };
    let schemes = specs
        .iter()
        .map(|spec| Ok(NamedScheme::new(spec, ctx.scheme(spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let variant = if s.analysis.tau_a {
        TauVariant::A
    } else {
        TauVariant::B
    };
    let (k, discount, options) = (k(&s.eval)?, discount(&s.eval)?, eval_options(&s.eval));
    let rows = robustness_study(&runs, &u1, &u2, &schemes, discount, k, options, variant)?;
    let correlations = scheme_correlations(&runs, &u1, &schemes, discount, k, options, variant)?;
    emit(
        &s.output,
        &report::robustness(&rows, &correlations, format(&s.output))?,
    )
}

fn cmd_tau(rankings: &[PathBuf], analysis: AnalysisArgs, output: OutputArgs) -> Result<()> {
    if rankings.len() != 2 {
        return Err(PrmError::Config(format!(
            "give exactly two --ranking files, got {}",
            rankings.len()
        )));
    }
    let a = load::ranking(&rankings[0])?;
    let b = load::ranking(&rankings[1])?;
    let variant = if analysis.tau_a {
        TauVariant::A
    } else {
        TauVariant::B
    };
    let value = kendall_tau(&a, &b, variant)?;
    emit(
        &output,
        &report::tau(&a, &b, variant, value, format(&output))?,
    )
}

fn cmd_validate(s: Settings) -> Result<()> {
    let mut lines = Vec::new();
    let scale = load::scale(&s.input)?;
    lines.push(format!("scale: {} levels ({scale})", scale.n_levels()));
    let describe = |name: &str, set: &JudgmentSet| {
        let hist: Vec<String> = set
            .level_histogram()
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{i}:{n}"))
            .collect();
        format!(
            "{name}: {} judgments, {} topics, levels {{{}}}{}",
            set.len(),
            set.topics().len(),
            hist.join(", "),
            if set.has_intents() {
                ", with intents"
            } else {
                ""
            }
        )
    };
    if let Some(p) = &s.input.qrels {
        lines.push(describe("qrels", &load::qrels(p, &scale, "U1", &s.input)?));
    }
    if let Some(p) = &s.input.qrels2 {
        lines.push(describe("qrels2", &load::qrels(p, &scale, "U2", &s.input)?));
    }
    if load::has_double_judgments(&s.input) {
        let pairs = load::pairs(&s.input, &scale)?;
        lines.push(format!(
            "double judgments: {} pairs over {} topics",
            pairs.len(),
            pairs_by_topic(&pairs).len()
        ));
    }
    if !s.input.runs.is_empty() {
        for run in load::runs(&s.input)? {
            let entries: usize = run.topics().map(|(_, e)| e.len()).sum();
            lines.push(format!(
                "run {}: {} topics, {} results, {} topics with score-order violations",
                run.system_id(),
                run.n_topics(),
                entries,
                run.score_order_violations().len()
            ));
        }
    }
    if let Some(strata) = load::strata(&s.input)? {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for v in strata.values() {
            *counts.entry(v).or_default() += 1;
        }
        let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        lines.push(format!("strata: {}", parts.join(", ")));
    }
    if let Some(p) = &s.estimation.table {
        let t = load::table(p)?;
        lines.push(format!(
            "table: {} at theta = {}",
            t.estimator(),
            t.user_model().threshold()
        ));
    }
    lines.push("ok".into());
    emit(&s.output, &(lines.join("\n") + "\n"))
}
