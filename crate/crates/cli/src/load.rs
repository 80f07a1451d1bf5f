//! Reading input files into core data structures.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use log::{info, warn};
use prm_core::disagreement::TableRecord;
use prm_core::judgments::{pair_judgments, parse_pairs, parse_qrels_with, QrelsFormat};
use prm_core::run::{parse_run_with, RunFormat};
use prm_core::topics::{expand_no_intent, parse_strata, top_intent_only, IntentProbabilities};
use prm_core::*;

use crate::args::{io_context, InputArgs};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_context(path, e))
}

/// Attaches the file name to parse and validation errors.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        PrmError::Parse { line, message } => PrmError::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        PrmError::Validation(m) => PrmError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn scale(input: &InputArgs) -> Result<RelevanceScale> {
    match (&input.scale, input.top) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
            RelevanceScale::from_toml_str(&text)
        }
        (None, Some(top)) => RelevanceScale::numeric(top),
        (None, None) => Err(PrmError::Config(
            "a relevance scale is required: pass --scale <file> or --top <T>".into(),
        )),
    }
}

fn intents(input: &InputArgs) -> Result<Option<IntentProbabilities>> {
    input
        .intents
        .as_deref()
        .map(|p| in_file(p, IntentProbabilities::parse(open(p)?)))
        .transpose()
}

pub fn qrels(
    path: &Path,
    scale: &RelevanceScale,
    group: &str,
    input: &InputArgs,
) -> Result<JudgmentSet> {
    let format = QrelsFormat {
        intent_column: input.intent_column,
    };
    let mut set = in_file(path, parse_qrels_with(open(path)?, scale, group, format))?;
    let probs = intents(input)?;
    if input.expand_no_intent {
        set = expand_no_intent(&set, probs.as_ref())?;
    }
    if input.top_intent_only {
        let probs = probs.expect("clap enforces --intents with --top-intent-only");
        set = top_intent_only(&set, &probs)?;
    }
    info!(
        "{}: {} judgments over {} topics",
        path.display(),
        set.len(),
        set.topics().len()
    );
    Ok(set)
}

/// The double judgments named by `--pairs` or `--qrels` + `--qrels2`.
pub fn pairs(input: &InputArgs, scale: &RelevanceScale) -> Result<Vec<JudgmentPair>> {
    if let Some(path) = &input.pairs {
        let mut pairs = in_file(path, parse_pairs(open(path)?, scale))?;
        if input.top_intent_only {
            let probs = intents(input)?.expect("clap enforces --intents with --top-intent-only");
            pairs.retain(|p| match &p.intent_id {
                None => true,
                Some(i) => probs.top_intent(&p.topic_id) == Some(i.as_str()),
            });
        }
        return Ok(pairs);
    }
    match (&input.qrels, &input.qrels2) {
        (Some(a), Some(b)) => {
            let u1 = qrels(a, scale, "U1", input)?;
            let u2 = qrels(b, scale, "U2", input)?;
            let pairing = pair_judgments(&u1, &u2)?;
            let c = &pairing.coverage;
            if !c.only_u1.is_empty() || !c.only_u2.is_empty() {
                warn!(
                    "{} results paired; {} judged only by U1, {} only by U2",
                    c.paired,
                    c.only_u1.len(),
                    c.only_u2.len()
                );
            }
            Ok(pairing.pairs)
        }
        _ => Err(PrmError::Estimation(
            "no double judgments: pass --pairs, or --qrels together with --qrels2".into(),
        )),
    }
}

pub fn has_double_judgments(input: &InputArgs) -> bool {
    input.pairs.is_some() || (input.qrels.is_some() && input.qrels2.is_some())
}

pub fn runs(input: &InputArgs) -> Result<Vec<RunRanking>> {
    if input.runs.is_empty() {
        return Err(PrmError::Config("no run files given (--run)".into()));
    }
    let format = RunFormat {
        allow_duplicate_docs: input.allow_duplicates,
    };
    let runs = input
        .runs
        .iter()
        .map(|p| in_file(p, parse_run_with(open(p)?, format)))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    for r in &runs {
        if !seen.insert(r.system_id()) {
            return Err(PrmError::validation(format!(
                "two run files share the system id {}",
                r.system_id()
            )));
        }
    }
    Ok(runs)
}

pub fn strata(input: &InputArgs) -> Result<Option<BTreeMap<String, String>>> {
    input
        .strata
        .as_deref()
        .map(|p| in_file(p, parse_strata(open(p)?)))
        .transpose()
}

/// Reads a table written by `estimate --format json` (a list of tables, of
/// which exactly one must be selected) or a single table object.
pub fn table(path: &Path) -> Result<DisagreementTable> {
    let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
    let bad = |e: serde_json::Error| PrmError::Config(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    let record: TableRecord = match value {
        serde_json::Value::Array(mut items) => {
            if items.len() != 1 {
                return Err(PrmError::Config(format!(
                    "{}: holds {} tables; keep exactly one",
                    path.display(),
                    items.len()
                )));
            }
            serde_json::from_value(items.remove(0)).map_err(bad)?
        }
        other => serde_json::from_value(other).map_err(bad)?,
    };
    DisagreementTable::from_record(&record)
}

pub fn ranking(path: &Path) -> Result<prm_core::analysis::SystemRanking> {
    let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |m: String| PrmError::Parse {
            line: i + 1,
            message: format!("{}: {m}", path.display()),
        };
        if fields.len() != 2 {
            return Err(parse_err(format!(
                "expected `system score`, got {} fields",
                fields.len()
            )));
        }
        let score: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("score {:?} is not a number", fields[1])))?;
        scores.push((fields[0].to_string(), score));
    }
    prm_core::analysis::SystemRanking::new(path.display().to_string(), scores)
}
