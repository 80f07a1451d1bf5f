//! System runs in the `topic Q0 doc rank score system` format.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use log::warn;

use crate::error::{PrmError, Result};
use crate::textio::for_each_record;

#[derive(Clone, Debug, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunFormat {
    /// Accept repeated documents within a topic (merged result lists).
    pub allow_duplicate_docs: bool,
}

/// A ranked result list per topic. Entries are ordered by rank; the rank
/// field wins when ranks and scores disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRanking {
    system_id: String,
    topics: BTreeMap<String, Vec<RunEntry>>,
    score_order_violations: Vec<String>,
}

impl RunRanking {
    /// Builds a run from per-topic lists already in rank order; ranks are
    /// assigned `1..=n`.
    pub fn from_ranked_lists<I, T, D>(system_id: impl Into<String>, lists: I) -> Self
    where
        I: IntoIterator<Item = (T, Vec<D>)>,
        T: Into<String>,
        D: Into<String>,
    {
        let topics = lists
            .into_iter()
            .map(|(topic, docs)| {
                let n = docs.len();
                let entries = docs
                    .into_iter()
                    .enumerate()
                    .map(|(i, d)| RunEntry {
                        doc_id: d.into(),
                        rank: i + 1,
                        score: (n - i) as f64,
                    })
                    .collect();
                (topic.into(), entries)
            })
            .collect();
        Self {
            system_id: system_id.into(),
            topics,
            score_order_violations: Vec::new(),
        }
    }

    pub fn system_id(&self) -> &str {
        &self.system_id
    }

    pub fn topics(&self) -> impl Iterator<Item = (&str, &[RunEntry])> {
        self.topics.iter().map(|(t, e)| (t.as_str(), e.as_slice()))
    }

    pub fn topic(&self, topic_id: &str) -> Option<&[RunEntry]> {
        self.topics.get(topic_id).map(Vec::as_slice)
    }

    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }

    /// Topics where scores increase somewhere down the ranking.
    pub fn score_order_violations(&self) -> &[String] {
        &self.score_order_violations
    }
}

pub fn parse_run<R: BufRead>(reader: R) -> Result<RunRanking> {
    parse_run_with(reader, RunFormat::default())
}

pub fn parse_run_with<R: BufRead>(reader: R, format: RunFormat) -> Result<RunRanking> {
    let mut system: Option<String> = None;
    let mut topics: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for_each_record(reader, |line, fields| {
        if fields.len() != 6 {
            return Err(PrmError::parse(
                line,
                format!(
                    "expected 6 fields (topic Q0 doc rank score system), found {}",
                    fields.len()
                ),
            ));
        }
        let rank: usize = fields[3].parse().ok().filter(|r| *r >= 1).ok_or_else(|| {
            PrmError::parse(
                line,
                format!("rank {:?} is not a positive integer", fields[3]),
            )
        })?;
        let score: f64 = fields[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| {
                PrmError::parse(line, format!("score {:?} is not a number", fields[4]))
            })?;
        match &system {
            None => system = Some(fields[5].to_string()),
            Some(s) if s != fields[5] => {
                return Err(PrmError::Validation(format!(
                    "line {line}: inconsistent system id {:?} (expected {s:?})",
                    fields[5]
                )))
            }
            Some(_) => {}
        }
        topics.entry(fields[0].to_string()).or_default().push((
            line,
            RunEntry {
                doc_id: fields[2].to_string(),
                rank,
                score,
            },
        ));
        Ok(())
    })?;

    let system_id = system.ok_or_else(|| PrmError::validation("run file has no records"))?;
    let mut out = BTreeMap::new();
    let mut violations = Vec::new();
    for (topic, mut entries) in topics {
        entries.sort_by_key(|(_, e)| e.rank);
        let mut docs = HashSet::new();
        for (expected, (line, entry)) in entries.iter().enumerate() {
            let expected = expected + 1;
            if entry.rank < expected {
                return Err(PrmError::Validation(format!(
                    "line {line}: duplicate rank {} in topic {topic}",
                    entry.rank
                )));
            }
            if entry.rank > expected {
                return Err(PrmError::Validation(format!(
                    "topic {topic}: ranks are not contiguous (missing rank {expected})"
                )));
            }
            if !docs.insert(entry.doc_id.as_str()) && !format.allow_duplicate_docs {
                return Err(PrmError::Validation(format!(
                    "line {line}: duplicate document {} in topic {topic}",
                    entry.doc_id
                )));
            }
        }
        if entries.windows(2).any(|w| w[1].1.score > w[0].1.score) {
            warn!("run {system_id}, topic {topic}: scores increase with rank; rank order kept");
            violations.push(topic.clone());
        }
        out.insert(topic, entries.into_iter().map(|(_, e)| e).collect());
    }
    Ok(RunRanking {
        system_id,
        topics: out,
        score_order_violations: violations,
    })
}

pub fn write_run<W: Write>(run: &RunRanking, mut out: W) -> Result<()> {
    for (topic, entries) in run.topics() {
        for e in entries {
            writeln!(
                out,
                "{topic} Q0 {} {} {} {}",
                e.doc_id,
                e.rank,
                e.score,
                run.system_id()
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_run() {
        let text = "1 Q0 a 1 3.0 sys\n1 Q0 b 2 2.0 sys\n1 Q0 c 3 1.0 sys\n";
        let run = parse_run(text.as_bytes()).unwrap();
        assert_eq!(run.system_id(), "sys");
        assert_eq!(run.n_topics(), 1);
        assert_eq!(run.topic("1").unwrap().len(), 3);
        assert!(run.score_order_violations().is_empty());
    }

    #[test]
    fn duplicate_rank_is_rejected() {
        let text = "1 Q0 a 1 3 s\n1 Q0 b 1 2 s\n1 Q0 c 2 1 s\n";
        let err = parse_run(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("duplicate rank"), "{err}");
    }

    #[test]
    fn gaps_in_ranks_are_rejected() {
        let text = "1 Q0 a 1 3 s\n1 Q0 b 3 2 s\n";
        assert!(parse_run(text.as_bytes()).is_err());
    }

    #[test]
    fn increasing_scores_are_flagged_not_reordered() {
        let text = "1 Q0 a 1 1.0 s\n1 Q0 b 2 2.0 s\n1 Q0 c 3 3.0 s\n";
        let run = parse_run(text.as_bytes()).unwrap();
        let docs: Vec<_> = run.topic("1").unwrap().iter().map(|e| &e.doc_id).collect();
        assert_eq!(docs, ["a", "b", "c"]);
        assert_eq!(run.score_order_violations(), ["1"]);
    }

    #[test]
    fn input_order_does_not_matter() {
        let text = "1 Q0 c 3 1 s\n1 Q0 a 1 3 s\n1 Q0 b 2 2 s\n";
        let run = parse_run(text.as_bytes()).unwrap();
        assert_eq!(run.topic("1").unwrap()[0].doc_id, "a");
    }

    #[test]
    fn inconsistent_system_is_rejected() {
        let text = "1 Q0 a 1 3 s\n1 Q0 b 2 2 t\n";
        assert!(parse_run(text.as_bytes()).is_err());
    }

    #[test]
    fn duplicate_docs_need_opt_in() {
        let text = "1 Q0 a 1 3 s\n1 Q0 a 2 2 s\n";
        assert!(parse_run(text.as_bytes()).is_err());
        let run = parse_run_with(
            text.as_bytes(),
            RunFormat {
                allow_duplicate_docs: true,
            },
        )
        .unwrap();
        assert_eq!(run.topic("1").unwrap().len(), 2);
    }

    #[test]
    fn empty_run_is_an_error() {
        assert!(parse_run("# nothing\n".as_bytes()).is_err());
    }
}
