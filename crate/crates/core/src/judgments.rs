//! Graded judgments, qrels files and double-judgment pairing.
//!
//! Qrels records are `topic iteration doc level`. The iteration field is
//! ignored unless [`QrelsFormat::intent_column`] is set, in which case it
//! names the intent (subtopic) being judged. Records may carry trailing
//! `intent=<id>` and `resource=<id>` annotations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{PrmError, Result};
use crate::scale::{Level, RelevanceScale};
use crate::textio::{for_each_record, parse_level, split_annotations};

/// An information need: a topic, optionally narrowed to one intent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeedId {
    pub topic_id: String,
    pub intent_id: Option<String>,
}

impl NeedId {
    pub fn topic(topic_id: impl Into<String>) -> Self {
        Self {
            topic_id: topic_id.into(),
            intent_id: None,
        }
    }
}

impl fmt::Display for NeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.intent_id {
            Some(intent) => write!(f, "{}/{}", self.topic_id, intent),
            None => write!(f, "{}", self.topic_id),
        }
    }
}

/// Identifies a judged result independently of who judged it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResultKey {
    pub topic_id: String,
    pub doc_id: String,
    pub intent_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub topic_id: String,
    pub doc_id: String,
    pub assessor_group: String,
    pub level: Level,
    pub intent_id: Option<String>,
    pub resource_id: Option<String>,
}

impl Judgment {
    pub fn new(
        topic_id: impl Into<String>,
        doc_id: impl Into<String>,
        assessor_group: impl Into<String>,
        level: Level,
    ) -> Self {
        Self {
            topic_id: topic_id.into(),
            doc_id: doc_id.into(),
            assessor_group: assessor_group.into(),
            level,
            intent_id: None,
            resource_id: None,
        }
    }

    pub fn with_intent(mut self, intent: impl Into<String>) -> Self {
        self.intent_id = Some(intent.into());
        self
    }

    pub fn with_resource(mut self, resource: impl Into<String>) -> Self {
        self.resource_id = Some(resource.into());
        self
    }

    pub fn result_key(&self) -> ResultKey {
        ResultKey {
            topic_id: self.topic_id.clone(),
            doc_id: self.doc_id.clone(),
            intent_id: self.intent_id.clone(),
        }
    }

    pub fn need(&self) -> NeedId {
        NeedId {
            topic_id: self.topic_id.clone(),
            intent_id: self.intent_id.clone(),
        }
    }
}

type JudgmentKey = (String, String, String, Option<String>);

fn judgment_key(j: &Judgment) -> JudgmentKey {
    (
        j.topic_id.clone(),
        j.doc_id.clone(),
        j.assessor_group.clone(),
        j.intent_id.clone(),
    )
}

/// Graded judgments on a shared scale, kept in insertion (file) order.
#[derive(Clone, Debug)]
pub struct JudgmentSet {
    scale: RelevanceScale,
    judgments: Vec<Judgment>,
    topic_metadata: Option<BTreeMap<String, String>>,
    keys: HashMap<JudgmentKey, usize>,
}

impl PartialEq for JudgmentSet {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale
            && self.judgments == other.judgments
            && self.topic_metadata == other.topic_metadata
    }
}

impl JudgmentSet {
    pub fn new(scale: RelevanceScale) -> Self {
        Self {
            scale,
            judgments: Vec::new(),
            topic_metadata: None,
            keys: HashMap::new(),
        }
    }

    pub fn from_judgments<I>(scale: RelevanceScale, judgments: I) -> Result<Self>
    where
        I: IntoIterator<Item = Judgment>,
    {
        let mut set = Self::new(scale);
        for j in judgments {
            set.insert(j)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, judgment: Judgment) -> Result<()> {
        self.scale.check(judgment.level)?;
        let key = judgment_key(&judgment);
        if self.keys.contains_key(&key) {
            return Err(PrmError::validation(format!(
                "duplicate judgment for topic {} doc {} group {}{}",
                judgment.topic_id,
                judgment.doc_id,
                judgment.assessor_group,
                judgment
                    .intent_id
                    .as_deref()
                    .map(|i| format!(" intent {i}"))
                    .unwrap_or_default()
            )));
        }
        if let Some(meta) = &self.topic_metadata {
            if !meta.contains_key(&judgment.topic_id) {
                return Err(PrmError::validation(format!(
                    "topic {} has no query-type metadata",
                    judgment.topic_id
                )));
            }
        }
        self.keys.insert(key, self.judgments.len());
        self.judgments.push(judgment);
        Ok(())
    }

    /// Attaches a topic → query type map; it must cover every judged topic.
    pub fn with_topic_metadata(mut self, metadata: BTreeMap<String, String>) -> Result<Self> {
        if let Some(missing) = self
            .topics()
            .into_iter()
            .find(|t| !metadata.contains_key(t))
        {
            return Err(PrmError::validation(format!(
                "topic {missing} has no query-type metadata"
            )));
        }
        self.topic_metadata = Some(metadata);
        Ok(self)
    }

    pub fn topic_metadata(&self) -> Option<&BTreeMap<String, String>> {
        self.topic_metadata.as_ref()
    }

    pub fn scale(&self) -> &RelevanceScale {
        &self.scale
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Judgment> {
        self.judgments.iter()
    }

    pub fn topics(&self) -> BTreeSet<String> {
        self.judgments.iter().map(|j| j.topic_id.clone()).collect()
    }

    pub fn needs(&self) -> BTreeSet<NeedId> {
        self.judgments.iter().map(Judgment::need).collect()
    }

    pub fn groups(&self) -> BTreeSet<String> {
        self.judgments
            .iter()
            .map(|j| j.assessor_group.clone())
            .collect()
    }

    pub fn has_intents(&self) -> bool {
        self.judgments.iter().any(|j| j.intent_id.is_some())
    }

    /// Per-level judgment counts, indexed `0..=T`.
    pub fn level_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.scale.n_levels()];
        for j in &self.judgments {
            hist[j.level] += 1;
        }
        hist
    }

    /// Keeps the judgments for which `keep` returns true.
    pub fn filter<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&Judgment) -> bool,
    {
        let mut out = Self::new(self.scale.clone());
        for j in self.judgments.iter().filter(|j| keep(j)) {
            out.keys.insert(judgment_key(j), out.judgments.len());
            out.judgments.push(j.clone());
        }
        out.topic_metadata = self.topic_metadata.clone();
        out
    }

    /// Levels judged for each information need, `doc_id → level`.
    ///
    /// If several groups judged the same result the first judgment in file
    /// order is used.
    pub fn levels_by_need(&self) -> BTreeMap<NeedId, HashMap<String, Level>> {
        let mut out: BTreeMap<NeedId, HashMap<String, Level>> = BTreeMap::new();
        for j in &self.judgments {
            out.entry(j.need())
                .or_default()
                .entry(j.doc_id.clone())
                .or_insert(j.level);
        }
        out
    }
}

/// Parsing options for qrels files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QrelsFormat {
    /// Read the second (iteration) column as the intent id.
    pub intent_column: bool,
}

/// Parses a qrels stream; every judgment is attributed to `group`.
pub fn parse_qrels<R: BufRead>(
    reader: R,
    scale: &RelevanceScale,
    group: &str,
) -> Result<JudgmentSet> {
    parse_qrels_with(reader, scale, group, QrelsFormat::default())
}

pub fn parse_qrels_with<R: BufRead>(
    reader: R,
    scale: &RelevanceScale,
    group: &str,
    format: QrelsFormat,
) -> Result<JudgmentSet> {
    let mut set = JudgmentSet::new(scale.clone());
    for_each_record(reader, |line, fields| {
        let (head, notes) = split_annotations(line, fields, 4, &["intent", "resource"])?;
        let level = parse_level(line, head[3])?;
        let mut judgment = Judgment::new(head[0], head[2], group, level);
        if format.intent_column {
            judgment.intent_id = Some(head[1].to_string());
        }
        for (key, value) in notes {
            match key {
                "intent" => judgment.intent_id = Some(value.to_string()),
                _ => judgment.resource_id = Some(value.to_string()),
            }
        }
        set.insert(judgment).map_err(|e| match e {
            PrmError::Validation(msg) => PrmError::Validation(format!("line {line}: {msg}")),
            other => other,
        })
    })?;
    Ok(set)
}

/// Writes judgments as qrels records; intents and resources become annotations.
pub fn write_qrels<W: Write>(set: &JudgmentSet, mut out: W) -> Result<()> {
    for j in set.iter() {
        write!(out, "{} 0 {} {}", j.topic_id, j.doc_id, j.level)?;
        if let Some(intent) = &j.intent_id {
            write!(out, " intent={intent}")?;
        }
        if let Some(resource) = &j.resource_id {
            write!(out, " resource={resource}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Two independent judgments of the same result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentPair {
    pub topic_id: String,
    pub doc_id: String,
    pub intent_id: Option<String>,
    pub level_u1: Level,
    pub level_u2: Level,
}

impl JudgmentPair {
    pub fn new(
        topic_id: impl Into<String>,
        doc_id: impl Into<String>,
        u1: Level,
        u2: Level,
    ) -> Self {
        Self {
            topic_id: topic_id.into(),
            doc_id: doc_id.into(),
            intent_id: None,
            level_u1: u1,
            level_u2: u2,
        }
    }

    /// The same pair with the two judgment roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            level_u1: self.level_u2,
            level_u2: self.level_u1,
            ..self.clone()
        }
    }

    pub fn result_key(&self) -> ResultKey {
        ResultKey {
            topic_id: self.topic_id.clone(),
            doc_id: self.doc_id.clone(),
            intent_id: self.intent_id.clone(),
        }
    }
}

/// Results judged by only one of the two groups.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairCoverage {
    pub paired: usize,
    pub only_u1: Vec<ResultKey>,
    pub only_u2: Vec<ResultKey>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<JudgmentPair>,
    pub coverage: PairCoverage,
}

fn first_level_by_key(set: &JudgmentSet) -> (Vec<ResultKey>, HashMap<ResultKey, Level>) {
    let mut order = Vec::new();
    let mut levels = HashMap::new();
    let mut extras = 0usize;
    for j in set.iter() {
        let key = j.result_key();
        if levels.contains_key(&key) {
            extras += 1;
            continue;
        }
        levels.insert(key.clone(), j.level);
        order.push(key);
    }
    if extras > 0 {
        warn!("{extras} repeated judgments of already-judged results ignored while pairing");
    }
    (order, levels)
}

/// Inner join of two judgment sets on `(topic, doc, intent)`.
pub fn pair_judgments(set_u1: &JudgmentSet, set_u2: &JudgmentSet) -> Result<Pairing> {
    if set_u1.scale() != set_u2.scale() {
        return Err(PrmError::validation(format!(
            "scale mismatch between judgment sets: [{}] vs [{}]",
            set_u1.scale(),
            set_u2.scale()
        )));
    }
    let (order_u1, levels_u1) = first_level_by_key(set_u1);
    let (order_u2, levels_u2) = first_level_by_key(set_u2);

    let mut pairs = Vec::new();
    let mut coverage = PairCoverage::default();
    for key in order_u1 {
        match levels_u2.get(&key) {
            Some(&u2) => pairs.push(JudgmentPair {
                level_u1: levels_u1[&key],
                level_u2: u2,
                topic_id: key.topic_id,
                doc_id: key.doc_id,
                intent_id: key.intent_id,
            }),
            None => coverage.only_u1.push(key),
        }
    }
    coverage.only_u2 = order_u2
        .into_iter()
        .filter(|k| !levels_u1.contains_key(k))
        .collect();
    coverage.paired = pairs.len();
    Ok(Pairing { pairs, coverage })
}

/// Builds pairs from a set holding several judgments per result.
///
/// The first two judgments of each result in file order become `u1` and
/// `u2`; further judgments are ignored with a warning. Returns the pairs and
/// the number of ignored judgments.
pub fn pairs_from_multiple(set: &JudgmentSet) -> (Vec<JudgmentPair>, usize) {
    let mut order = Vec::new();
    let mut seen: HashMap<ResultKey, Vec<Level>> = HashMap::new();
    for j in set.iter() {
        let key = j.result_key();
        let entry = seen.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        entry.push(j.level);
    }
    let mut ignored = 0;
    let mut pairs = Vec::new();
    for key in order {
        let levels = &seen[&key];
        if levels.len() < 2 {
            continue;
        }
        ignored += levels.len() - 2;
        pairs.push(JudgmentPair {
            topic_id: key.topic_id,
            doc_id: key.doc_id,
            intent_id: key.intent_id,
            level_u1: levels[0],
            level_u2: levels[1],
        });
    }
    if ignored > 0 {
        warn!("{ignored} judgments beyond the first two per result were ignored");
    }
    (pairs, ignored)
}

/// Parses a paired-judgment stream of `topic doc level_u1 level_u2` records.
pub fn parse_pairs<R: BufRead>(reader: R, scale: &RelevanceScale) -> Result<Vec<JudgmentPair>> {
    let mut pairs = Vec::new();
    let mut keys = BTreeSet::new();
    for_each_record(reader, |line, fields| {
        let (head, notes) = split_annotations(line, fields, 4, &["intent"])?;
        let u1 = parse_level(line, head[2])?;
        let u2 = parse_level(line, head[3])?;
        for level in [u1, u2] {
            scale
                .check(level)
                .map_err(|e| PrmError::Validation(format!("line {line}: {e}")))?;
        }
        let mut pair = JudgmentPair::new(head[0], head[1], u1, u2);
        if let Some((_, intent)) = notes.first() {
            pair.intent_id = Some(intent.to_string());
        }
        if !keys.insert(pair.result_key()) {
            return Err(PrmError::Validation(format!(
                "line {line}: duplicate pair for topic {} doc {}",
                pair.topic_id, pair.doc_id
            )));
        }
        pairs.push(pair);
        Ok(())
    })?;
    Ok(pairs)
}

pub fn write_pairs<W: Write>(pairs: &[JudgmentPair], mut out: W) -> Result<()> {
    for p in pairs {
        write!(
            out,
            "{} {} {} {}",
            p.topic_id, p.doc_id, p.level_u1, p.level_u2
        )?;
        if let Some(intent) = &p.intent_id {
            write!(out, " intent={intent}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Groups pairs by topic, preserving pair order inside each topic.
pub fn pairs_by_topic(pairs: &[JudgmentPair]) -> BTreeMap<String, Vec<JudgmentPair>> {
    let mut out: BTreeMap<String, Vec<JudgmentPair>> = BTreeMap::new();
    for p in pairs {
        out.entry(p.topic_id.clone()).or_default().push(p.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scale3() -> RelevanceScale {
        RelevanceScale::numeric(2).unwrap()
    }

    #[test]
    fn parses_a_single_record() {
        let set = parse_qrels("201 0 d1 2\n".as_bytes(), &scale3(), "U1").unwrap();
        let j = set.iter().next().unwrap();
        assert_eq!(j.topic_id, "201");
        assert_eq!(j.doc_id, "d1");
        assert_eq!(j.level, 2);
        assert_eq!(j.assessor_group, "U1");
    }

    #[test]
    fn level_above_top_is_a_validation_error() {
        let err = parse_qrels("201 0 d1 9\n".as_bytes(), &scale3(), "U1").unwrap_err();
        assert!(matches!(err, PrmError::Validation(_)));
        assert!(err.to_string().contains("level 9 > T=2"), "{err}");
    }

    #[test]
    fn negative_levels_clamp_to_zero() {
        let set = parse_qrels("201 0 d1 -2\n".as_bytes(), &scale3(), "U1").unwrap();
        assert_eq!(set.iter().next().unwrap().level, 0);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_qrels(
            "# header\n201 0 d1 1\n201 0 d2\n".as_bytes(),
            &scale3(),
            "U1",
        )
        .unwrap_err();
        match err {
            PrmError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_qrels("201 0 d1 x\n".as_bytes(), &scale3(), "U1").unwrap_err();
        assert!(matches!(err, PrmError::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_judgment_is_rejected() {
        let err = parse_qrels("1 0 d1 1\n1 0 d1 2\n".as_bytes(), &scale3(), "U1").unwrap_err();
        assert!(matches!(err, PrmError::Validation(_)));
    }

    #[test]
    fn same_doc_different_intents_is_allowed() {
        let text = "1 a d1 1\n1 b d1 2\n";
        let set = parse_qrels_with(
            text.as_bytes(),
            &scale3(),
            "U1",
            QrelsFormat {
                intent_column: true,
            },
        )
        .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.needs().len(), 2);
    }

    #[test]
    fn annotations_are_read() {
        let set = parse_qrels(
            "7 0 d1 1 resource=e012 intent=3\n".as_bytes(),
            &scale3(),
            "U1",
        )
        .unwrap();
        let j = set.iter().next().unwrap();
        assert_eq!(j.resource_id.as_deref(), Some("e012"));
        assert_eq!(j.intent_id.as_deref(), Some("3"));
        assert!(parse_qrels("7 0 d1 1 bogus\n".as_bytes(), &scale3(), "U1").is_err());
    }

    #[test]
    fn scale_mismatch_refuses_pairing() {
        let a = JudgmentSet::new(scale3());
        let b = JudgmentSet::new(RelevanceScale::numeric(3).unwrap());
        assert!(pair_judgments(&a, &b).is_err());
    }

    #[test]
    fn disjoint_sets_give_no_pairs() {
        let a = parse_qrels("1 0 a 1\n1 0 b 0\n".as_bytes(), &scale3(), "U1").unwrap();
        let b = parse_qrels("1 0 c 1\n".as_bytes(), &scale3(), "U2").unwrap();
        let pairing = pair_judgments(&a, &b).unwrap();
        assert!(pairing.pairs.is_empty());
        assert_eq!(pairing.coverage.only_u1.len(), 2);
        assert_eq!(pairing.coverage.only_u2.len(), 1);
    }

    #[test]
    fn pairs_from_multiple_keeps_first_two() {
        let set = JudgmentSet::from_judgments(
            scale3(),
            vec![
                Judgment::new("1", "d", "a", 2),
                Judgment::new("1", "d", "b", 1),
                Judgment::new("1", "d", "c", 0),
                Judgment::new("1", "e", "a", 0),
            ],
        )
        .unwrap();
        let (pairs, ignored) = pairs_from_multiple(&set);
        assert_eq!(pairs, vec![JudgmentPair::new("1", "d", 2, 1)]);
        assert_eq!(ignored, 1);
    }

    #[test]
    fn pairs_file_parses_and_validates() {
        let pairs = parse_pairs("1 d1 2 1\n1 d2 -1 0\n".as_bytes(), &scale3()).unwrap();
        assert_eq!(pairs[1].level_u1, 0);
        assert!(parse_pairs("1 d1 3 1\n".as_bytes(), &scale3()).is_err());
        assert!(parse_pairs("1 d1 2 1\n1 d1 0 0\n".as_bytes(), &scale3()).is_err());
    }

    #[test]
    fn topic_metadata_must_cover_topics() {
        let set = parse_qrels("1 0 a 1\n2 0 b 0\n".as_bytes(), &scale3(), "U1").unwrap();
        let mut meta = BTreeMap::new();
        meta.insert("1".to_string(), "nav".to_string());
        assert!(set.clone().with_topic_metadata(meta.clone()).is_err());
        meta.insert("2".to_string(), "inf".to_string());
        assert!(set.with_topic_metadata(meta).is_ok());
    }
}
