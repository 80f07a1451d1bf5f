//! Topic-level side files: strata (query types) and intent probabilities.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;

use crate::error::{PrmError, Result};
use crate::judgments::{Judgment, JudgmentSet};
use crate::textio::for_each_record;

/// Intent id that marks "none of the intents is relevant".
pub const NO_INTENT: &str = "0";

/// Parses `topic stratum` records.
pub fn parse_strata<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut strata = BTreeMap::new();
    for_each_record(reader, |line, fields| {
        if fields.len() != 2 {
            return Err(PrmError::parse(
                line,
                format!("expected 2 fields (topic stratum), found {}", fields.len()),
            ));
        }
        if strata
            .insert(fields[0].to_string(), fields[1].to_string())
            .is_some()
        {
            return Err(PrmError::Validation(format!(
                "line {line}: topic {} assigned to a stratum twice",
                fields[0]
            )));
        }
        Ok(())
    })?;
    Ok(strata)
}

/// Per-topic intent probabilities from a `topic intent probability` sidecar.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntentProbabilities {
    by_topic: BTreeMap<String, Vec<(String, f64)>>,
}

impl IntentProbabilities {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut by_topic: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for_each_record(reader, |line, fields| {
            if fields.len() != 3 {
                return Err(PrmError::parse(
                    line,
                    format!(
                        "expected 3 fields (topic intent probability), found {}",
                        fields.len()
                    ),
                ));
            }
            let p: f64 = fields[2].parse().map_err(|_| {
                PrmError::parse(line, format!("probability {:?} is not a number", fields[2]))
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(PrmError::Validation(format!(
                    "line {line}: probability {p} outside [0, 1]"
                )));
            }
            let intents = by_topic.entry(fields[0].to_string()).or_default();
            if intents.iter().any(|(i, _)| i == fields[1]) {
                return Err(PrmError::Validation(format!(
                    "line {line}: intent {} of topic {} listed twice",
                    fields[1], fields[0]
                )));
            }
            intents.push((fields[1].to_string(), p));
            Ok(())
        })?;
        Ok(Self { by_topic })
    }

    pub fn intents(&self, topic: &str) -> Option<impl Iterator<Item = &str>> {
        self.by_topic
            .get(topic)
            .map(|v| v.iter().map(|(i, _)| i.as_str()))
    }

    /// Most probable intent; ties go to the lexicographically smallest id.
    pub fn top_intent(&self, topic: &str) -> Option<&str> {
        self.by_topic.get(topic).and_then(|intents| {
            intents
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .map(|(i, _)| i.as_str())
        })
    }
}

/// Keeps only judgments of each topic's most probable intent.
///
/// Judgments without an intent (e.g. navigational topics) are kept as-is.
pub fn top_intent_only(set: &JudgmentSet, probs: &IntentProbabilities) -> Result<JudgmentSet> {
    for j in set.iter() {
        if j.intent_id.is_some() && probs.top_intent(&j.topic_id).is_none() {
            return Err(PrmError::validation(format!(
                "topic {} has intent judgments but no intent probabilities",
                j.topic_id
            )));
        }
    }
    Ok(set.filter(|j| match &j.intent_id {
        None => true,
        Some(intent) => probs.top_intent(&j.topic_id) == Some(intent.as_str()),
    }))
}

/// Replaces each intent-`0` judgment with an explicit level-0 judgment for
/// every declared intent of its topic.
///
/// Declared intents come from `declared` when given, otherwise from the
/// intents that occur in `set` for that topic. An explicit judgment for a
/// `(topic, doc, group, intent)` takes precedence over an expanded one.
pub fn expand_no_intent(
    set: &JudgmentSet,
    declared: Option<&IntentProbabilities>,
) -> Result<JudgmentSet> {
    let mut seen_intents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut explicit = HashSet::new();
    for j in set.iter() {
        if let Some(intent) = j.intent_id.as_deref().filter(|i| *i != NO_INTENT) {
            seen_intents.entry(&j.topic_id).or_default().insert(intent);
            explicit.insert((
                j.topic_id.as_str(),
                j.doc_id.as_str(),
                j.assessor_group.as_str(),
                intent,
            ));
        }
    }

    let mut out = Vec::with_capacity(set.len());
    for j in set.iter() {
        if j.intent_id.as_deref() != Some(NO_INTENT) {
            out.push(j.clone());
            continue;
        }
        let intents: Vec<&str> = match declared.and_then(|d| d.intents(&j.topic_id)) {
            Some(it) => it.filter(|i| *i != NO_INTENT).collect(),
            None => seen_intents
                .get(j.topic_id.as_str())
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default(),
        };
        for intent in intents {
            if explicit.contains(&(
                j.topic_id.as_str(),
                j.doc_id.as_str(),
                j.assessor_group.as_str(),
                intent,
            )) {
                continue;
            }
            let mut expanded =
                Judgment::new(&j.topic_id, &j.doc_id, &j.assessor_group, 0).with_intent(intent);
            expanded.resource_id = j.resource_id.clone();
            out.push(expanded);
        }
    }
    let mut result = JudgmentSet::from_judgments(set.scale().clone(), out)?;
    if let Some(meta) = set.topic_metadata() {
        result = result.with_topic_metadata(meta.clone())?;
    }
    Ok(result)
}
