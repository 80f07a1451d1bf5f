//! Stability of system orderings across assessor groups and gain schemes.

use serde::{Deserialize, Serialize};

use super::tau::{kendall_tau, SystemRanking, TauVariant};
use crate::error::{PrmError, Result};
use crate::gains::{Discount, GainScheme};
use crate::judgments::JudgmentSet;
use crate::metrics::{EvalOptions, Evaluator};
use crate::run::RunRanking;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedScheme {
    pub name: String,
    pub scheme: GainScheme,
}

impl NamedScheme {
    pub fn new(name: impl Into<String>, scheme: GainScheme) -> Self {
        Self {
            name: name.into(),
            scheme,
        }
    }
}

/// Orders runs by mean nDCG@k.
pub fn system_ranking(
    runs: &[RunRanking],
    evaluator: &Evaluator<'_>,
    scheme: &GainScheme,
    discount: Discount,
    k: usize,
) -> Result<SystemRanking> {
    let scores = runs
        .iter()
        .map(|run| {
            evaluator
                .ndcg_at_k(run, scheme, discount, k)
                .map(|r| (run.system_id().to_string(), r.mean))
        })
        .collect::<Result<Vec<_>>>()?;
    SystemRanking::new(format!("ndcg@{k}"), scores)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRow {
    pub scheme: String,
    pub tau: f64,
    pub ranking_u1: SystemRanking,
    pub ranking_u2: SystemRanking,
}

/// For each scheme, ranks the runs once per judgment set and correlates the
/// two orderings.
#[allow(clippy::too_many_arguments)]
pub fn robustness_study(
    runs: &[RunRanking],
    set_u1: &JudgmentSet,
    set_u2: &JudgmentSet,
    schemes: &[NamedScheme],
    discount: Discount,
    k: usize,
    options: EvalOptions,
    variant: TauVariant,
) -> Result<Vec<RobustnessRow>> {
    if runs.len() < 2 {
        return Err(PrmError::Analysis("need at least two runs to rank".into()));
    }
    let ev1 = Evaluator::new(set_u1, options);
    let ev2 = Evaluator::new(set_u2, options);
    schemes
        .iter()
        .map(|s| {
            let ranking_u1 = system_ranking(runs, &ev1, &s.scheme, discount, k)?;
            let ranking_u2 = system_ranking(runs, &ev2, &s.scheme, discount, k)?;
            Ok(RobustnessRow {
                scheme: s.name.clone(),
                tau: kendall_tau(&ranking_u1, &ranking_u2, variant)?,
                ranking_u1,
                ranking_u2,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeCorrelation {
    pub a: String,
    pub b: String,
    pub tau: f64,
}

/// Kendall's tau between the orderings produced by every pair of schemes on
/// one judgment set.
pub fn scheme_correlations(
    runs: &[RunRanking],
    set: &JudgmentSet,
    schemes: &[NamedScheme],
    discount: Discount,
    k: usize,
    options: EvalOptions,
    variant: TauVariant,
) -> Result<Vec<SchemeCorrelation>> {
    let ev = Evaluator::new(set, options);
    let rankings = schemes
        .iter()
        .map(|s| system_ranking(runs, &ev, &s.scheme, discount, k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..schemes.len() {
        for j in i + 1..schemes.len() {
            out.push(SchemeCorrelation {
                a: schemes[i].name.clone(),
                b: schemes[j].name.clone(),
                tau: kendall_tau(&rankings[i], &rankings[j], variant)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judgments::parse_qrels;
    use crate::run::parse_run;
    use crate::scale::RelevanceScale;

    #[test]
    fn identical_judgments_give_tau_one() {
        let scale = RelevanceScale::numeric(2).unwrap();
        let qrels = parse_qrels(
            "1 0 a 2\n1 0 b 1\n1 0 c 0\n2 0 a 1\n2 0 b 2\n".as_bytes(),
            &scale,
            "U1",
        )
        .unwrap();
        let runs: Vec<RunRanking> = [
            "1 Q0 a 1 3 s1\n1 Q0 b 2 2 s1\n2 Q0 b 1 1 s1\n",
            "1 Q0 c 1 3 s2\n1 Q0 a 2 2 s2\n2 Q0 a 1 1 s2\n",
            "1 Q0 b 1 3 s3\n1 Q0 c 2 2 s3\n2 Q0 c 1 1 s3\n",
        ]
        .iter()
        .map(|t| parse_run(t.as_bytes()).unwrap())
        .collect();
        let schemes = vec![
            NamedScheme::new("binary", GainScheme::binary(2, &scale).unwrap()),
            NamedScheme::new("linear", GainScheme::linear(&scale)),
        ];
        let rows = robustness_study(
            &runs,
            &qrels,
            &qrels,
            &schemes,
            Discount::default(),
            10,
            EvalOptions::default(),
            TauVariant::B,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.tau == 1.0));
        let corr = scheme_correlations(
            &runs,
            &qrels,
            &schemes,
            Discount::default(),
            10,
            EvalOptions::default(),
            TauVariant::B,
        )
        .unwrap();
        assert_eq!(corr.len(), 1);
        assert_eq!(corr[0].a, "binary");
    }
}
