//! Synthetic collections with known ground truth.
//!
//! Used by the test suites and available to callers who want to check an
//! estimation setup before spending annotation budget. Every generator takes
//! the random source explicitly so fixtures are reproducible from a seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::disagreement::Direction;
use crate::error::{PrmError, Result};
use crate::judgments::{Judgment, JudgmentPair, JudgmentSet};
use crate::run::RunRanking;
use crate::scale::{Level, RelevanceScale};

fn draw_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Joint distribution of the two labels of a double-judged result.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionModel {
    /// `joint[a][b]` is the probability that U1 says `a` and U2 says `b`.
    joint: Vec<Vec<f64>>,
}

impl ConfusionModel {
    pub fn new(joint: Vec<Vec<f64>>) -> Result<Self> {
        let n = joint.len();
        if n < 2 || joint.iter().any(|row| row.len() != n) {
            return Err(PrmError::validation(
                "confusion model must be a square matrix of size ≥ 2",
            ));
        }
        if joint.iter().flatten().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(PrmError::validation(
                "confusion model entries must be finite and ≥ 0",
            ));
        }
        let total: f64 = joint.iter().flatten().sum();
        if total <= 0.0 {
            return Err(PrmError::validation("confusion model has no mass"));
        }
        Ok(Self {
            joint: joint
                .into_iter()
                .map(|row| row.into_iter().map(|p| p / total).collect())
                .collect(),
        })
    }

    /// Both assessors see a latent class drawn from `prior` and label it
    /// independently through the same row-stochastic `labeling[class][level]`.
    pub fn latent(prior: &[f64], labeling: &[Vec<f64>]) -> Result<Self> {
        let n = labeling.first().map_or(0, Vec::len);
        if prior.len() != labeling.len() {
            return Err(PrmError::validation(
                "prior and labeling disagree on the number of classes",
            ));
        }
        let mut joint = vec![vec![0.0; n]; n];
        for (c, row) in labeling.iter().enumerate() {
            let z: f64 = row.iter().sum();
            for a in 0..n {
                for b in 0..n {
                    joint[a][b] += prior[c] * row[a] / z * row[b] / z;
                }
            }
        }
        Self::new(joint)
    }

    pub fn n_levels(&self) -> usize {
        self.joint.len()
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    /// `P(other ≥ θ | conditioning label = i)`.
    pub fn one_sided(&self, level: Level, threshold: Level, direction: Direction) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for other in 0..self.n_levels() {
            let p = match direction {
                Direction::ConditionOnU1 => self.joint[level][other],
                Direction::ConditionOnU2 => self.joint[other][level],
            };
            den += p;
            if other >= threshold {
                num += p;
            }
        }
        (den > 0.0).then(|| num / den)
    }

    /// Limit of the pooled two-direction estimate at level `i`.
    pub fn symmetric(&self, level: Level, threshold: Level) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for other in 0..self.n_levels() {
            let (a, b) = (self.joint[level][other], self.joint[other][level]);
            den += a + b;
            if other >= threshold {
                num += a + b;
            }
        }
        (den > 0.0).then(|| num / den)
    }

    /// Probability that U1 labels a result `i`.
    pub fn marginal_u1(&self, level: Level) -> f64 {
        self.joint[level].iter().sum()
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Level, Level) {
        let n = self.n_levels();
        let flat: Vec<f64> = self.joint.iter().flatten().copied().collect();
        let cell = draw_index(rng, &flat);
        (cell / n, cell % n)
    }

    /// `n` pairs for one topic, documents named `d0, d1, ...`.
    pub fn sample_pairs<R: Rng + ?Sized>(
        &self,
        topic: &str,
        n: usize,
        rng: &mut R,
    ) -> Vec<JudgmentPair> {
        let n_levels = self.n_levels();
        let flat: Vec<f64> = self.joint.iter().flatten().copied().collect();
        (0..n)
            .map(|i| {
                let cell = draw_index(rng, &flat);
                JudgmentPair::new(topic, format!("d{i}"), cell / n_levels, cell % n_levels)
            })
            .collect()
    }
}

/// Single judgments plus one run over them, levels uniform on the scale and
/// the run a random permutation of the judged documents.
pub fn random_collection<R: Rng + ?Sized>(
    scale: &RelevanceScale,
    n_topics: usize,
    docs_per_topic: usize,
    rng: &mut R,
) -> Result<(JudgmentSet, RunRanking)> {
    let mut judgments = Vec::with_capacity(n_topics * docs_per_topic);
    let mut lists = Vec::with_capacity(n_topics);
    for t in 0..n_topics {
        let topic = format!("t{t}");
        let mut docs: Vec<String> = (0..docs_per_topic).map(|d| format!("d{d}")).collect();
        for d in &docs {
            judgments.push(Judgment::new(
                &topic,
                d,
                "U1",
                rng.random_range(0..scale.n_levels()),
            ));
        }
        docs.shuffle(rng);
        lists.push((topic, docs));
    }
    Ok((
        JudgmentSet::from_judgments(scale.clone(), judgments)?,
        RunRanking::from_ranked_lists("random", lists),
    ))
}

/// Two assessor groups judging the same pool, plus runs of varying quality.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub scale: RelevanceScale,
    pub u1: JudgmentSet,
    pub u2: JudgmentSet,
    pub runs: Vec<RunRanking>,
}

impl Benchmark {
    pub fn pairs(&self) -> Result<Vec<JudgmentPair>> {
        Ok(crate::judgments::pair_judgments(&self.u1, &self.u2)?.pairs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub n_systems: usize,
    /// Upper label boundaries on the latent utility scale; level `T` is
    /// assigned above the last one.
    pub cuts: Vec<f64>,
    /// Standard deviation of each assessor's perception noise.
    pub assessor_noise: f64,
    /// Retrieval noise of the best and the worst system; the others are
    /// spread linearly in between.
    pub system_noise: (f64, f64),
}

impl Default for BenchmarkConfig {
    /// Three levels, with a thin and noisy top level (roughly a third of the
    /// results one group puts at the top are put there by the other group).
    fn default() -> Self {
        Self {
            n_topics: 30,
            docs_per_topic: 40,
            n_systems: 12,
            cuts: vec![0.0, 2.2],
            assessor_noise: 0.8,
            system_noise: (0.6, 1.6),
        }
    }
}

/// Documents carry a standard-normal latent utility. Each group labels
/// `utility + noise` against the cuts; each system ranks by
/// `utility + its own noise`.
pub fn benchmark<R: Rng + ?Sized>(config: &BenchmarkConfig, rng: &mut R) -> Result<Benchmark> {
    if config.cuts.is_empty() || config.cuts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PrmError::validation(
            "cuts must be non-empty and increasing",
        ));
    }
    let scale = RelevanceScale::numeric(config.cuts.len())?;
    let label = |x: f64| config.cuts.iter().take_while(|&&c| x > c).count();
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let assessor = Normal::new(0.0, config.assessor_noise)
        .map_err(|e| PrmError::validation(format!("assessor noise: {e}")))?;

    let mut u1 = Vec::new();
    let mut u2 = Vec::new();
    let mut utilities: Vec<(String, Vec<(String, f64)>)> = Vec::new();
    for t in 0..config.n_topics {
        let topic = format!("t{t}");
        let mut docs = Vec::with_capacity(config.docs_per_topic);
        for d in 0..config.docs_per_topic {
            let doc = format!("d{d}");
            let u: f64 = std_normal.sample(rng);
            u1.push(Judgment::new(
                &topic,
                &doc,
                "U1",
                label(u + assessor.sample(rng)),
            ));
            u2.push(Judgment::new(
                &topic,
                &doc,
                "U2",
                label(u + assessor.sample(rng)),
            ));
            docs.push((doc, u));
        }
        utilities.push((topic, docs));
    }

    let (best, worst) = config.system_noise;
    let runs = (0..config.n_systems)
        .map(|s| {
            let frac = if config.n_systems > 1 {
                s as f64 / (config.n_systems - 1) as f64
            } else {
                0.0
            };
            let noise = Normal::new(0.0, best + frac * (worst - best))
                .map_err(|e| PrmError::validation(format!("system noise: {e}")))?;
            let lists: Vec<(String, Vec<String>)> = utilities
                .iter()
                .map(|(topic, docs)| {
                    let mut scored: Vec<(f64, &str)> = docs
                        .iter()
                        .map(|(d, u)| (u + noise.sample(rng), d.as_str()))
                        .collect();
                    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
                    (
                        topic.clone(),
                        scored.into_iter().map(|(_, d)| d.to_string()).collect(),
                    )
                })
                .collect();
            Ok(RunRanking::from_ranked_lists(format!("sys{s:02}"), lists))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Benchmark {
        u1: JudgmentSet::from_judgments(scale.clone(), u1)?,
        u2: JudgmentSet::from_judgments(scale.clone(), u2)?,
        scale,
        runs,
    })
}

/// Double-judged results of a federated collection, where each topic's
/// results come from several resources.
#[derive(Clone, Debug)]
pub struct FederatedFixture {
    pub scale: RelevanceScale,
    /// Reference group judgments, annotated with resource ids.
    pub reference: JudgmentSet,
    pub pairs: Vec<JudgmentPair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FederatedConfig {
    pub n_topics: usize,
    pub resources_per_topic: usize,
    pub results_per_resource: usize,
    /// Share of strong top results in the best resource; decays linearly to
    /// zero for the worst.
    pub strong_share: f64,
    /// Share of weak top results, equal in every resource.
    pub weak_share: f64,
    /// Probability that the second group also puts a strong / weak top
    /// result at the top level.
    pub strong_agreement: f64,
    pub weak_agreement: f64,
}

impl Default for FederatedConfig {
    fn default() -> Self {
        Self {
            n_topics: 40,
            resources_per_topic: 10,
            results_per_resource: 10,
            strong_share: 0.5,
            weak_share: 0.2,
            strong_agreement: 0.9,
            weak_agreement: 0.1,
        }
    }
}

/// Four-level scale (`Non < Rel < HRel < Key`). Results at the top level
/// come in two latent sub-grades: strong ones that the second group mostly
/// confirms and weak ones it mostly demotes. Better resources return more
/// strong top results, so the top-level estimate drops as worse resources
/// are added to the sample.
pub fn federated<R: Rng + ?Sized>(
    config: &FederatedConfig,
    rng: &mut R,
) -> Result<FederatedFixture> {
    let scale = RelevanceScale::new(["Non", "Rel", "HRel", "Key"])?;
    let top = scale.top();
    let mut reference = Vec::new();
    let mut pairs = Vec::new();
    for t in 0..config.n_topics {
        let topic = format!("t{t}");
        // shuffle ids so resource names do not encode their quality
        let mut names: Vec<usize> = (0..config.resources_per_topic).collect();
        names.shuffle(rng);
        for (rank, name) in names.into_iter().enumerate() {
            let quality = if config.resources_per_topic > 1 {
                1.0 - rank as f64 / (config.resources_per_topic - 1) as f64
            } else {
                1.0
            };
            let strong = config.strong_share * quality;
            let resource = format!("e{name:02}");
            for r in 0..config.results_per_resource {
                let doc = format!("{resource}-{r}");
                let u = rng.random::<f64>();
                let (l1, l2) = if u < strong {
                    (
                        top,
                        if rng.random::<f64>() < config.strong_agreement {
                            top
                        } else {
                            top - 1
                        },
                    )
                } else if u < strong + config.weak_share {
                    (
                        top,
                        if rng.random::<f64>() < config.weak_agreement {
                            top
                        } else {
                            top - 1
                        },
                    )
                } else {
                    let below = rng.random_range(0..top);
                    let other = match rng.random_range(0..4) {
                        0 => below.saturating_sub(1),
                        1 => (below + 1).min(top - 1),
                        _ => below,
                    };
                    (below, other)
                };
                reference.push(Judgment::new(&topic, &doc, "U1", l1).with_resource(&resource));
                pairs.push(JudgmentPair::new(&topic, &doc, l1, l2));
            }
        }
    }
    Ok(FederatedFixture {
        reference: JudgmentSet::from_judgments(scale.clone(), reference)?,
        scale,
        pairs,
    })
}

/// Topics with heterogeneous agreement: each topic draws its own top-level
/// agreement rate uniformly from `agreement` and its pair volume uniformly
/// from `volume`. Per-topic variability makes the topic bootstrap spread
/// exceed the per-cell binomial sigma.
pub fn heterogeneous_topics<R: Rng + ?Sized>(
    n_topics: usize,
    volume: std::ops::RangeInclusive<usize>,
    agreement: std::ops::RangeInclusive<f64>,
    rng: &mut R,
) -> Result<BTreeMap<String, Vec<JudgmentPair>>> {
    let mut out = BTreeMap::new();
    for t in 0..n_topics {
        let a = rng.random_range(agreement.clone());
        let model = ConfusionModel::latent(
            &[0.5, 0.3, 0.2],
            &[
                vec![0.85, 0.15, 0.0],
                vec![0.15, 0.7, 0.15],
                vec![0.0, 1.0 - a, a],
            ],
        )?;
        let topic = format!("t{t:02}");
        let n = rng.random_range(volume.clone());
        out.insert(topic.clone(), model.sample_pairs(&topic, n, rng));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn confusion_truths_on_diagonal_model() {
        let m = ConfusionModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(m.one_sided(1, 1, Direction::ConditionOnU1), Some(1.0));
        assert_eq!(m.symmetric(0, 1), Some(0.0));
    }

    #[test]
    fn latent_model_is_symmetric() {
        let m = ConfusionModel::latent(&[0.5, 0.5], &[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let j = m.joint();
        assert!((j[0][1] - j[1][0]).abs() < 1e-15);
        assert!((j.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn benchmark_shapes() {
        let cfg = BenchmarkConfig {
            n_topics: 3,
            docs_per_topic: 5,
            n_systems: 4,
            ..BenchmarkConfig::default()
        };
        let b = benchmark(&cfg, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(b.u1.len(), 15);
        assert_eq!(b.runs.len(), 4);
        assert_eq!(b.pairs().unwrap().len(), 15);
    }

    #[test]
    fn federated_shapes() {
        let cfg = FederatedConfig {
            n_topics: 2,
            resources_per_topic: 3,
            results_per_resource: 4,
            ..FederatedConfig::default()
        };
        let f = federated(&cfg, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(f.pairs.len(), 24);
        assert!(f.reference.iter().all(|j| j.resource_id.is_some()));
    }
}
