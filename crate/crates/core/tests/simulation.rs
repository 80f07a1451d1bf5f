//! Checks against generators with known ground truth.

use std::collections::BTreeMap;

use rand::Rng;

use prm_core::analysis::{
    bootstrap_topics, first_separation, quality_sensitivity, simulate_annotation_rounds,
    QualityOptions,
};
use prm_core::disagreement::estimate_one_sided;
use prm_core::metrics::expected_precision_at;
use prm_core::rng::stream_rng;
use prm_core::synth::{federated, heterogeneous_topics, ConfusionModel, FederatedConfig};
use prm_core::*;

fn scale3() -> RelevanceScale {
    RelevanceScale::numeric(2).unwrap()
}

/// Three equally likely U1 labels; U2 reaches the top level with
/// probability `q[a]` given U1 label `a`, otherwise it picks 0 or 1.
fn directed_model(q: [f64; 3]) -> ConfusionModel {
    ConfusionModel::new(
        q.iter()
            .map(|&q| vec![(1.0 - q) / 2.0, (1.0 - q) / 2.0, q])
            .collect(),
    )
    .unwrap()
}

#[test]
fn expected_precision_matches_simulated_users() {
    let s = scale3();
    let table = DisagreementTable::from_counts(
        s.clone(),
        UserModel::top(&s),
        Estimator::Fixed,
        &[(1, 13), (5, 17), (4, 10)],
    )
    .unwrap();
    let mut rng = stream_rng(11, 0);
    let levels: Vec<Option<Level>> = (0..15).map(|_| Some(rng.random_range(0..3))).collect();
    let n = 10;
    let analytic = expected_precision_at(&levels, &table, n).unwrap();

    let users = 100_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..users {
        let hits = levels[..n]
            .iter()
            .filter(|l| rng.random::<f64>() < table.p(l.unwrap()).unwrap())
            .count();
        let prec = hits as f64 / n as f64;
        sum += prec;
        sum_sq += prec * prec;
    }
    let mean = sum / users as f64;
    let se = ((sum_sq / users as f64 - mean * mean) / users as f64).sqrt();
    assert!(
        (mean - analytic).abs() < 3.0 * se,
        "simulated {mean} analytic {analytic} se {se}"
    );
}

#[test]
fn strata_recover_their_own_models() {
    let s = scale3();
    let nav = directed_model([0.05, 0.3, 0.8]);
    let inf = directed_model([0.2, 0.6, 0.95]);
    let mut rng = stream_rng(5, 0);
    let mut pairs = Vec::new();
    let mut strata = BTreeMap::new();
    for t in 0..20 {
        let topic = format!("t{t}");
        let (model, name) = if t % 2 == 0 {
            (&nav, "nav")
        } else {
            (&inf, "inf")
        };
        strata.insert(topic.clone(), name.to_string());
        pairs.extend(model.sample_pairs(&topic, 2000, &mut rng));
    }
    let um = UserModel::top(&s);
    let est = Estimator::OneSided(Direction::ConditionOnU1);
    let tables =
        stratified_estimate(&pairs, &strata, um, &s, est, JudgingDesign::SamePool).unwrap();
    let pooled = estimate_one_sided(&pairs, um, &s, Direction::ConditionOnU1).unwrap();
    for level in 0..3 {
        for (name, model) in [("nav", &nav), ("inf", &inf)] {
            let cell = tables[name].cell(level).unwrap();
            let truth = model.one_sided(level, 2, Direction::ConditionOnU1).unwrap();
            assert!(
                (cell.p().unwrap() - truth).abs() < 3.0 * cell.sigma().unwrap(),
                "{name} level {level}"
            );
        }
        let (a, b) = (
            tables["nav"].p(level).unwrap(),
            tables["inf"].p(level).unwrap(),
        );
        let p = pooled.p(level).unwrap();
        assert!(p >= a.min(b) && p <= a.max(b));
    }
}

fn separation_budget(delta: f64, seed: u64) -> usize {
    let s = scale3();
    let model = directed_model([0.1, 0.5 - delta / 2.0, 0.5 + delta / 2.0]);
    let pairs = model.sample_pairs("t", 60_000, &mut stream_rng(seed, 1_000));
    let grid: Vec<usize> = (0..60)
        .map(|j| (20.0 * 1.12f64.powi(j)).round() as usize)
        .collect();
    let mut grid_unique = grid.clone();
    grid_unique.dedup();
    let curve = simulate_annotation_rounds(
        &pairs,
        UserModel::top(&s),
        &s,
        Estimator::OneSided(Direction::ConditionOnU1),
        JudgingDesign::SamePool,
        50,
        &grid_unique,
        seed,
    )
    .unwrap();
    first_separation(&curve, 1, 2).expect("bands separate within the grid")
}

#[test]
fn separation_budget_scales_inverse_square() {
    let wide = separation_budget(0.2, 3) as f64;
    let narrow = separation_budget(0.1, 3) as f64;
    let ratio = narrow / wide;
    assert!(
        (2.0..=6.0).contains(&ratio),
        "budgets {wide} and {narrow}, ratio {ratio}"
    );
}

#[test]
fn topic_bootstrap_spread_exceeds_binomial_sigma() {
    let s = scale3();
    let by_topic = heterogeneous_topics(26, 20..=120, 0.1..=0.8, &mut stream_rng(4, 0)).unwrap();
    let all: Vec<JudgmentPair> = by_topic.values().flatten().cloned().collect();
    let um = UserModel::top(&s);
    let global = estimate_symmetric(&all, um, &s, JudgingDesign::SamePool).unwrap();
    let boot = bootstrap_topics(
        &by_topic,
        um,
        &s,
        Estimator::Symmetric,
        JudgingDesign::SamePool,
        300,
        7,
    )
    .unwrap();
    let top = boot.level(2).unwrap();
    assert_eq!(top.samples.len() + top.missing, 300);
    assert!(top.std.unwrap() > global.cell(2).unwrap().sigma().unwrap());
}

#[test]
fn quality_sweep_decreases_and_ends_at_global_estimate() {
    let f = federated(&FederatedConfig::default(), &mut stream_rng(2, 0)).unwrap();
    let um = UserModel::top(&f.scale);
    let curve = quality_sensitivity(
        &f.reference,
        &f.pairs,
        um,
        Estimator::Symmetric,
        JudgingDesign::SamePool,
        QualityOptions::for_scale(&f.scale),
    )
    .unwrap();
    let top: Vec<f64> = curve
        .series(3)
        .unwrap()
        .points
        .iter()
        .map(|p| p.mean.unwrap())
        .collect();
    assert_eq!(top.len(), 10);
    let rises = top.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(rises <= 2, "{top:?}");
    assert!(top[0] - top[9] > 0.05, "{top:?}");

    let global = estimate_symmetric(&f.pairs, um, &f.scale, JudgingDesign::SamePool).unwrap();
    for level in 0..=3 {
        assert_eq!(curve.series(level).unwrap().points[9].mean, global.p(level));
    }
}
