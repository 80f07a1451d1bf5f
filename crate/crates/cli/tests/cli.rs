use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use tempfile::TempDir;

use prm_core::{DisagreementTable, RelevanceScale, UserModel};

fn prm<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prm"))
        .args(args)
        .output()
        .unwrap()
}

fn ok<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> String {
    let out = prm(args);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn example20(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata/example20")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// `(metric, topic) -> value` rows of a metric CSV.
fn csv_values(csv: &str) -> Vec<(String, String, String, String)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].into(), f[1].into(), f[2].into(), f[3].into())
        })
        .collect()
}

#[test]
fn estimate_example20_symmetric_text() {
    let out = ok(&[
        "estimate",
        "--scale",
        &example20("scale.toml"),
        "--pairs",
        &example20("pairs.txt"),
    ]);
    let rows: Vec<Vec<&str>> = out
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows[0][..5], ["2", "2", "4", "10", "0.4000"]);
    assert_eq!(rows[1][..5], ["1", "1", "5", "17", "0.2941"]);
    assert_eq!(rows[2][..5], ["0", "0", "1", "13", "0.0769"]);
}

#[test]
fn estimate_example20_one_sided_json() {
    let out = ok(&[
        "estimate",
        "--top",
        "2",
        "--qrels",
        &example20("u1.qrels"),
        "--qrels2",
        &example20("u2.qrels"),
        "--estimator",
        "one-sided",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let cells = v[0]["cells"].as_array().unwrap();
    let p: Vec<f64> = cells.iter().map(|c| c["p"].as_f64().unwrap()).collect();
    assert_eq!(p, [1.0 / 6.0, 0.3, 0.5]);
}

#[test]
fn missing_double_judgments_is_an_error() {
    let out = prm(&["estimate", "--top", "2", "--qrels", &example20("u1.qrels")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no double judgments"));
}

#[test]
fn missing_file_exits_with_io_code() {
    let out = prm(&["estimate", "--top", "2", "--pairs", "/definitely/not/here"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn restricted_design_refuses_symmetric() {
    let out = prm(&[
        "estimate",
        "--top",
        "2",
        "--pairs",
        &example20("pairs.txt"),
        "--restricted-second-round",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("one-sided"));
}

#[test]
fn override_p0_marks_the_cell() {
    let out = ok(&[
        "estimate",
        "--top",
        "2",
        "--pairs",
        &example20("pairs.txt"),
        "--override-p0",
        "--format",
        "csv",
    ]);
    let f: Vec<&str> = out
        .lines()
        .find(|l| l.contains(",,0,0,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!((f[5], f[6], f[7], f[9]), ("1", "13", "0", "true"));
}

#[test]
fn binary_and_degenerate_table_outputs_are_identical() {
    let dir = TempDir::new().unwrap();
    let scale = RelevanceScale::numeric(2).unwrap();
    let table = DisagreementTable::degenerate(scale.clone(), UserModel::top(&scale)).unwrap();
    let table_path = write(
        &dir,
        "table.json",
        &serde_json::to_string(&table.to_record()).unwrap(),
    );
    let run: String = (1..=20)
        .map(|i| format!("q1 Q0 d{i} {i} {} sys\n", 100 - i))
        .collect();
    let run = write(&dir, "a.run", &run);
    for metric in ["count", "precision", "ndcg"] {
        let common = [
            "eval",
            "--top",
            "2",
            "--qrels",
            &example20("u1.qrels"),
            "--run",
            &run,
            "--metric",
            metric,
            "--k",
            "7",
        ];
        let binary = ok(&[&common[..], &["--gains", "binary"]].concat());
        let degenerate = ok(&[&common[..], &["--gains", "prm", "--table", &table_path]].concat());
        assert_eq!(binary, degenerate, "{metric}");
    }
}

#[test]
fn perfect_ordering_has_unit_ndcg() {
    let dir = TempDir::new().unwrap();
    let qrels = write(
        &dir,
        "q",
        "t1 0 a 2\nt1 0 b 1\nt1 0 c 0\nt1 0 d 2\nt2 0 x 1\nt2 0 y 0\n",
    );
    let run = write(&dir, "r", "t1 Q0 a 1 4 s\nt1 Q0 d 2 3 s\nt1 Q0 b 3 2 s\nt1 Q0 c 4 1 s\nt2 Q0 x 1 2 s\nt2 Q0 y 2 1 s\n");
    for gains in ["linear", "exponential", "binary"] {
        let out = ok(&[
            "eval", "--top", "2", "--qrels", &qrels, "--run", &run, "--gains", gains, "--format",
            "csv",
        ]);
        let rows = csv_values(&out);
        let mean = rows.iter().find(|r| r.2 == "mean").unwrap();
        if gains == "binary" {
            // t2 has nothing at the top level and drops out
            assert_eq!(rows.iter().filter(|r| r.2.starts_with('t')).count(), 1);
        }
        assert_eq!(mean.3, "1", "{gains}");
    }
}

#[test]
fn reversed_ordering_matches_hand_computed_ndcg() {
    let dir = TempDir::new().unwrap();
    let qrels = write(&dir, "q", "t 0 a 2\nt 0 b 1\nt 0 c 0\n");
    let run = write(&dir, "r", "t Q0 c 1 3 s\nt Q0 b 2 2 s\nt Q0 a 3 1 s\n");
    let out = ok(&[
        "eval", "--top", "2", "--qrels", &qrels, "--run", &run, "--gains", "linear", "--format",
        "csv",
    ]);
    let value: f64 = csv_values(&out)[0].3.parse().unwrap();
    let dcg = 1.0 / 3f64.log2() + 2.0 / 4f64.log2();
    let ideal = 2.0 + 1.0 / 3f64.log2();
    assert_abs_diff_eq!(value, dcg / ideal, epsilon = 1e-12);
}

/// Hand-built resource-selection style fixture: one run whose top 10
/// holds 2 Key, 3 HRel, 1 Rel and 4 Non results.
#[test]
fn federated_counts() {
    let dir = TempDir::new().unwrap();
    let scale = write(
        &dir,
        "scale.toml",
        "top = 3\n\n[[level]]\nindex = 0\nlabel = \"Non\"\n\n[[level]]\nindex = 1\nlabel = \"Rel\"\n\n\
         [[level]]\nindex = 2\nlabel = \"HRel\"\n\n[[level]]\nindex = 3\nlabel = \"Key\"\n",
    );
    // One-sided counts out of 100 per level: 1, 4, 27, 53 reach Key.
    let mut pairs = String::new();
    for (level, hits) in [1, 4, 27, 53].into_iter().enumerate() {
        for d in 0..100 {
            let other = if d < hits { 3 } else { 0 };
            pairs.push_str(&format!("p e{level}-{d} {level} {other}\n"));
        }
    }
    let pairs = write(&dir, "pairs", &pairs);
    let labels = [3, 2, 0, 3, 2, 0, 1, 2, 0, 0, 3];
    let qrels: String = labels
        .iter()
        .enumerate()
        .map(|(i, l)| format!("s 0 r{i} {l} resource=e{i}\n"))
        .collect();
    let qrels = write(&dir, "qrels", &qrels);
    let run: String = (0..labels.len())
        .map(|i| format!("s Q0 r{i} {} {} engine\n", i + 1, 50 - i))
        .collect();
    let run = write(&dir, "run", &run);
    let common = [
        "eval",
        "--scale",
        &scale,
        "--qrels",
        &qrels,
        "--pairs",
        &pairs,
        "--run",
        &run,
        "--metric",
        "count",
        "--estimator",
        "one-sided",
        "--format",
        "csv",
    ];
    let out = ok(&[&common[..], &["--gains", "binary", "--gains", "prm"]].concat());
    let rows = csv_values(&out);
    let get = |run: &str| -> f64 {
        rows.iter()
            .find(|r| r.0 == run && r.2 == "s")
            .unwrap()
            .3
            .parse()
            .unwrap()
    };
    assert_eq!(get("engine[binary]"), 2.0);
    assert_abs_diff_eq!(
        get("engine[prm]"),
        2.0 * 0.53 + 3.0 * 0.27 + 0.04 + 4.0 * 0.01,
        epsilon = 1e-12
    );
    let binary_hrel = ok(&[&common[..], &["--gains", "binary", "--theta", "2"]].concat());
    assert_eq!(csv_values(&binary_hrel)[0].3, "5");
}

#[test]
fn count_with_linear_gains_is_rejected() {
    let dir = TempDir::new().unwrap();
    let run = write(&dir, "r", "q1 Q0 d1 1 1 s\n");
    let out = prm(&[
        "eval",
        "--top",
        "2",
        "--qrels",
        &example20("u1.qrels"),
        "--run",
        &run,
        "--metric",
        "count",
        "--gains",
        "linear",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bootstrap_is_deterministic_and_needs_a_seed() {
    let dir = TempDir::new().unwrap();
    let mut pairs = String::new();
    for t in 0..6 {
        for d in 0..15 {
            pairs.push_str(&format!("t{t} d{d} {} {}\n", (d + t) % 3, (d * t + 1) % 3));
        }
    }
    let pairs = write(&dir, "pairs", &pairs);
    let args = [
        "analyze",
        "bootstrap",
        "--top",
        "2",
        "--pairs",
        &pairs,
        "--seed",
        "5",
        "--resamples",
        "50",
    ];
    assert_eq!(ok(&args), ok(&args));
    let unseeded = prm(&args[..6]);
    assert_eq!(unseeded.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unseeded.stderr).contains("--seed"));
}

#[test]
fn tau_of_identical_rankings_is_one() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a", "s1 0.3\ns2 0.2\ns3 0.25\n");
    let out = ok(&[
        "analyze",
        "tau",
        "--ranking",
        &a,
        "--ranking",
        &a,
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tau"].as_f64(), Some(1.0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    fs::copy(example20("pairs.txt"), dir.path().join("pairs.txt")).unwrap();
    let config = write(
        &dir,
        "prm.toml",
        "[input]\ntop = 2\npairs = \"pairs.txt\"\n\n[estimation]\nestimator = \"one-sided\"\n\n[output]\nformat = \"csv\"\n",
    );
    let from_config = ok(&["estimate", "--config", &config]);
    assert!(from_config.starts_with("estimator,"));
    assert!(from_config.contains("one-sided-u1,2,,2,2,2,4,0.5,"));
    let flagged = ok(&["estimate", "--config", &config, "--estimator", "symmetric"]);
    assert!(flagged.contains("symmetric,2,,2,2,4,10,0.4,"));
}

#[test]
fn strata_give_one_table_each() {
    let dir = TempDir::new().unwrap();
    let pairs = write(&dir, "pairs", "a d1 2 2\na d2 1 2\nb d1 0 0\nb d2 2 1\n");
    let strata = write(&dir, "strata", "a nav\nb inf\n");
    let out = ok(&[
        "estimate", "--top", "2", "--pairs", &pairs, "--strata", &strata, "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["stratum"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["inf", "nav"]);
}

#[test]
fn validate_reports_inputs() {
    let out = ok(&[
        "validate",
        "--scale",
        &example20("scale.toml"),
        "--qrels",
        &example20("u1.qrels"),
        "--pairs",
        &example20("pairs.txt"),
    ]);
    assert!(out.contains("qrels: 20 judgments, 1 topics, levels {0:6, 1:10, 2:4}"));
    assert!(out.contains("double judgments: 20 pairs"));
    assert!(out.ends_with("ok\n"));
}

#[test]
fn long_help_documents_the_estimators() {
    let out = ok(&["estimate", "--help"]);
    assert!(out.contains("sigma = sqrt(p (1 - p) / N_D)"));
}
