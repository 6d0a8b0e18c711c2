use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latent_mos::{fit, FitConfig, RatingSet};
use serde_json::Value;
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latent-mos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a headed CSV file as maps from column name to cell.
fn table(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header.iter().map(str::to_owned).zip(rec.iter().map(str::to_owned)).collect()
        })
        .collect()
}

fn aggregate(dir: &TempDir, dataset: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.path().join(format!("agg{}.csv", extra.join("").replace(['-', ' '], "")));
    let mut args = vec!["aggregate", s(dataset), "--output", s(&out)];
    args.extend_from_slice(extra);
    (bin(&args), out)
}

#[test]
fn aggregate_methods() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "sample_id,r1,r2,r3,r4,r5,r6,r7,r8\nu1,3,3,4,4,4,4,5,5\nu2,4,4,4,4,4,4,4,4\n");

    let (o, out) = aggregate(&dir, &data, &["--method", "mos"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = table(&out);
    assert_eq!(rows[0]["representative"], "4");
    assert_eq!(rows[0]["n_ratings"], "8");
    assert_eq!(rows[0]["sigma_hat"], "");

    let (o, out) = aggregate(&dir, &data, &["--method", "nlow", "--n-low", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: f64 = table(&out)[0]["representative"].parse().unwrap();
    assert!((v - 3.6667).abs() < 1e-4);

    let (o, out) = aggregate(&dir, &data, &["--method", "latent"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = table(&out);
    assert_eq!(rows[1]["representative"], "4");
    assert_eq!(rows[1]["fell_back"], "true");
    assert_eq!(rows[0]["fell_back"], "false");
    assert_eq!(rows.iter().map(|r| r["sample_id"].as_str()).collect::<Vec<_>>(), ["u1", "u2"]);

    let header = fs::read_to_string(&out).unwrap();
    assert!(header.starts_with(
        "sample_id,n_ratings,mos,representative,method,sigma_hat,loss,initial_loss,fell_back,iterations\n"
    ));
}

#[test]
fn aggregate_writes_manifest() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "u1,3,4,5\n");
    let (o, out) = aggregate(&dir, &data, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(format!("{}.manifest.json", out.display())).unwrap();
    let m: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["command"], "aggregate");
    assert_eq!(m["config"]["beta"], 0.03);
    assert_eq!(m["config"]["max_iters"], 100);
    assert_eq!(m["config"]["method"], "latent");
    let digest = m["input_digests"][s(&data)].as_str().unwrap();
    assert!(digest.starts_with("sha256:") && digest.len() == 7 + 64);
    let pos = |k: &str| text.find(k).unwrap();
    assert!(pos("\"command\"") < pos("\"config\""));
    assert!(pos("\"config\"") < pos("\"input_digests\""));
    assert!(pos("\"input_digests\"") < pos("\"tool_version\""));
}

#[test]
fn aggregate_jsonl_input() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.jsonl", "{\"sample_id\": \"a\", \"ratings\": [1, 2, 2]}\n{\"sample_id\": \"b\", \"ratings\": [5]}\n");
    let (o, out) = aggregate(&dir, &data, &["--method", "mos"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = table(&out);
    assert_eq!(rows[0]["mos"], "1.66666666667");
    assert_eq!(rows[1]["mos"], "5");
}

#[test]
fn parse_errors_name_every_bad_line() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "u1,3,4\nu2,3,x\nu3,4\nu4,6,1\n");
    let (o, out) = aggregate(&dir, &data, &[]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("line 4"), "{err}");
    assert!(!err.contains("line 3"), "{err}");
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "u1,3,4\n");
    assert_eq!(code(&aggregate(&dir, &data, &["--method", "nlow"]).0), 1);
    assert_eq!(code(&aggregate(&dir, &data, &["--beta", "-1"]).0), 1);
    assert_eq!(code(&aggregate(&dir, &data, &["--bogus"]).0), 1);
    assert_eq!(code(&bin(&[])), 1);
    assert_eq!(code(&bin(&["--help"])), 0);
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let (o, _) = aggregate(&dir, &dir.path().join("nope.csv"), &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn nlow_longer_than_a_sample_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "u1,3,4,5,5\nu2,1,2\nu3,2,2\n");
    let (o, _) = aggregate(&dir, &data, &["--method", "nlow", "--n-low", "3"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("u2") && err.contains("u3"), "{err}");
}

#[test]
fn output_does_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim.csv");
    let o = bin(&["simulate", "--n-samples", "300", "--seed", "3", "--output", s(&sim)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, one) = aggregate(&dir, &sim, &["--jobs", "1"]);
    let (_, four) = aggregate(&dir, &sim, &["--jobs", "4"]);
    assert_eq!(fs::read(one).unwrap(), fs::read(four).unwrap());
}

#[test]
fn representatives_survive_a_round_trip_through_csv() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim.csv");
    let o = bin(&["simulate", "--n-samples", "50", "--seed", "9", "--output", s(&sim)]);
    assert_eq!(code(&o), 0);
    let (o, out) = aggregate(&dir, &sim, &[]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&sim).unwrap();
    for (line, row) in text.lines().zip(table(&out)) {
        let mut fields = line.split(',');
        let id = fields.next().unwrap();
        let ratings = fields.map(|f| f.parse().unwrap()).collect();
        let direct = fit(&RatingSet::five_point(id, ratings).unwrap(), &FitConfig::default()).unwrap();
        let printed: f64 = row["representative"].parse().unwrap();
        let want: f64 = format!("{:.11e}", direct.representative).parse().unwrap();
        assert_eq!(printed, want, "{id}");
        assert!((printed - direct.representative).abs() <= 1e-11 * direct.representative.abs().max(1.0));
    }
}

#[test]
fn evaluate_identical_scores() {
    let dir = TempDir::new().unwrap();
    let scores = write(&dir, "p.csv", "sample_id,score\na,1.5\nb,3.0\nc,2.0\nd,4.5\n");
    let out = dir.path().join("report.json");
    let o = bin(&["evaluate", "--pred", s(&scores), "--truth", s(&scores), "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["lcc"], 1.0);
    assert_eq!(printed["srcc"], 1.0);
    let written: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(printed, written);
    assert!(Path::new(&format!("{}.manifest.json", out.display())).exists());
}

#[test]
fn evaluate_against_aggregation_output() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "a,1,2,2\nb,3,4,4\nc,5,5,4\n");
    let (_, agg) = aggregate(&dir, &data, &["--method", "mos"]);
    let pred = write(&dir, "p.csv", "a,1\nb,2\nc,3\n");
    let o = bin(&["evaluate", "--pred", s(&pred), "--truth", s(&agg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["srcc"], 1.0);
}

#[test]
fn undefined_correlation_is_null_with_reason() {
    let dir = TempDir::new().unwrap();
    let pred = write(&dir, "p.csv", "a,1\nb,2\n");
    let truth = write(&dir, "t.csv", "a,3\nb,3\n");
    let o = bin(&["evaluate", "--pred", s(&pred), "--truth", s(&truth)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["lcc"].is_null() && r["srcc"].is_null());
    assert!(r["reasons"]["lcc"].is_string());
}

#[test]
fn id_mismatch_is_enumerated() {
    let dir = TempDir::new().unwrap();
    let pred = write(&dir, "p.csv", "a,1\nb,2\nzz,3\n");
    let truth = write(&dir, "t.csv", "a,1\nb,2\nc,3\n");
    let o = bin(&["evaluate", "--pred", s(&pred), "--truth", s(&truth)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("zz") && err.contains('c'), "{err}");
}

#[test]
fn ppref_from_screened_pairs() {
    let dir = TempDir::new().unwrap();
    let mut pred = String::from("sample_id,score\n");
    let mut pairs = String::from("id_a,id_b,label\n");
    for i in 0..106 {
        pred.push_str(&format!("a{i},{}\nb{i},1\n", 2 + i % 3));
        // A scores higher, so the first 78 labels agree with the prediction.
        let label = if i < 78 { "A" } else { "B" };
        pairs.push_str(&format!("a{i},b{i},{label}\n"));
    }
    let pred = write(&dir, "p.csv", &pred);
    let pairs = write(&dir, "pairs.csv", &pairs);
    let o = bin(&["evaluate", "--mode", "ppref", "--pred", s(&pred), "--pairs", s(&pairs)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["n_all"], 106);
    assert_eq!(r["n_correct"], 78);
    assert!((r["ppref"].as_f64().unwrap() - 0.7358).abs() < 5e-5);
    assert!(r.get("n_pairs_screened").is_none());
}

#[test]
fn ppref_with_everything_screened_out() {
    let dir = TempDir::new().unwrap();
    let pred = write(&dir, "p.csv", "a,1\nb,2\nc,3\n");
    let ann = write(
        &dir,
        "ann.csv",
        "pair_id,id_a,id_b,v1,v2,v3,v4\nq1,a,b,A_sure,A_unsure,B_sure,B_unsure\nq2,b,c,A_unsure,A_unsure,B_unsure,B_sure\n",
    );
    let o = bin(&["evaluate", "--mode", "ppref", "--pred", s(&pred), "--annotations", s(&ann)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["n_pairs_screened"], 0);
    assert_eq!(r["n_pairs_dropped"], 2);
    assert!(r["ppref"].is_null());
    assert!(r["reasons"]["ppref"].is_string());
}

#[test]
fn ppref_from_annotations() {
    let dir = TempDir::new().unwrap();
    let pred = write(&dir, "p.csv", "a,1\nb,2\nc,3\n");
    let ann = write(
        &dir,
        "ann.csv",
        "q1,a,b,B_sure,B_unsure,B_unsure,A_unsure\nq2,c,b,A_sure,A_sure,A_unsure,B_unsure\nq3,a,c,A_sure,A_sure,A_sure,B_unsure\nq4,a,b,A_sure,B_unsure,B_unsure,A_unsure\n",
    );
    let o = bin(&["evaluate", "--mode", "ppref", "--pred", s(&pred), "--annotations", s(&ann)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["n_pairs_screened"], 3);
    assert_eq!(r["n_pairs_dropped"], 1);
    assert_eq!(r["n_correct"], 2);
    assert_eq!(r["n_all"], 3);
}

#[test]
fn ppref_needs_a_pair_source() {
    let dir = TempDir::new().unwrap();
    let pred = write(&dir, "p.csv", "a,1\n");
    assert_eq!(code(&bin(&["evaluate", "--mode", "ppref", "--pred", s(&pred)])), 1);
}

fn simulate(dir: &TempDir, name: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.path().join(name);
    let mut args = vec!["simulate", "--output", s(&out)];
    args.extend_from_slice(extra);
    (bin(&args), out)
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (o1, a) = simulate(&dir, "a.csv", &["--seed", "7", "--n-samples", "20"]);
    let (o2, b) = simulate(&dir, "b.csv", &["--seed", "7", "--n-samples", "20"]);
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(code(&o2), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.truth.csv")).unwrap(),
        fs::read(dir.path().join("b.truth.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("a.csv.manifest.json")).unwrap(),
        fs::read(dir.path().join("b.csv.manifest.json")).unwrap()
    );
    let (_, c) = simulate(&dir, "c.csv", &["--seed", "8", "--n-samples", "20"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn simulate_rejects_invalid_configs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate(&dir, "a.csv", &["--n-samples", "0"]).0), 1);
    assert_eq!(code(&simulate(&dir, "a.csv", &["--sigma-star", "0"]).0), 1);
    let cfg = write(&dir, "cfg.json", "{\"mu_star\": 2.0, \"n_sample\": 4}");
    assert_eq!(code(&simulate(&dir, "a.csv", &["--config", s(&cfg)]).0), 1);
}

#[test]
fn simulate_grid_sweep() {
    let dir = TempDir::new().unwrap();
    let (o, _) = simulate(&dir, "g.csv", &["--grid-mu", "1.5,3,4.5", "--grid-sigma", "0.5,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let truth = table(&dir.path().join("g.truth.csv"));
    assert_eq!(truth.len(), 6);
    assert_eq!((truth[1]["mu_star"].as_str(), truth[1]["sigma_star"].as_str()), ("1.5", "1"));
}

#[test]
fn simulate_config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", "{\"mu_star\": 2.0, \"n_samples\": 4, \"n_ratings\": 3, \"seed\": 1}");
    let (o, out) = simulate(&dir, "s.jsonl", &["--config", s(&cfg), "--n-ratings", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l["ratings"].as_array().unwrap().len() == 5));
    let m: Value = serde_json::from_slice(&fs::read(dir.path().join("s.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["mu_star"], 2.0);
    assert_eq!(m["config"]["n_ratings"], 5);
    assert!(m["input_digests"][s(&cfg)].is_string());
}

#[test]
fn simulate_then_aggregate_recovers_the_means() {
    let dir = TempDir::new().unwrap();
    let (o, sim) = simulate(
        &dir,
        "big.csv",
        &["--grid-mu", "1.5,2.25,3,3.75,4.5", "--grid-sigma", "0.5,1,1.5", "--n-ratings", "5000", "--n-samples", "2", "--seed", "21"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (o, out) = aggregate(&dir, &sim, &["--beta", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let truth = table(&dir.path().join("big.truth.csv"));
    let rows = table(&out);
    assert_eq!(rows.len(), truth.len());
    let mae = rows
        .iter()
        .zip(&truth)
        .map(|(r, t)| {
            assert_eq!(r["sample_id"], t["sample_id"]);
            let est: f64 = r["representative"].parse().unwrap();
            let mu: f64 = t["mu_star"].parse().unwrap();
            (est - mu).abs()
        })
        .sum::<f64>()
        / rows.len() as f64;
    assert!(mae < 0.05, "mean absolute error {mae}");
}
