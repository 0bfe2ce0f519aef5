use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spikeslab::cli::{FitReport, RunConfig, SelectReport, SynthReport};
use spikeslab::synth::{generate, Regime, SyntheticSpec};

fn spikeslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikeslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn synthetic_csv(dir: &Path, n: usize) -> PathBuf {
    let ds = generate(&SyntheticSpec::new(Regime::LowDim, n, 0.0, 3)).unwrap();
    let mut body = String::from("a,b,c,d,e,f,g,h,target\n");
    for (row, y) in ds.data.x().rows().into_iter().zip(ds.data.y()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        body += &format!("{},{y}\n", cells.join(","));
    }
    write(dir, "data.csv", &body)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fit_writes_report_with_ranking_and_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 150);
    let out = dir.path().join("fit.json");
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "1500", "--seed", "4", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: FitReport = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.data.d, 8);
    assert_eq!(report.data.response, "target");
    assert!(report.calibration.is_some());
    assert_eq!(report.posterior.top_models.len().min(10), report.posterior.top_models.len());
    let top: Vec<&str> = report.ranking.iter().take(3).map(|r| r.covariate.as_str()).collect();
    let mut top_sorted = top.clone();
    top_sorted.sort();
    assert_eq!(top_sorted, ["a", "b", "e"]);
    assert!(report.ranking.windows(2).all(|w| w[0].probability >= w[1].probability));
}

#[test]
fn dirac_spike_omits_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 60);
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--delta", "0", "--iterations", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(value.get("calibration").is_none());
    assert!(!text.contains("sigma0_sq"));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 80);
    let run = || spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "500", "--seed", "17"]).stdout;
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
    let other = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "500", "--seed", "18"]).stdout;
    assert_ne!(first, other);
}

#[test]
fn malformed_cell_reports_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "bad.csv", "x1,x2,y\n1,2,3\n4,oops,6\n7,8,9\n");
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("row 3") && err.contains("column 2"), "{err}");
}

#[test]
fn ragged_row_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "ragged.csv", "x1,x2,y\n1,2,3\n4,5\n");
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
}

#[test]
fn constant_covariate_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "const.csv", "x1,x2,y\n1,5,3\n2,5,1\n3,5,4\n4,5,2\n");
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("validation") && err.contains("x2"), "{err}");
}

#[test]
fn infeasible_calibration_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 40);
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--delta", "0.01", "--eta-1-sq", "1e-6", "--iterations", "100"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("calibration infeasible"));
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let o = spikeslab(&["fit", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_delta_reports_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 200);
    let o = spikeslab(&["select-delta", "--input", csv.to_str().unwrap(), "--delta-grid", "0.8,0.5,0.05", "--iterations", "800", "--seed", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: SelectReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.sweep.records.len(), 3);
    assert_eq!(report.config.threshold, Some(0.05));
    let chosen = &report.sweep.records[report.sweep.selection.index];
    assert_eq!(chosen.model, report.sweep.selection.model);
    assert_eq!(report.selected_covariates.len(), chosen.model.len());
}

#[test]
fn synth_writes_json_and_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("synth.json");
    let o = spikeslab(&[
        "synth", "--n-grid", "60", "--eta-grid", "0", "--delta-grid", "0.5", "--repetitions", "2",
        "--iterations", "300", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: SynthReport = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report.summaries.len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("synth.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("regime,n,eta,delta,repetition,f1"));
}

#[test]
fn bf_encodes_infinities_as_strings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bf.json");
    let csv = dir.path().join("rows.csv");
    let o = spikeslab(&[
        "bf", "--n-grid", "5000", "--repetitions", "1", "--modes", "disjunct", "--iterations", "200",
        "--output", out.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"median_log_bf\": \"inf\""), "{text}");
    assert!(std::fs::read_to_string(&csv).unwrap().contains("inf"));
}

#[test]
fn run_config_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synthetic_csv(dir.path(), 50);
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "200", "--response", "target"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let value: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let config: RunConfig = serde_json::from_value(value["config"].clone()).unwrap();
    let again: RunConfig = serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
    assert_eq!(config, again);
    assert_eq!(config.response.as_deref(), Some("target"));
    assert!(value["config"].get("output").is_none());
}

#[test]
fn normalization_hits_the_documented_targets() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "n.csv", "u,v,y\n1,10,2\n2,30,3\n3,20,7\n4,60,5\n5,40,11\n");
    let o = spikeslab(&["fit", "--input", csv.to_str().unwrap(), "--iterations", "100", "--log-response"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: FitReport = serde_json::from_slice(&o.stdout).unwrap();
    let st = report.data.standardization.expect("normalization on by default");
    assert_eq!(st.variance_convention, "population");
    assert_eq!(st.response_variance, 30.0);
    assert!((st.covariate_means[0] - 3.0).abs() < 1e-12);
    assert!((st.covariate_sds[0] - 2f64.sqrt()).abs() < 1e-12);
    let logs = [2f64, 3.0, 7.0, 5.0, 11.0].map(f64::ln);
    let mean = logs.iter().sum::<f64>() / 5.0;
    assert!((st.response_mean - mean).abs() < 1e-12);
}
