use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shadowqpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowqpt")).args(args).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn small_run(dir: &Path) -> Output {
    shadowqpt(&[
        "run",
        "--preset",
        "full_process",
        "--seed",
        "11",
        "--override",
        "acquisition.settings=64",
        "--override",
        "acquisition.reps=4",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn same_plan_gives_identical_bytes() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    ok(&small_run(&a));
    ok(&small_run(&b));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 3);
    for name in names {
        let (x, y) = (fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
        // report.json embeds the output path
        if name == "report.json" {
            continue;
        }
        assert_eq!(x, y, "{name:?} differs");
    }
}

#[test]
fn metrics_csv_schema() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("m");
    ok(&small_run(&dir));
    let mut rdr = csv::Reader::from_path(dir.join("metrics.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["scheme", "n", "N", "postproc", "trace_distance", "frobenius_distance", "purity"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let stages: Vec<&str> = rows.iter().map(|r| &r[3]).collect();
    assert_eq!(stages, ["raw", "cp", "tp", "purify"]);
    for r in &rows {
        assert_eq!(&r[2], "256");
        let td: f64 = r[4].parse().unwrap();
        assert!(td.is_finite() && td >= 0.0);
    }
}

#[test]
fn validate_reports_default_budget() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("acq");
    ok(&shadowqpt(&["acquire", "--preset", "full_process", "--out", dir.to_str().unwrap()]));
    let out = shadowqpt(&["validate", "--records", dir.join("records.jsonl").to_str().unwrap()]);
    ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["total_outcomes"], 51200);
    assert_eq!(report["records"], 1024);
}

#[test]
fn truncated_bitstring_is_reported_with_its_line() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("acq");
    ok(&shadowqpt(&[
        "acquire",
        "--preset",
        "full_process",
        "--override",
        "acquisition.settings=5",
        "--out",
        dir.to_str().unwrap(),
    ]));
    let path = dir.join("records.jsonl");
    let mut lines: Vec<String> = fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    let at = lines[2].find("\"outcomes\":[\"").unwrap() + "\"outcomes\":[\"".len();
    lines[2].remove(at);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = shadowqpt(&["validate", "--records", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let errors = report["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["line"], 3);

    let out = shadowqpt(&["reconstruct", "--records", path.to_str().unwrap(), "--out", root.path().join("r").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn invalid_plan_fails_before_writing() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("bad");
    let out = shadowqpt(&["run", "--preset", "full_process", "--override", "noise=2", "--out", dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise"));
    assert!(!dir.exists());
}

#[test]
fn mid_run_failure_removes_partial_outputs() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("partial");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("keep.txt"), "mine").unwrap();
    // records and early stages are written before the likelihood stage rejects two-sided data
    let out = shadowqpt(&[
        "run",
        "--preset",
        "full_process",
        "--override",
        "acquisition.scheme=two_sided",
        "--override",
        "acquisition.plan={mode=\"pauli\"}",
        "--override",
        "postprocessing=[\"cp\",\"mle\"]",
        "--override",
        "acquisition.settings=20",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let left: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, ["keep.txt"]);
}

#[test]
fn bounds_preset_writes_table() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("b");
    ok(&shadowqpt(&["bounds", "--out", dir.to_str().unwrap()]));
    let mut rdr = csv::Reader::from_path(dir.join("bounds.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["bound", "scheme", "n", "k", "m", "t", "eps", "delta", "value"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let hit = rows.iter().find(|r| &r[0] == "hamlearn" && &r[2] == "5" && &r[3] == "2").unwrap();
    assert_eq!(&hit[8], "440326827");
}

#[test]
fn reconstruct_and_report_round_trip() {
    let root = tempfile::tempdir().unwrap();
    let acq = root.path().join("acq");
    ok(&shadowqpt(&[
        "acquire",
        "--preset",
        "full_process",
        "--override",
        "acquisition.settings=100",
        "--out",
        acq.to_str().unwrap(),
    ]));
    let rec = root.path().join("rec");
    ok(&shadowqpt(&[
        "reconstruct",
        "--records",
        acq.join("records.jsonl").to_str().unwrap(),
        "--out",
        rec.to_str().unwrap(),
    ]));
    let produced: Vec<String> =
        fs::read_dir(&rec).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(produced.iter().any(|n| n.starts_with("choi") && n.ends_with(".json")), "{produced:?}");
}
