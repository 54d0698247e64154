use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rieszlab");

const Z3: &str = r#"[{"id": "z3", "ends": [{"n": 3}]}]"#;

fn rieszlab(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("RIESZLAB_JOBS")
        .output()
        .unwrap()
}

fn spec(dir: &Path, body: &str) -> String {
    let p = dir.join("spec.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn empty_run_writes_manifest_only() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), r#"{"verbs": [], "out_dir": "out"}"#);
    let o = rieszlab(&["run", "--spec", &s], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let files: Vec<_> = std::fs::read_dir(d.path().join("out")).unwrap().collect();
    assert_eq!(files.len(), 1);
    let m = manifest(&d.path().join("out"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["steps"].as_array().unwrap().len(), 0);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_json_reports_position() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), "{\n  \"seed\": 3,\n  \"probes\": ,\n}\n");
    let o = rieszlab(&["run", "--spec", &s], d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("column"), "{e}");
}

#[test]
fn schema_violations_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for body in [
        r#"{"unknown_field": 1}"#,
        r#"{"schema_version": 7}"#,
        r#"{"p_list": [0.5]}"#,
        r#"{"verbs": ["teleport"]}"#,
    ] {
        let s = spec(d.path(), body);
        let o = rieszlab(&["run", "--spec", &s], d.path());
        assert_eq!(o.status.code(), Some(2), "{body}: {}", stderr(&o));
    }
    let o = rieszlab(&["run", "--spec", "missing.json"], d.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn resource_cap_exits_4_with_manifest() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), &format!(r#"{{"models": {Z3}, "r_list": [8], "max_vertices": 1000, "out_dir": "out"}}"#));
    let o = rieszlab(&["build", "--spec", &s], d.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let m = manifest(&d.path().join("out"));
    assert_eq!(m["exit_code"], 4);
    assert_eq!(m["partial"], true);
    assert_eq!(m["steps"][0]["status"], "failed");
}

#[test]
fn heat_and_resolve_csv() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), &format!(r#"{{"models": {Z3}, "r_list": [4], "out_dir": "out"}}"#));
    let o = rieszlab(&["heat", "--spec", &s, "--t", "1,2.5"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = rieszlab(&["resolve", "--spec", &s, "--k", "0.5"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = d.path().join("out");
    for name in ["heat_z3_R4_t1.csv", "heat_z3_R4_t2p5.csv", "resolve_z3_R4_k0.csv", "resolve_z3_R4_k0p5.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("vertex_id,end_tag,distance,value"));
        let rows: Vec<_> = lines.collect();
        assert!(!rows.is_empty());
        for row in rows {
            let cols: Vec<_> = row.split(',').collect();
            assert_eq!(cols.len(), 4, "{row}");
            cols[3].parse::<f64>().unwrap();
        }
    }
    assert_eq!(manifest(&out)["steps"][0]["verb"], "resolve");
}

#[test]
fn scaling_table_has_one_row_per_cell() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), &format!(r#"{{"models": {Z3}, "out_dir": "out"}}"#));
    let o = rieszlab(&["scaling", "--spec", &s, "--p", "2,3,4", "--R", "6,8,10"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.path().join("out/table.csv")).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9, "{text}");
    assert!(rows.iter().all(|r| r.starts_with("z3,")));
    assert!(d.path().join("out/scaling.json").exists());
}

#[test]
fn jobs_env_overrides_flag() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), &format!(r#"{{"models": {Z3}, "r_list": [4], "out_dir": "out"}}"#));
    let run = |env: &str| {
        Command::new(BIN)
            .args(["build", "--spec", &s, "--jobs", "0"])
            .current_dir(d.path())
            .env("RIESZLAB_JOBS", env)
            .output()
            .unwrap()
    };
    // --jobs 0 alone is rejected; a valid RIESZLAB_JOBS takes precedence over it
    let o = rieszlab(&["build", "--spec", &s, "--jobs", "0"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn verify_all_only_bessel() {
    let d = tempfile::tempdir().unwrap();
    let o = rieszlab(&["verify-all", "--only", "bessel", "--out", "out"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2, "{stdout}");
    assert!(stdout.contains("2/2 criteria passed"));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/verify.json")).unwrap()).unwrap();
    assert_eq!(rep["results"].as_array().unwrap().len(), 2);

    let o = rieszlab(&["verify-all", "--only", "nonsense"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernels_check_table() {
    let d = tempfile::tempdir().unwrap();
    let o = rieszlab(&["kernels-check", "--out", "out"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.path().join("out/kernels.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,k,r,lhs,rhs,relerr"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4 * 25);
    for row in rows {
        let relerr: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(relerr <= 1e-6, "{row}");
    }
}

#[test]
fn scaling_out_names_table_file() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(d.path(), &format!(r#"{{"models": {Z3}}}"#));
    let o = rieszlab(&["scaling", "--spec", &s, "--p", "2", "--R", "6,8", "--out", "res/z3.csv"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.path().join("res/z3.csv")).unwrap();
    assert!(text.starts_with("model_id,p,R,lower_bound,witness_id,slope,classification\n"), "{text}");
    assert_eq!(text.lines().count(), 3);
    assert!(d.path().join("res/manifest.json").exists());
}

#[test]
fn parametrix_report_and_columns() {
    let d = tempfile::tempdir().unwrap();
    let s = spec(
        d.path(),
        r#"{"models": [{"id": "pair", "ends": [{"n": 3}, {"n": 3}]}], "r_list": [6],
            "k_grid": {"k0": 0.5, "points": 2}, "out_dir": "out"}"#,
    );
    let o = rieszlab(&["parametrix", "--spec", &s, "--probes", "2", "--report", "diag.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("diag.json")).unwrap()).unwrap();
    let summary = rep["outputs"]["parametrix_pair_R6.json"]["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 2);
    assert_eq!(summary[1]["k"], 0.5);
    assert!(summary[0]["hs_norm_E"].as_f64().unwrap() > 0.0);
    assert!(summary[0]["min_sv"].as_f64().unwrap() > 0.0);
    assert!(summary[0]["slopes"]["e_right"].is_array());
    for k in ["0", "0p5"] {
        let text = std::fs::read_to_string(d.path().join(format!("out/parametrix_pair_R6_k{k}.csv"))).unwrap();
        assert!(text.starts_with("vertex_id,end_tag,distance,value\n"));
    }
}
