use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hetren"));
    c.env_remove("HETREN_PRECISION");
    c
}

fn worked() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/worked.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Worked config with one textual substitution.
fn variant(dir: &Path, from: &str, to: &str) -> PathBuf {
    let text = std::fs::read_to_string(worked()).unwrap();
    assert!(text.contains(from), "{from} not in config");
    let p = dir.join("variant.json");
    std::fs::write(&p, text.replace(from, to)).unwrap();
    p
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn shipped_config_passes_every_check() {
    let o = run(&["check-model", p(&worked())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for tag in ["pq-nondegenerate", "spectral", "quasi-transverse", "tangency"] {
        assert!(out.contains(&format!("PASS [{tag}]")), "{tag} missing:\n{out}");
    }
    assert!(!out.contains("FAIL"));
}

#[test]
fn vanishing_b1_fails_pq_nondegeneracy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = variant(d.path(), "\"b1\": 1.0", "\"b1\": 0.0");
    let o = run(&["check-model", p(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL [pq-nondegenerate]"));
}

#[test]
fn malformed_or_missing_config_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.json");
    std::fs::write(&bad, "{ \"spectrum\": [").unwrap();
    assert_eq!(run(&["check-model", p(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["check-model", p(&d.path().join("none.json"))]).status.code(), Some(2));
    assert_eq!(run(&["certify", p(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn search_emits_three_rows_within_bounds() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("sched.json");
    let o = run(&["search-sojourn", p(&worked()), "--xi", "1.185", "--eps", "0.02", "--count", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    let tau = std::f64::consts::FRAC_1_SQRT_2;
    for (k, r) in rows.iter().enumerate() {
        let gap = (tau * r["product"].as_f64().unwrap() - 1.185).abs();
        assert!(gap < 0.02 / 2f64.powi(k as i32), "row {k}: {gap}");
    }
    assert_eq!(stdout(&o).lines().count(), 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("sched.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "search-sojourn");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn resonant_spectrum_fails_search_with_diagnostic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = variant(d.path(), "\"lambda_Q\": 0.495", "\"lambda_Q\": 0.5");
    let o = run(&["search-sojourn", p(&cfg), "--count", "2", "--n-max", "200"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("resonance"), "{}", stderr(&o));
}

#[test]
fn empty_schedule_is_fine() {
    let o = run(&["search-sojourn", p(&worked()), "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

#[test]
fn default_renormalization_converges_and_replays_identically() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    let o = run(&["renormalize", p(&worked()), "--out-dir", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c0: Vec<f64> = csv_column(&out.join("report.csv"), "sup_c0_error").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(c0.len(), 4);
    assert!(c0.windows(2).all(|w| w[1] < w[0]), "{c0:?}");
    let svg = std::fs::read_to_string(out.join("report.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));

    let manifest_path = out.join("manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let listed: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for f in std::fs::read_dir(&out).unwrap() {
        let f = f.unwrap().path();
        assert!(listed.contains(&f.to_str().unwrap()), "{f:?} not in manifest");
    }
    assert_eq!(m["precision"], "extended");

    let before: Vec<Vec<u8>> = ["report.csv", "report.json", "report.svg", "schedule.json"]
        .iter()
        .map(|f| std::fs::read(out.join(f)).unwrap())
        .collect();
    let o = run(&["replay", p(&manifest_path)]);
    assert_eq!(o.status.code(), Some(0));
    for (f, b) in ["report.csv", "report.json", "report.svg", "schedule.json"].iter().zip(before) {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), b, "{f} changed on replay");
    }
}

#[test]
fn saved_schedule_gives_the_same_report() {
    let d = tempfile::tempdir().unwrap();
    let sched = d.path().join("s.json");
    assert_eq!(run(&["search-sojourn", p(&worked()), "--out", p(&sched)]).status.code(), Some(0));
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert_eq!(run(&["renormalize", p(&worked()), "--grid", "3", "--out-dir", p(&a)]).status.code(), Some(0));
    let o = run(&["renormalize", p(&worked()), "--grid", "3", "--schedule", p(&sched), "--out-dir", p(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(a.join("report.csv")).unwrap(), std::fs::read(b.join("report.csv")).unwrap());
}

#[test]
fn single_point_grid_is_a_valid_report() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["renormalize", p(&worked()), "--grid", "1", "--out-dir", p(d.path())]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["grid_points"], 1);
    assert_eq!(csv_column(&d.path().join("report.csv"), "k").len(), 4);
    assert_eq!(run(&["renormalize", p(&worked()), "--grid", "0", "--out-dir", p(d.path())]).status.code(), Some(2));
}

#[test]
fn native_precision_is_flagged_not_silent() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["renormalize", p(&worked()), "--grid", "3", "--out-dir", p(d.path())])
        .env("HETREN_PRECISION", "native")
        .output()
        .unwrap();
    let code = o.status.code();
    assert!(code == Some(0) || code == Some(4));
    if code == Some(0) {
        let flags = csv_column(&d.path().join("report.csv"), "precision_ok");
        assert!(flags.iter().any(|f| f == "false"), "{flags:?}");
        assert!(stderr(&o).contains("warning"));
        assert!(std::fs::read_to_string(d.path().join("manifest.json")).unwrap().contains("\"native\""));
    }
}

#[test]
fn certification_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("cert.json");
    let o = run(&["certify", p(&worked()), "--grid", "5", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c["verdict"], "numerical-evidence");
    assert!(d.path().join("cert.manifest.json").exists());

    let o = run(&["certify", p(&worked()), "--grid", "3", "--xi", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let c: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(c["restriction_ok"], false);

    let o = run(&["certify", p(&worked()), "--grid", "3", "--eps", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    let c: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(c["restriction_ok"], false);
    assert_eq!(c["spectral_ok"], true);
}

#[test]
fn orbit_rows_and_escape_flag() {
    let o = run(&["orbit", "--family", "G", "--steps", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "step,x,y,z,escaped\n0,0,0,0,0\n");

    let o = run(&["orbit", "--family", "G", "--xi", "1.185", "--mu", "-9.5", "--steps", "100"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let escaped = rows.last().unwrap().ends_with(",1");
    assert!(rows.len() == 101 || escaped, "{} rows", rows.len());
    assert!(rows[..rows.len() - 1].iter().all(|r| r.ends_with(",0")));
}

#[test]
fn orbit_output_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = |f: &Path| {
        vec!["orbit".to_string(), "--family".into(), "e".into(), "--start".into(), "0.1,-0.2,0.05".into(),
             "--steps".into(), "50".into(), "--out".into(), f.to_str().unwrap().into()]
    };
    let (a, b) = (d.path().join("a.csv"), d.path().join("b.csv"));
    assert_eq!(bin().args(args(&a)).status().unwrap().code(), Some(0));
    assert_eq!(bin().args(args(&b)).status().unwrap().code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(run(&["orbit", "--family", "e", "--sigma", "1,2"]).status.code(), Some(2));
}
