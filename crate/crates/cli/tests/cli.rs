use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeta-forms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn phi_table_and_varpi() {
    let o = run(&["phi", "--M", "6", "--deltas", "0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("varpi = 2.15747996942"), "{s}");
    assert!(s.contains("[4/5, 1)  0"), "{s}");
}

#[test]
fn phi_zero_deltas() {
    let o = run(&["phi", "--M", "6", "--deltas", "0,0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "phi identically 0; varpi = 0\n");
}

#[test]
fn constant_c_json() {
    let o = run(&[
        "constant-c",
        "--M",
        "6",
        "--deltas",
        "0,1",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let norm: f64 = v["C_times_1_plus_log2"]["value"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((norm - 1.009388).abs() < 1e-6);
}

#[test]
fn invalid_params_exit_2() {
    let o = run(&["phi", "--M", "6", "--deltas", "3,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid parameters"));
    let o = run(&["verify", "--M", "6", "--deltas", "0,1", "--n-range", "5..2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_range_with_and_without_divisibility() {
    let o = run(&[
        "verify",
        "--M",
        "6",
        "--deltas",
        "0,1",
        "--s",
        "4",
        "--r",
        "2",
        "--n-range",
        "16..17",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(
        s.contains("n = 16: residual") && s.contains("divisibility skipped"),
        "{s}"
    );
    assert!(
        s.contains("n = 17: residual") && s.contains("integrality ok"),
        "{s}"
    );
    assert!(stderr(&o).contains("warning: n = 16 <= s^2"));
}

#[test]
fn asympt_closed_form_reports_x0() {
    let o = run(&[
        "asympt", "--M", "6", "--deltas", "0,1", "--s", "2", "--r", "1", "--format", "csv",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("name,value,error_bound\n"));
    assert!(s.contains("x0,0.062019202318"), "{s}");
}

#[test]
fn out_manifest_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phi.csv");
    let out_s = out.to_str().unwrap();
    let o = run(&[
        "phi", "--M", "12", "--deltas", "0,0,1,2", "--format", "csv", "--out", out_s,
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let body = std::fs::read(&out).unwrap();
    assert!(body.starts_with(b"from,to,value\n"));
    let mpath = format!("{out_s}.manifest.json");
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&mpath).unwrap()).unwrap();
    assert_eq!(m["command"], "phi");
    assert_eq!(m["config"]["M"], 12);
    assert_eq!(m["precision_bits"], 128);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let o = run(&["replay", &mpath]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut tampered = m.clone();
    tampered["outputs"][0]["sha256"] = "00".repeat(32).into();
    std::fs::write(&mpath, serde_json::to_string(&tampered).unwrap()).unwrap();
    assert_eq!(run(&["replay", &mpath]).status.code(), Some(3));
}

#[test]
fn search_is_seeded_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("search.toml");
    std::fs::write(
        &cfg,
        "M_max = 8\ndelta_max = 2\nJ_max = 2\nfinalists = 3\nprecision_bits = 128\n\
         [strategy]\nkind = \"random\"\nseed = 1\niterations = 10\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let a = run(&["search", "--config", c, "--seed", "7", "--jobs", "1"]);
    let b = run(&["search", "--config", c, "--seed", "7", "--jobs", "2"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("shapes evaluated"));
}

#[test]
fn bad_search_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "M_max = 8\n").unwrap();
    assert_eq!(
        run(&["search", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
