use std::path::Path;
use std::process::{Command, Output};

fn sagarch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagarch"))
        .args(args)
        .env_remove("SAGARCH_SEED")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

#[test]
fn simulate_fit_and_test() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("y.csv");
    let o = sagarch(&["simulate", "--theta", "0.2,0.1,0.2,0.5,1.5", "--n", "600", "--seed", "4", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr_line(&o));

    let json = dir.path().join("fit.json");
    let o = sagarch(&["fit", "--in", s(&csv), "--out", s(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["parameters"].as_array().unwrap().len(), 5);
    assert!(v["loglik"].as_f64().unwrap().is_finite());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("log-lik") && stdout.contains("AIC"));

    let tj = dir.path().join("test.json");
    let o = sagarch(&["test", "--in", s(&csv), "--which", "diagnostic", "--out", s(&tj)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tj).unwrap()).unwrap();
    let alpha_hat = v["parameters"][4]["estimate"].as_f64().unwrap();
    let star = v["tests"][0]["alpha_star"].as_f64().unwrap();
    assert_eq!(star, (alpha_hat * 100.0).round() / 100.0);

    for which in ["stationarity", "symmetry"] {
        let o = sagarch(&["test", "--in", s(&csv), "--which", which, "--level", "0.1"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(sagarch(&["simulate", "--theta", "0.1,0.1,0.1,0.6,1.2", "--n", "300", "--seed", "9", "--out", s(p)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (ja, jb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert!(sagarch(&["fit", "--in", s(&a), "--out", s(&ja)]).status.success());
    assert!(sagarch(&["fit", "--in", s(&b), "--out", s(&jb)]).status.success());
    assert_eq!(std::fs::read(&ja).unwrap(), std::fs::read(&jb).unwrap());
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |p: &Path, seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_sagarch"))
            .args(["simulate", "--theta", "0.1,0.1,0.1,0.6,1.2", "--n", "50", "--out", s(p)])
            .env("SAGARCH_SEED", seed)
            .status()
            .unwrap()
    };
    assert!(run(&a, "77").success());
    assert!(sagarch(&["simulate", "--theta", "0.1,0.1,0.1,0.6,1.2", "--n", "50", "--seed", "77", "--out", s(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = Command::new(env!("CARGO_BIN_EXE_sagarch"))
        .args(["simulate", "--theta", "0.1,0.1,0.1,0.6,1.2", "--n", "50", "--out", s(&a)])
        .env("SAGARCH_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes_and_error_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let o = sagarch(&["fit", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_line(&o);
    assert!(err.starts_with("error[usage]: ") && err.lines().count() == 1, "{err}");

    let o = sagarch(&["fit", "--in", s(&dir.path().join("missing.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).starts_with("error[data]: "));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n3,4\n").unwrap();
    let o = sagarch(&["fit", "--in", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains("ambiguous"));

    let bad = dir.path().join("bad2.csv");
    std::fs::write(&bad, "return\n0.1\n0.2\nnope\n").unwrap();
    let o = sagarch(&["fit", "--in", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains(":4:"), "{}", stderr_line(&o));

    let o = sagarch(&["simulate", "--theta", "0.1,0.1,0.1,0.6,2.5", "--n", "10", "--out", s(&dir.path().join("z.csv"))]);
    assert_eq!(o.status.code(), Some(1));

    // All-zero data carries no scale information.
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, format!("return\n{}", "0\n".repeat(100))).unwrap();
    let o = sagarch(&["fit", "--in", s(&flat)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr_line(&o));
    assert!(stderr_line(&o).starts_with("error[data]: "));

    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"design_id":"d","theta":{"omega":0.2,"phi_plus":0.1,"phi_minus":0.2,"psi":0.5,"alpha":1.5},
            "sample_sizes":[30],"replications":2,"master_seed":1,
            "experiment":{"kind":"test","test":{"test":"diagnostic","alpha_star":1.5},
                          "alternatives":[{"label":"null"}]}}"#,
    )
    .unwrap();
    let o = sagarch(&["mc", "--spec", s(&spec), "--out", s(&dir.path().join("o.json"))]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr_line(&o));
    assert!(stderr_line(&o).starts_with("error[usage]: "));
}

#[test]
fn mc_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"design_id":"smoke","theta":{"omega":0.2,"phi_plus":0.1,"phi_minus":0.2,"psi":0.5,"alpha":1.5},
            "sample_sizes":[200],"replications":4,"master_seed":5,"keep_replications":true,
            "experiment":{"kind":"mle","asd_int":false,"theory_path":0}}"#,
    )
    .unwrap();
    let out = dir.path().join("mc.json");
    let csv = dir.path().join("mc.csv");
    let o = sagarch(&["mc", "--spec", s(&spec), "--out", s(&out), "--csv", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["mle"][0]["parameters"].as_array().unwrap().len(), 5);
    assert!(v.get("elapsed_seconds").is_none());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 5);

    let o = sagarch(&["tables", "--which", "table1", "--scale", "3", "--n", "200", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr_line(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    for row in ["Bias", "ESD", "ASD^int", "ASD^res"] {
        assert!(text.contains(row), "{text}");
    }
}

#[test]
fn numeric_errors_map_to_exit_three() {
    use sagarch::Error;
    let errs = [
        Error::NumericFailure { context: "q".into(), requested: 1e-12, achieved: 1.0 },
        Error::Singular("m".into()),
        Error::Optimization { message: "o".into(), diagnostics: vec![] },
        Error::AtObservation { t: 3, source: Box::new(Error::Domain("d".into())) },
    ];
    for e in errs {
        assert_eq!((e.exit_code(), e.category()), (3, "numeric"), "{e}");
    }
}
