use heightlab::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("heightlab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn height_document_layout() {
    let (code, out, _) = call(&["height", "--d", "2", "--lambda", "-2", "--point", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with(r#"{"d":2,"lambda":"-2","point":"1","hhat":{"value":"#), "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let h = &v["hhat"];
    assert!(h["value"].as_f64().unwrap().abs() <= 1e-6 + h["error"].as_f64().unwrap());
    let places = v["places"].as_array().unwrap();
    assert_eq!(places[0]["place"], "inf");
    assert_eq!(places[0]["reason"], "archimedean");
    assert_eq!(places[1]["place"], "2");
    for p in places {
        let keys: Vec<&str> = p.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys.len(), 4);
    }
}

#[test]
fn height_at_infinity_is_exactly_zero() {
    let v = json(&["height", "--d", "2", "--lambda", "1", "--point", "inf"]);
    assert_eq!(v["hhat"]["value"].as_f64(), Some(0.0));
    assert_eq!(v["hhat"]["error"].as_f64(), Some(0.0));
}

#[test]
fn usage_errors_exit_2() {
    let (code, out, err) = call(&["height", "--lambda", "0", "--point", "1"]);
    assert_eq!((code, out.as_str()), (2, ""));
    assert!(err.contains("lambda must be nonzero"), "{err}");
    assert_eq!(call(&["height", "--lambda", "1/0", "--point", "1"]).0, 2);
    assert_eq!(call(&["height", "--lambda", "1", "--point", "x"]).0, 2);
    assert_eq!(call(&["height", "--d", "1", "--lambda", "1", "--point", "1"]).0, 2);
    assert_eq!(call(&["height", "--eps", "0", "--lambda", "1", "--point", "1"]).0, 2);
    assert_eq!(call(&["generic", "--map", "t+"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    let (code, _, err) = call(&["search", "--alpha", "0", "--cap", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha=0 is preperiodic for every lambda"), "{err}");
}

#[test]
fn tiny_bigint_cap_exits_3() {
    let (code, _, err) = call(&[
        "height", "--d", "3", "--lambda", "7/3", "--point", "5/2", "--bigint-cap", "1",
    ]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn generic_examples() {
    for (d, map, want) in [("2", "t", "1/2"), ("3", "5", "1/3"), ("2", "(t^2+1)/1", "2")] {
        let v = json(&["generic", "--d", d, "--map", map]);
        assert_eq!(v["hhat_generic"], want, "{map}");
        assert_eq!(v["coprime_check"], true);
    }
    let (code, out, _) = call(&["generic", "--d", "2", "--map", "t"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r#"{"hhat_generic":"1/2","deg_f1":1,"deg_f2":2,"coprime_check":true}"#);
}

#[test]
fn common_factor_warns_and_strict_exits_4() {
    let (code, out, err) = call(&["generic", "--map", "(t^2-1)/(t-1)"]);
    assert_eq!(code, 0);
    assert!(err.contains("t - 1"), "{err}");
    assert!(out.contains(r#""hhat_generic":"1""#));
    let (code, out, _) = call(&["generic", "--strict", "--map", "(t^2-1)/(t-1)"]);
    assert_eq!((code, out.as_str()), (4, ""));
}

#[test]
fn sweep_is_deterministic_and_well_formed() {
    let args = ["sweep", "--d", "2", "--map", "t", "--hmax", "2", "--samples", "30", "--seed", "5"];
    let (c1, o1, e1) = call(&args);
    let (c2, o2, _) = call(&args);
    assert_eq!((c1, c2), (0, 0), "{e1}");
    assert_eq!(o1, o2);
    let mut lines = o1.lines();
    assert_eq!(lines.next(), Some("lambda,h_lambda,hhat,hhat_err,predicted,gap"));
    assert_eq!(lines.count(), 30);
    assert!(e1.contains("seed=5"));
    let mut jobs = args.to_vec();
    jobs.extend(["--jobs", "3"]);
    assert_eq!(call(&jobs).1, o1);
}

#[test]
fn empty_sweep_has_header_only() {
    let (code, out, _) = call(&["sweep", "--map", "t", "--hmax", "3", "--samples", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "lambda,h_lambda,hhat,hhat_err,predicted,gap\n");
}

#[test]
fn sweep_writes_file() {
    let path = std::env::temp_dir().join(format!("heightlab-sweep-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, out, _) = call(&["sweep", "--map", "2", "--hmax", "1.5", "--samples", "5", "--out", p]);
    assert_eq!((code, out.as_str()), (0, ""));
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn constant_sweep_reports_bound() {
    let (code, _, err) = call(&["sweep", "--d", "2", "--map", "1", "--hmax", "3", "--samples", "40"]);
    assert_eq!(code, 0);
    assert!(err.contains("bound=6"), "{err}");
}

#[test]
fn search_examples() {
    let hits = |cap: &str| -> Vec<String> {
        let v = json(&["search", "--d", "2", "--alpha", "1", "--cap", cap]);
        v["hits"].as_array().unwrap().iter().map(|h| h["lambda"].as_str().unwrap().to_string()).collect()
    };
    assert_eq!(hits("0"), ["-1"]);
    let wide = hits("1.1");
    assert!(wide.contains(&"-1".to_string()) && wide.contains(&"-2".to_string()));
    let v = json(&["search", "--d", "2", "--alpha", "1", "--cap", "0"]);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert!(keys.iter().all(|k| ["alpha", "d", "bound", "cap", "hits"].contains(k) || k.starts_with("x_")), "{keys:?}");
}

#[test]
fn search_budget_exits_5() {
    // bound for alpha = 1, d = 2 is 12; e^12 per coordinate is far beyond the budget
    let (code, _, err) = call(&["search", "--d", "2", "--alpha", "1", "--cap", "11"]);
    assert_eq!(code, 5, "{err}");
}

#[test]
fn selftest_runs_and_detects_mutation() {
    let (code, out, _) = call(&["selftest", "--suite", "tailbound"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    let (code, out, _) = call(&["selftest", "--suite", "tailbound", "--x-tail-scale", "0.01"]);
    assert_ne!(code, 0);
    assert!(out.contains("FAILED"));
    assert_eq!(call(&["selftest", "--suite", "nonsense"]).0, 2);
}

#[test]
fn binary_entry_point() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_heightlab"))
        .args(["generic", "--d", "3", "--map", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(r#""hhat_generic":"1/3""#));
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_heightlab"))
        .args(["height", "--lambda", "1", "--point", "1"])
        .env("HEIGHTLAB_BIGINT_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
