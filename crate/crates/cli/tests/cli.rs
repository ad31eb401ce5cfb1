use std::path::PathBuf;
use std::process::{Command, Output};

fn schemes(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemes").join(name).to_string_lossy().into_owned()
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_splitorder"));
    c.args(args).env_remove("SPLITORDER_SEED");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = run_env(args, &[]);
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn invalid_scheme_exits_2_with_report() {
    let (code, _, err) = run(&["analyze", &schemes("invalid-gap.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("not inside [0, 1]"), "{err}");
    let (code, _, err) = run(&["analyze", "no-such-file.json"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: cannot read"), "{err}");
    let (code, _, _) = run(&["analyze", "builtin:nope"]);
    assert_eq!(code, 2);
}

#[test]
fn undecided_cap_exits_3() {
    let (code, out, _) = run(&["analyze", "builtin:exact", "--max-weight", "1"]);
    assert_eq!(code, 3);
    assert!(out.contains("undecided at weight cap"), "{out}");
}

#[test]
fn weak_headlines() {
    let (code, out, _) = run(&["analyze", "builtin:counterexample", "--mode", "weak"]);
    assert_eq!(code, 0);
    assert!(out.contains("weak order 0; E residual h/2 at AA"));
    assert!(out.contains("barrier: hypothesis violated; barrier theorem not applicable"));
    let (_, out, _) = run(&["analyze", "builtin:strang-outer-a", "--mode", "weak"]);
    assert!(out.contains("weak order 2; barrier respected"));
    assert!(out.contains("deterministic order 2"));
}

#[test]
fn json_is_byte_deterministic() {
    let args = ["--format", "json", "analyze", &schemes("lie-trotter.json")];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["tool"], "splitorder");
    assert_eq!(v["command"], "analyze");
    assert!(v.get("timestamp").is_none());
    assert_eq!(v["inputDigest"].as_str().unwrap().len(), 64);
    let reports = v["payload"]["reports"].as_array().unwrap();
    assert_eq!(reports[0]["order"], "1");
    assert_eq!(reports[0]["failing"][0]["word"], "Ab");
    assert_eq!(reports[0]["failing"][0]["residual"], "J[1;A]·J[1;b] - J[1;Ab]");
    assert_eq!(reports[1]["order"], 1);

    let (_, t, _) = run(&["--format", "json", "--timestamp", "analyze", &schemes("lie-trotter.json")]);
    let v: serde_json::Value = serde_json::from_str(&t).unwrap();
    assert!(v["timestamp"].is_string());
}

#[test]
fn digest_tracks_the_input() {
    let digest = |s: &str| {
        let (_, out, _) = run(&["--format", "json", "analyze", s, "--mode", "strong"]);
        serde_json::from_str::<serde_json::Value>(&out).unwrap()["inputDigest"].as_str().unwrap().to_string()
    };
    assert_ne!(digest(&schemes("lie-trotter.json")), digest(&schemes("strang.json")));
}

#[test]
fn conditions_examples() {
    let (_, out, _) = run(&["conditions", "--alphabet", "a|A", "--max-length", "3", "--lyndon"]);
    let words: Vec<&str> = out.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    let mut sorted = words.clone();
    sorted.sort();
    let mut want = vec!["a", "A", "aA", "aaA", "aAA"];
    want.sort();
    assert_eq!(sorted, want);

    let (_, out, _) = run(&["conditions", "--alphabet", "|A", "--order", "1"]);
    assert!(out.contains("  A  1/2\n  AA  1\n"), "{out}");
    let (_, out, _) = run(&["conditions", "--alphabet", "|A", "--order", "1", "--lyndon"]);
    assert!(out.ends_with("  A  1/2\n"), "{out}");
    let (code, out, _) = run(&["conditions", "--alphabet", "a|A", "--order", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains(": 0 words"));
}

#[test]
fn local_error_tables() {
    let (_, out, _) = run(&["local-error", &schemes("lie-trotter.json"), "--max-weight", "3/2"]);
    assert!(out.contains("  Ab  3/2  J[1;A]·J[1;b] - J[1;Ab]"), "{out}");
    assert!(out.contains("  bA  3/2  -J[1;bA]"), "{out}");
    let (_, out, _) = run(&["local-error", &schemes("lie-trotter.json"), "--max-weight", "1.5", "--interpretation", "ito"]);
    assert!(out.contains("I[1;A]·I[1;b] - I[1;Ab]"), "{out}");
    let (code, out, _) = run(&["local-error", "builtin:exact"]);
    assert_eq!(code, 0);
    assert!(out.contains("no residuals up to weight cap 3"));
}

#[test]
fn convert_examples() {
    let (code, out, _) = run(&["convert", &schemes("ito-system.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("stratonovich system: deterministic {a,A*}, stochastic {A}"), "{out}");
    assert!(out.contains("f_A* = -(1/2) f_A' f_A"));
    let (_, out, _) = run(&["convert", &schemes("additive-system.json")]);
    assert!(out.contains("systems coincide"));
    let (code, _, err) = run(&["convert", &schemes("lie-trotter.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("conversion implemented ito→strat only"));
}

#[test]
fn verify_mc_rejects_bad_ladders() {
    for ladder in ["0.3,0.1,0.05", "T/8", "T/8,T/8,T/8", "x"] {
        let (code, _, _) = run(&["verify-mc", "builtin:strang-outer-a", "--system", "ou", "--h-list", ladder, "--paths", "10"]);
        assert_eq!(code, 2, "{ladder}");
    }
    let (code, _, _) = run(&["verify-mc", "builtin:lie-trotter", "--system", "ou", "--paths", "10"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_mc_seed_comes_from_the_environment() {
    let args = ["--format", "json", "verify-mc", "builtin:strang-outer-a", "--system", "ou", "--paths", "200", "--mode", "strong"];
    let out = |seed: &str| String::from_utf8(run_env(&args, &[("SPLITORDER_SEED", seed)]).stdout).unwrap();
    let default = String::from_utf8(run_env(&args, &[]).stdout).unwrap();
    assert_eq!(out("1"), default);
    assert_ne!(out("2"), default);
    let v: serde_json::Value = serde_json::from_str(&out("2")).unwrap();
    assert_eq!(v["payload"]["estimates"][0]["seed"], 2);
}

#[test]
fn selfcheck_default_and_fault_injection() {
    let (code, out, _) = run(&["selfcheck"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("properties pass at weight 2"));
    let (code, out, _) = run(&["selfcheck", "--inject-fault", "hoffman-isomorphism"]);
    assert_eq!(code, 4);
    assert!(out.contains("first failing property: hoffman-isomorphism"));
    let (code, _, err) = run(&["selfcheck", "--inject-fault", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown property"));
}
