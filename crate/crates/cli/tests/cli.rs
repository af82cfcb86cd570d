use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn samples(name: &str) -> String {
    format!("{}/../../samples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lsharp")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lsharp-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn eval_trace_lists_rules_in_order() {
    let (code, r, _) = run(&["eval", &samples("ex21.lam"), "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(r["outcome"], "value");
    let rules: Vec<&str> = r["trace"].as_array().unwrap().iter().map(|s| s["rule"].as_str().unwrap()).collect();
    assert_eq!(rules, ["new", "capture", "throw", "capture", "beta", "beta"]);
}

#[test]
fn stuck_program_exits_one() {
    let (code, r, _) = run(&["eval", &samples("ex21_stuck.lam")]);
    assert_eq!(code, 1);
    assert_eq!(r["outcome"], "stuck");
    let (code, r, _) = run(&["obs", &samples("ex21_stuck.lam")]);
    assert_eq!(code, 1);
    assert_eq!(r["observable"], "stuck");
}

#[test]
fn fuel_exhaustion_is_inconclusive() {
    let d = scratch("omega");
    let f = d.join("omega.lam");
    std::fs::write(&f, "omega\n").unwrap();
    let (code, r, _) = run(&["eval", f.to_str().unwrap(), "--fuel", "50"]);
    assert_eq!(code, 2);
    assert_eq!(r["outcome"], "unknown");
}

#[test]
fn identity_applied_is_equivalent_to_identity() {
    let (code, r, _) = run(&["equiv-ctx", &samples("id-applied.lam"), &samples("id.lam"), "--size", "4", "--fuel", "200"]);
    assert_eq!(code, 0);
    assert!(r["verdict"]["EquivalentWithinBounds"]["contexts"].as_u64().unwrap() > 1000);
}

#[test]
fn folklore_candidate_relates_the_two_files() {
    let args = [
        "equiv-bisim",
        &samples("shift.lam"),
        &samples("shiftprime.lam"),
        "--candidate",
        &samples("folklore.rel"),
        "--variant",
        "standard",
    ];
    let (code, r, _) = run(&args);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["verdict"], "valid-within-bounds");
    assert_eq!(r["replay_failures"], 0);
}

#[test]
fn unrelated_pair_is_not_accepted() {
    let args = ["equiv-bisim", &samples("shift.lam"), &samples("id.lam"), "--candidate", &samples("folklore.rel")];
    let (code, r, _) = run(&args);
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "pair-not-related");
}

#[test]
fn delimited_continuation_is_distinguished() {
    let args = [
        "distinguish",
        &samples("ex43_left.lam"),
        &samples("ex43_right.lam"),
        "--variant",
        "star",
        "--ctx-size",
        "1",
    ];
    let (code, r, _) = run(&args);
    assert_eq!(code, 1);
    assert_eq!(r["replay_verified"], true);
    let (code, r, _) = run(&["distinguish", &samples("ex43_left.lam"), &samples("ex43_left.lam"), "--variant", "star", "--ctx-size", "1"]);
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "unknown");
}

#[test]
fn lamshift_commands() {
    let d = scratch("shift");
    let a = d.join("a.lam");
    let b = d.join("b.lam");
    std::fs::write(&a, "(shift k (k (lam z z)))").unwrap();
    std::fs::write(&b, "(lam z z)").unwrap();
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let (code, r, _) = run(&["eval", a, "--calculus", "lamshift"]);
    assert_eq!((code, r["outcome"].as_str()), (0, Some("value")));
    let (code, _, _) = run(&["eval", a, "--calculus", "lamshift", "--semantics", "relaxed"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["equiv-ctx", a, b, "--calculus", "lamshift", "--size", "3"]);
    assert_eq!(code, 0);
    let (code, r, _) = run(&["equiv-ctx", a, b, "--calculus", "lamshift", "--semantics", "relaxed"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"]["Distinguisher"]["obs1"], "Stuck");
    let (code, r, _) = run(&["distinguish", a, b, "--calculus", "lamshift", "--semantics", "relaxed", "--depth", "2"]);
    assert_eq!(code, 1);
    assert_eq!(r["replay_verified"], true);
}

#[test]
fn generated_corpus_agrees() {
    let d = scratch("corpus");
    let dir = d.to_str().unwrap();
    let (code, r, _) = run(&["corpus", dir, "--mode", "difftest", "--generate", "100", "--seed", "17"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["programs"], 100);
    assert_eq!(r["agree"], 100);
    // rerunning over the written files gives the same results
    let (_, again, _) = run(&["corpus", dir, "--mode", "difftest", "--jobs", "1"]);
    assert_eq!(again["results"], r["results"]);
}

#[test]
fn parse_errors_carry_positions() {
    let d = scratch("bad");
    let f = d.join("bad.lam");
    std::fs::write(&f, "(lam x\n  (x ))) ").unwrap();
    let (code, _, err) = run(&["eval", f.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(err.contains("2:"), "{err}");
    let (code, _, _) = run(&["eval"]);
    assert_eq!(code, 3);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    let args = ["equiv-bisim", &samples("shift.lam"), &samples("shiftprime.lam"), "--candidate", &samples("folklore.rel")];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(strip(a), strip(b));
}
