mod props;

fn check(name: &str) {
    let i = props::ALL.iter().position(|(n, _)| *n == name).unwrap();
    if let Err(e) = props::run(props::CASES, props::ALL[i].1) {
        panic!("{name}: {e}");
    }
    let hits = props::hits(i);
    eprintln!("{name}: {hits} non-trivial cases");
    assert!(hits >= props::MIN_HITS, "{name}: only {hits} non-trivial cases");
}

#[test]
fn permutation_commutes_with_step() {
    check("permutation commutes with step");
}

#[test]
fn decompose_plug_round_trip() {
    check("decompose/plug round trip");
}

#[test]
fn step_is_deterministic() {
    check("step determinism");
}

#[test]
fn enumerated_contexts_are_promptless() {
    check("enumerated contexts are promptless");
}

#[test]
fn anti_unification_replays() {
    check("anti-unification replays");
}

#[test]
fn justifications_replay() {
    check("justifications replay");
}

#[test]
fn counterexamples_persist() {
    check("counterexamples persist under larger bounds");
}
