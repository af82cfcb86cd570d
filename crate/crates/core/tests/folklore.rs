use std::time::Instant;

use lambda_sharp::bisim::relfile::RelFile;
use lambda_sharp::bisim::sharp::{SharpGame, SharpIndex};
use lambda_sharp::bisim::{check, expand, UpToSpec};

#[test]
fn folklore_candidate() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../samples/folklore.rel")).unwrap();
    let f = RelFile::parse(&src).unwrap();
    let variant = f.variant;
    let cand = f.into_candidate("folklore");
    let g = SharpGame::new(variant, 3);
    let t = Instant::now();
    let exp = expand(&g, &cand, 3, 2);
    eprintln!("expanded {} pairs in {:?}", exp.len(), t.elapsed());
    let idx = SharpIndex::new(&exp, variant, UpToSpec::standard());
    let rep = check(&g, &exp, &idx, 50, false);
    eprintln!("checked in {:?}: {}", t.elapsed(), rep.verdict);
    assert!(rep.verdict.is_valid());
}

#[test]
fn beta_omega_candidates() {
    for k in 1..=3 {
        let src = std::fs::read_to_string(format!("{}/../../samples/beta_omega_{k}.rel", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let f = RelFile::parse(&src).unwrap();
        let variant = f.variant;
        let cand = f.into_candidate("beta");
        let g = SharpGame::new(variant, 3);
        let t = Instant::now();
        let exp = expand(&g, &cand, 3, 2);
        let spec = UpToSpec::star();
        let idx = SharpIndex::new(&exp, variant, spec.clone());
        let rep = check(&g, &exp, &idx, 50, true);
        eprintln!("E{k}: {} in {:?}", rep.verdict, t.elapsed());
        assert!(rep.verdict.is_valid(), "{}", rep.verdict);
        assert!(lambda_sharp::bisim::audit_diacritical(&idx, &rep.log, &spec));
        assert!(lambda_sharp::bisim::replay_all(&g, &idx, &rep.log).is_empty());
    }
}
