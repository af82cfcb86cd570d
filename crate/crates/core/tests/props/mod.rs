//! Property suites shared by the `properties` and `acceptance` targets.
//! Each property takes a case seed; `run` drives it through proptest with a
//! fixed runner seed.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::Rng;

use lambda_sharp::bisim::relfile::RelFile;
use lambda_sharp::bisim::sharp::{anti_unify, rebuild, SharpGame, SharpIndex};
use lambda_sharp::bisim::{distinguish, expand, Game, Justifier, UpToSpec};
use lambda_sharp::contexts::{Enumerator, Generation, Kind};
use lambda_sharp::ctxeq::{enumerate_eval_ctx, CtxEqConfig, ctx_equiv_check, CtxVerdict};
use lambda_sharp::gen::{rng, TermGen};
use lambda_sharp::lts::{State, Variant};
use lambda_sharp::reduction::{decompose, step, Decomposition, NormalClass, RuleKind, Step};
use lambda_sharp::syntax::{EvalCtx, Permutation, Prompt, Term};

pub const CASES: u32 = 1000;
/// Non-trivial cases each property must reach out of `CASES`.
pub const MIN_HITS: usize = 50;
const RUNNER_SEED: [u8; 32] = *b"lambda-sharp property runner 01!";

pub type Prop = fn(u64) -> Result<(), String>;

pub const ALL: [(&str, Prop); 7] = [
    ("permutation commutes with step", perm_commutes_with_step),
    ("decompose/plug round trip", decompose_plug_round_trip),
    ("step determinism", step_determinism),
    ("enumerated contexts are promptless", contexts_are_promptless),
    ("anti-unification replays", anti_unify_replays),
    ("justifications replay", justifications_replay),
    ("counterexamples persist under larger bounds", counterexample_monotone),
];

pub fn run(cases: u32, prop: Prop) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &RUNNER_SEED));
    runner
        .run(&any::<u64>(), |seed| prop(seed).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())
}

/// Cases that reached the interesting branch of each property, in the
/// order of `ALL`. The suites check these so that no property passes
/// vacuously.
pub static HITS: [AtomicUsize; 7] = [const { AtomicUsize::new(0) }; 7];

fn hit(i: usize) {
    HITS[i].fetch_add(1, Ordering::Relaxed);
}

pub fn hits(i: usize) -> usize {
    HITS[i].load(Ordering::Relaxed)
}

fn random_term(seed: u64, max: usize) -> Term {
    let mut r = rng(seed);
    let size = r.gen_range(1..=max);
    TermGen::new(3).redex_rich(&mut r, size)
}

fn random_perm(r: &mut impl Rng) -> Permutation {
    let mut img: Vec<u32> = (0..5).collect();
    img.shuffle(r);
    Permutation::from_pairs((0..5).map(|i| (Prompt(i), Prompt(img[i as usize])))).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------

/// `σ(e) → e''` and `e → e'` with `σ(e')` equal to `e''` once the two
/// generated prompts are identified.
pub fn perm_commutes_with_step(seed: u64) -> Result<(), String> {
    let e = random_term(seed, 14);
    let sigma = random_perm(&mut rng(seed ^ 0x9e37));
    let pe = e.apply_perm(&sigma);
    let none = BTreeSet::new();
    match (step(&e, &none), step(&pe, &none)) {
        (Step::Reduced(a, k1), Step::Reduced(b, k2)) => {
            if k1 == RuleKind::Capture || k1 == RuleKind::New {
                hit(0);
            }
            ensure(k1 == k2, || format!("rule differs on {e}"))?;
            let sa = a.apply_perm(&sigma);
            let fresh = |t: &Term, from: &Term| t.prompts().difference(&from.prompts()).copied().next();
            let sa = match (fresh(&sa, &pe), fresh(&b, &pe)) {
                (Some(x), Some(y)) => sa.apply_perm(&Permutation::swap(x, y)),
                _ => sa,
            };
            ensure(sa.alpha_eq(&b), || format!("{e}: σ(step e) = {sa}, step(σ e) = {b}"))
        }
        (Step::Normal(c1), Step::Normal(c2)) => {
            let same_class = std::mem::discriminant(&c1) == std::mem::discriminant(&c2);
            ensure(same_class, || format!("normal class differs on {e}"))
        }
        _ => Err(format!("one of {e} and its permutation reduces, the other does not")),
    }
}

/// Every split of `e` as `E[t]` with `E` an evaluation context.
fn splits(e: &Term) -> Vec<(EvalCtx, Term)> {
    let mut out = vec![(EvalCtx::Hole, e.clone())];
    match e {
        Term::App(a, b) if !a.is_value() => {
            for (c, t) in splits(a) {
                out.push((EvalCtx::app_l(c, (**b).clone()), t));
            }
        }
        Term::App(a, b) => {
            for (c, t) in splits(b) {
                out.push((EvalCtx::app_r((**a).clone(), c), t));
            }
        }
        Term::Reset(p, b) => {
            if let Term::Prompt(q) = **p {
                for (c, t) in splits(b) {
                    out.push((EvalCtx::delim(q, c), t));
                }
            }
        }
        _ => {}
    }
    out
}

/// Redex shapes, written down independently of the decomposition.
fn is_redex(t: &Term) -> bool {
    match t {
        Term::App(f, a) => matches!(**f, Term::Lam(..)) && a.is_value(),
        Term::New(..) => true,
        Term::Throw(k, _) => matches!(**k, Term::Cont(_)),
        Term::Reset(p, b) => match **p {
            Term::Prompt(q) => {
                b.is_value()
                    || splits(b).iter().any(|(c, g)| {
                        matches!(g, Term::Grab(gp, _, _) if **gp == Term::Prompt(q)) && !c.sur_prompts().contains(&q)
                    })
            }
            _ => false,
        },
        _ => false,
    }
}

pub fn decompose_plug_round_trip(seed: u64) -> Result<(), String> {
    let e = random_term(seed, 16);
    match decompose(&e) {
        Decomposition::Redex(c, r) => {
            if c != EvalCtx::Hole {
                hit(1);
            }
            let back = c.plug(r.to_term());
            ensure(back == e, || format!("{e} decomposes and plugs back to {back}"))
        }
        Decomposition::Normal(NormalClass::Value) => ensure(e.is_value(), || format!("{e} is not a value")),
        Decomposition::Normal(NormalClass::ControlStuck {
            prompt,
            outer,
            binder,
            body,
        }) => {
            let back = outer.plug(Term::Grab(Box::new(Term::Prompt(prompt)), binder, Box::new(body)));
            ensure(back == e && !outer.sur_prompts().contains(&prompt), || format!("stuck split of {e} is wrong"))
        }
        Decomposition::Normal(NormalClass::Error(_)) => Ok(()),
    }
}

/// At most one split is a redex, it is the one `decompose` returns, and
/// reduction does not depend on the choice of bound names.
pub fn step_determinism(seed: u64) -> Result<(), String> {
    let e = random_term(seed, 16);
    let redexes: Vec<(EvalCtx, Term)> = splits(&e).into_iter().filter(|(_, t)| is_redex(t)).collect();
    ensure(redexes.len() <= 1, || format!("{e} has {} redex positions", redexes.len()))?;
    match (decompose(&e), redexes.first()) {
        (Decomposition::Redex(c, r), Some((c2, t))) => {
            hit(2);
            ensure(&c == c2 && &r.to_term() == t, || format!("{e}: decomposition picks another redex"))?
        }
        (Decomposition::Normal(_), None) => {}
        _ => return Err(format!("{e}: decomposition and redex positions disagree")),
    }
    let none = BTreeSet::new();
    match (step(&e, &none), step(&e.canonical(), &none)) {
        (Step::Reduced(a, _), Step::Reduced(b, _)) => ensure(a.alpha_eq(&b), || format!("{e} reduces differently after renaming")),
        (Step::Normal(_), Step::Normal(_)) => Ok(()),
        _ => Err(format!("{e}: renaming changes whether it reduces")),
    }
}

fn random_value(r: &mut impl Rng) -> Term {
    let g = TermGen::new(3);
    loop {
        let size = r.gen_range(1..6);
        let t = g.term(r, size);
        if t.is_value() {
            return t;
        }
    }
}

pub fn contexts_are_promptless(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.gen_range(0..3);
    let env: Vec<Term> = (0..n).map(|_| random_value(&mut r)).collect();
    let size = r.gen_range(1..4);
    let generation = if r.gen_bool(0.5) { Generation::Standard } else { Generation::Star };
    let kind = if r.gen_bool(0.5) { Kind::C } else { Kind::Cv };
    let mut en = Enumerator::for_env(generation, &env);
    let ctxs = en.up_to(kind, size);
    let allowed: BTreeSet<Prompt> = env.iter().flat_map(|v| v.prompts()).collect();
    for c in ctxs.choose_multiple(&mut r, 20) {
        if let Ok(t) = c.plug(&env) {
            if !allowed.is_empty() && !t.prompts().is_empty() {
                hit(3);
            }
            ensure(t.prompts().is_subset(&allowed), || format!("{c:?} introduces a prompt"))?;
        }
    }
    for c in enumerate_eval_ctx(size, &[]).choose_multiple(&mut r, 20) {
        ensure(c.prompts().is_empty(), || format!("evaluation context {c} mentions a prompt"))?;
    }
    Ok(())
}

pub fn anti_unify_replays(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.gen_range(1..3);
    let ml: Vec<Term> = (0..n).map(|_| random_value(&mut r)).collect();
    let mr: Vec<Term> = (0..n).map(|_| random_value(&mut r)).collect();
    let member = (State::env_only(ml.clone()), State::env_only(mr.clone()));
    let mut en = Enumerator::for_env(Generation::Standard, &ml);
    let pool = en.up_to(Kind::Cv, 3);
    let k = r.gen_range(1..3);
    let cs: Vec<_> = pool.choose_multiple(&mut r, k).cloned().collect();
    let (Ok(s), Ok(t)) = (
        cs.iter().map(|c| c.plug(&ml)).collect::<Result<Vec<_>, _>>(),
        cs.iter().map(|c| c.plug(&mr)).collect::<Result<Vec<_>, _>>(),
    ) else {
        return Ok(());
    };
    let (s, t) = (State::env_only(s), State::env_only(t));
    if let Some((env, run, sl, sr)) = anti_unify(&member, &s, &t, Generation::Standard) {
        hit(4);
        let l = rebuild(&member.0, &sl, &env, &run);
        let rr = rebuild(&member.1, &sr, &env, &run);
        ensure(l.is_some_and(|l| l.alpha_eq(&s)), || format!("left side of {s} does not replay"))?;
        ensure(rr.is_some_and(|x| x.alpha_eq(&t)), || format!("right side of {t} does not replay"))?;
    }
    Ok(())
}

struct Folklore {
    game: SharpGame,
    pairs: Vec<(State, State)>,
    index: SharpIndex,
}

fn folklore() -> &'static Folklore {
    static F: OnceLock<Folklore> = OnceLock::new();
    F.get_or_init(|| {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../samples/folklore.rel")).unwrap();
        let f = RelFile::parse(&src).unwrap();
        let variant = f.variant;
        let game = SharpGame::new(variant, 2);
        let exp = expand(&game, &f.into_candidate("folklore"), 2, 1);
        let index = SharpIndex::new(&exp, variant, UpToSpec::standard());
        Folklore {
            game,
            pairs: exp.pairs.clone(),
            index,
        }
    })
}

/// Whatever the justifier accepts, its certificate rebuilds.
pub fn justifications_replay(seed: u64) -> Result<(), String> {
    let f = folklore();
    let mut r = rng(seed);
    let i = r.gen_range(0..f.pairs.len());
    let (l, rt) = &f.pairs[i];
    let labels = f.game.labels(l);
    let Some(lab) = labels.choose(&mut r) else {
        return Ok(());
    };
    let (Some(mut l1), Some(mut r1)) = (f.game.apply(l, lab), f.game.apply(rt, lab)) else {
        return Ok(());
    };
    for _ in 0..r.gen_range(0..4) {
        if let Some(x) = f.game.tau(&l1) {
            l1 = x;
        }
        if let Some(x) = f.game.tau(&r1) {
            r1 = x;
        }
    }
    if let Some(j) = f.index.justify(&l1, &r1, r.gen_bool(0.3), Some(i)) {
        hit(5);
        let (a, b) = f.index.replay(&j).ok_or_else(|| format!("certificate {j} does not rebuild"))?;
        ensure(f.game.same(&a, &l1) && f.game.same(&b, &r1), || format!("certificate {j} rebuilds another pair"))?;
    }
    Ok(())
}

/// A distinguisher found at one bound level is still found one level up.
pub fn counterexample_monotone(seed: u64) -> Result<(), String> {
    let e1 = random_term(seed, 6);
    let e2 = random_term(seed.rotate_left(17), 6);
    let small = ctx_equiv_check(&e1, &e2, &CtxEqConfig::new(2, 60)).map_err(|e| e.to_string())?;
    if matches!(small, CtxVerdict::Distinguisher { .. }) {
        hit(6);
        let big = ctx_equiv_check(&e1, &e2, &CtxEqConfig::new(3, 60)).map_err(|e| e.to_string())?;
        ensure(matches!(big, CtxVerdict::Distinguisher { .. }), || format!("{e1} / {e2}: lost at size 3"))?;
    }
    if seed % 8 == 0 {
        let (s, t) = (State::running(Vec::new(), e1.clone()), State::running(Vec::new(), e2.clone()));
        let g1 = SharpGame::new(Variant::STANDARD, 1);
        if distinguish(&g1, &s, &t, 2, 20).is_some() {
            let g2 = SharpGame::new(Variant::STANDARD, 2);
            ensure(distinguish(&g2, &s, &t, 3, 20).is_some(), || format!("{e1} / {e2}: strategy lost"))?;
        }
    }
    Ok(())
}
