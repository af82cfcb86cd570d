//! First-order labeled transition systems over states `(Γ, e)`, in the
//! standard form and in the star form (value-context continuation tests
//! plus decomposition of captured contexts).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::contexts::{env_shape, Enumerator, Generation, Kind, MCtx, MECtx};
use crate::error::PlugError;
use crate::reduction::{classify_normal, red_hat, step, NormalClass, Step};
use crate::syntax::{least_fresh_prompt, Permutation, Prompt, Term};

/// An environment of values with an optional running term. A running value
/// is always moved into the environment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub env: Vec<Term>,
    pub running: Option<Term>,
}

impl State {
    pub fn new(mut env: Vec<Term>, running: Option<Term>) -> State {
        let running = match running {
            Some(t) if t.is_value() => {
                env.push(t);
                None
            }
            other => other,
        };
        State { env, running }
    }

    pub fn env_only(env: Vec<Term>) -> State {
        State { env, running: None }
    }

    pub fn running(env: Vec<Term>, e: Term) -> State {
        State::new(env, Some(e))
    }

    pub fn is_env_only(&self) -> bool {
        self.running.is_none()
    }

    pub fn env_prompts(&self) -> BTreeSet<Prompt> {
        let mut out = BTreeSet::new();
        for v in &self.env {
            v.visit_prompts(&mut |p| {
                out.insert(p);
            });
        }
        out
    }

    pub fn prompts(&self) -> BTreeSet<Prompt> {
        let mut out = self.env_prompts();
        if let Some(e) = &self.running {
            out.extend(e.prompts());
        }
        out
    }

    pub fn visit_prompts(&self, f: &mut impl FnMut(Prompt)) {
        for v in &self.env {
            v.visit_prompts(f);
        }
        if let Some(e) = &self.running {
            e.visit_prompts(f);
        }
    }

    pub fn apply_perm(&self, sigma: &Permutation) -> State {
        State {
            env: self.env.iter().map(|v| v.apply_perm(sigma)).collect(),
            running: self.running.as_ref().map(|e| e.apply_perm(sigma)),
        }
    }

    /// Renames prompts to `0, 1, ...` by order of first occurrence, and
    /// returns the renaming used.
    pub fn canonical_prompts(&self) -> (State, Permutation) {
        let mut order: BTreeMap<Prompt, Prompt> = BTreeMap::new();
        let mut next = 0u32;
        self.visit_prompts(&mut |p| {
            order.entry(p).or_insert_with(|| {
                let q = Prompt(next);
                next += 1;
                q
            });
        });
        let sigma = Permutation::complete(&order).expect("first-occurrence renaming is injective");
        (self.apply_perm(&sigma), sigma)
    }

    pub fn alpha_eq(&self, other: &State) -> bool {
        self.env.len() == other.env.len()
            && self.env.iter().zip(&other.env).all(|(a, b)| a.alpha_eq(b))
            && match (&self.running, &other.running) {
                (None, None) => true,
                (Some(a), Some(b)) => a.alpha_eq(b),
                _ => false,
            }
    }

    /// Alpha-canonical form with canonical prompt names.
    pub fn canonical(&self) -> State {
        let (s, _) = self.canonical_prompts();
        State {
            env: s.env.iter().map(Term::canonical).collect(),
            running: s.running.as_ref().map(Term::canonical),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.env.iter().all(Term::is_closed) && self.running.as_ref().is_none_or(Term::is_closed)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.env.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        if let Some(e) = &self.running {
            if !self.env.is_empty() {
                write!(f, " ")?;
            }
            write!(f, "| {e}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Tau,
    LamTest(usize, MCtx),
    ValFlag,
    CtxTestStd(usize, MCtx),
    CtxTestStar(usize, MCtx),
    PromptEq(usize, usize),
    NuPrompt,
    StuckTest(MECtx),
    Decomp(usize, usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::LamTest(i, c) => write!(f, "lam {i} {c}"),
            Label::ValFlag => write!(f, "val"),
            Label::CtxTestStd(i, c) => write!(f, "ctx {i} {c}"),
            Label::CtxTestStar(i, c) => write!(f, "ctx* {i} {c}"),
            Label::PromptEq(i, j) => write!(f, "peq {i} {j}"),
            Label::NuPrompt => write!(f, "nu"),
            Label::StuckTest(e) => write!(f, "stuck {e}"),
            Label::Decomp(i, j) => write!(f, "split {i} {j}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Variant {
    pub generation: Generation,
}

impl Variant {
    pub const STANDARD: Variant = Variant {
        generation: Generation::Standard,
    };
    pub const STAR: Variant = Variant {
        generation: Generation::Star,
    };

    /// Passive labels only exist in the star variant.
    pub fn is_passive(&self, l: &Label) -> bool {
        self.generation == Generation::Star
            && matches!(l, Label::CtxTestStar(..) | Label::ValFlag)
    }

    fn allows(&self, l: &Label) -> bool {
        let star = self.generation == Generation::Star;
        match l {
            Label::CtxTestStd(_, c) => !star && !c.uses_star(),
            Label::CtxTestStar(..) | Label::Decomp(..) => star,
            Label::LamTest(_, c) => star || !c.uses_star(),
            Label::StuckTest(e) => star || !e.uses_star(),
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NotApplicable {
    #[error("index {index} out of range for an environment of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("environment entry {index} is not a {expected}")]
    WrongKind { index: usize, expected: &'static str },
    #[error("the state has a running term")]
    NotEnvOnly,
    #[error("the state has no running term")]
    NoRunning,
    #[error("the running term is not control-stuck")]
    NotStuck,
    #[error("the running term is a normal form")]
    NoStep,
    #[error("prompts {0} and {1} differ")]
    PromptMismatch(usize, usize),
    #[error("no delimiter for the prompt in the continuation")]
    NoDelimiter,
    #[error("label not available in this variant")]
    WrongVariant,
    #[error("ill-formed context parameter: {0}")]
    Plug(#[from] PlugError),
}

fn entry(env: &[Term], i: usize) -> Result<&Term, NotApplicable> {
    if i == 0 || i > env.len() {
        Err(NotApplicable::IndexOutOfRange {
            index: i,
            size: env.len(),
        })
    } else {
        Ok(&env[i - 1])
    }
}

fn env_only(s: &State) -> Result<&[Term], NotApplicable> {
    if s.running.is_some() {
        Err(NotApplicable::NotEnvOnly)
    } else {
        Ok(&s.env)
    }
}

/// The (deterministic) internal step of a state, if any.
pub fn tau(s: &State) -> Option<State> {
    let e = s.running.as_ref()?;
    match step(e, &s.env_prompts()) {
        Step::Reduced(t, _) => Some(State::new(s.env.clone(), Some(t))),
        Step::Normal(_) => None,
    }
}

pub fn apply_label(s: &State, l: &Label, variant: Variant) -> Result<State, NotApplicable> {
    if !variant.allows(l) {
        return Err(NotApplicable::WrongVariant);
    }
    match l {
        Label::Tau => {
            if s.running.is_none() {
                return Err(NotApplicable::NoRunning);
            }
            tau(s).ok_or(NotApplicable::NoStep)
        }
        Label::LamTest(i, cv) => {
            let env = env_only(s)?;
            match entry(env, *i)? {
                Term::Lam(x, body) => {
                    let arg = cv.plug(env)?;
                    Ok(State::new(env.to_vec(), Some(body.subst(x, &arg))))
                }
                _ => Err(NotApplicable::WrongKind {
                    index: *i,
                    expected: "lambda",
                }),
            }
        }
        Label::ValFlag => {
            env_only(s)?;
            Ok(s.clone())
        }
        Label::CtxTestStd(i, c) | Label::CtxTestStar(i, c) => {
            let env = env_only(s)?;
            if matches!(l, Label::CtxTestStar(..)) && !c.is_value_ctx() {
                return Err(NotApplicable::WrongVariant);
            }
            match entry(env, *i)? {
                Term::Cont(e) => {
                    let arg = c.plug(env)?;
                    Ok(State::new(env.to_vec(), Some(e.plug(arg))))
                }
                _ => Err(NotApplicable::WrongKind {
                    index: *i,
                    expected: "continuation",
                }),
            }
        }
        Label::PromptEq(i, j) => {
            let env = env_only(s)?;
            match (entry(env, *i)?, entry(env, *j)?) {
                (Term::Prompt(p), Term::Prompt(q)) if p == q => Ok(s.clone()),
                (Term::Prompt(_), Term::Prompt(_)) => Err(NotApplicable::PromptMismatch(*i, *j)),
                (Term::Prompt(_), _) => Err(NotApplicable::WrongKind {
                    index: *j,
                    expected: "prompt",
                }),
                _ => Err(NotApplicable::WrongKind {
                    index: *i,
                    expected: "prompt",
                }),
            }
        }
        Label::NuPrompt => {
            let env = env_only(s)?;
            let p = least_fresh_prompt(&s.env_prompts());
            let mut env = env.to_vec();
            env.push(Term::Prompt(p));
            Ok(State::env_only(env))
        }
        Label::StuckTest(ed) => {
            let e = s.running.as_ref().ok_or(NotApplicable::NoRunning)?;
            match classify_normal(e) {
                Some(NormalClass::ControlStuck { .. }) => {
                    let t = ed.plug(e.clone(), &s.env)?;
                    Ok(State::new(s.env.clone(), Some(red_hat(&t, &s.env_prompts()))))
                }
                _ => Err(NotApplicable::NotStuck),
            }
        }
        Label::Decomp(i, j) => {
            let env = env_only(s)?;
            let e = match entry(env, *i)? {
                Term::Cont(e) => e,
                _ => {
                    return Err(NotApplicable::WrongKind {
                        index: *i,
                        expected: "continuation",
                    })
                }
            };
            let p = match entry(env, *j)? {
                Term::Prompt(p) => *p,
                _ => {
                    return Err(NotApplicable::WrongKind {
                        index: *j,
                        expected: "prompt",
                    })
                }
            };
            let (outer, inner) = e.split_at(p).ok_or(NotApplicable::NoDelimiter)?;
            let mut env = env.to_vec();
            env.push(Term::Cont(outer));
            env.push(Term::Cont(inner));
            Ok(State::env_only(env))
        }
    }
}

/// Every label whose parameters fit `ctx_size`, in a fixed order. Labels
/// are listed when their shape matches the state; applicability of
/// `peq` is left to the caller.
pub fn enumerate_labels(s: &State, ctx_size: usize, variant: Variant) -> Vec<Label> {
    let mut out = Vec::new();
    let mut en = Enumerator::new(variant.generation, env_shape(&s.env));
    match &s.running {
        Some(e) => match classify_normal(e) {
            None => out.push(Label::Tau),
            Some(NormalClass::ControlStuck { .. }) => {
                out.extend(en.up_to_e(ctx_size).into_iter().map(Label::StuckTest));
            }
            Some(_) => {}
        },
        None => {
            out.push(Label::ValFlag);
            out.push(Label::NuPrompt);
            let prompts: Vec<usize> = (1..=s.env.len())
                .filter(|i| matches!(s.env[i - 1], Term::Prompt(_)))
                .collect();
            for &i in &prompts {
                for &j in &prompts {
                    out.push(Label::PromptEq(i, j));
                }
            }
            let mut cvs = None;
            let mut cs = None;
            for i in 1..=s.env.len() {
                match &s.env[i - 1] {
                    Term::Lam(..) => {
                        let cvs = cvs.get_or_insert_with(|| en.up_to(Kind::Cv, ctx_size));
                        out.extend(cvs.iter().map(|c| Label::LamTest(i, c.clone())));
                    }
                    Term::Cont(_) => match variant.generation {
                        Generation::Standard => {
                            let cs = cs.get_or_insert_with(|| en.up_to(Kind::C, ctx_size));
                            out.extend(cs.iter().map(|c| Label::CtxTestStd(i, c.clone())));
                        }
                        Generation::Star => {
                            let cvs = cvs.get_or_insert_with(|| en.up_to(Kind::Cv, ctx_size));
                            out.extend(cvs.iter().map(|c| Label::CtxTestStar(i, c.clone())));
                            for &j in &prompts {
                                out.push(Label::Decomp(i, j));
                            }
                        }
                    },
                    _ => {}
                }
            }
        }
    }
    out
}

/// The deterministic τ-chain from `s`: `s` itself followed by at most
/// `fuel` successors. The flag tells whether the chain reached a state
/// without τ (as opposed to running out of fuel).
pub fn tau_chain(s: &State, fuel: usize) -> (Vec<State>, bool) {
    let mut out = vec![s.clone()];
    for _ in 0..fuel {
        match tau(out.last().unwrap()) {
            Some(n) => out.push(n),
            None => return (out, true),
        }
    }
    let done = tau(out.last().unwrap()).is_none();
    (out, done)
}

/// States reachable by τ* ℓ τ* using at most `fuel` τ-steps in total.
pub fn weak_apply(s: &State, l: &Label, fuel: usize, variant: Variant) -> Vec<State> {
    let (pre, _) = tau_chain(s, fuel);
    if *l == Label::Tau {
        return pre;
    }
    let mut out = Vec::new();
    for (k, st) in pre.iter().enumerate() {
        if let Ok(next) = apply_label(st, l, variant) {
            let (post, _) = tau_chain(&next, fuel - k);
            out.extend(post);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn normalization_moves_values() {
        let s = State::new(vec![], Some(t("(lam x x)")));
        assert!(s.is_env_only());
        assert_eq!(s.env.len(), 1);
    }

    #[test]
    fn prompt_equality() {
        let s = State::env_only(vec![Term::prompt(0), Term::prompt(0)]);
        assert_eq!(apply_label(&s, &Label::PromptEq(1, 2), Variant::STANDARD), Ok(s.clone()));
        let s2 = State::env_only(vec![Term::prompt(0), Term::prompt(1)]);
        assert!(apply_label(&s2, &Label::PromptEq(1, 2), Variant::STANDARD).is_err());
    }

    #[test]
    fn star_context_test_and_decomposition() {
        let g = State::env_only(vec![Term::prompt(0), t("(cont (reset (prompt 0) _))")]);
        let l = Label::CtxTestStar(2, MCtx::Idx(1));
        let s1 = apply_label(&g, &l, Variant::STAR).unwrap();
        assert_eq!(s1.running, Some(t("(reset (prompt 0) (prompt 0))")));
        let s2 = apply_label(&s1, &Label::Tau, Variant::STAR).unwrap();
        assert_eq!(s2.env.len(), 3);
        assert_eq!(s2.env[2], Term::prompt(0));

        let d = State::env_only(vec![Term::prompt(1), t("(cont _)")]);
        let d1 = apply_label(&d, &l, Variant::STAR).unwrap();
        assert_eq!(d1.env[2], Term::prompt(1));

        let split = apply_label(&g, &Label::Decomp(2, 1), Variant::STAR).unwrap();
        assert_eq!(split.env[2], t("(cont _)"));
        assert_eq!(split.env[3], t("(cont _)"));
        assert_eq!(
            apply_label(&d, &Label::Decomp(2, 1), Variant::STAR),
            Err(NotApplicable::NoDelimiter)
        );
    }

    #[test]
    fn nu_uses_least_fresh_prompt() {
        let s = State::env_only(vec![Term::prompt(0), Term::prompt(2)]);
        let s1 = apply_label(&s, &Label::NuPrompt, Variant::STANDARD).unwrap();
        assert_eq!(s1.env[2], Term::prompt(1));
    }

    #[test]
    fn stuck_test_captures_once() {
        let s = State::running(vec![Term::prompt(0)], t("(grab (prompt 0) k (k k))"));
        let e = MECtx::Delim(1, Box::new(MECtx::Hole));
        let s1 = apply_label(&s, &Label::StuckTest(e), Variant::STANDARD).unwrap();
        assert_eq!(s1.running, Some(t("((cont _) (cont _))")));
        let s2 = apply_label(&s, &Label::StuckTest(MECtx::Hole), Variant::STANDARD).unwrap();
        assert_eq!(s2, s);
    }

    #[test]
    fn label_enumeration() {
        let s = State::env_only(vec![t("(lam z z)")]);
        let ls = enumerate_labels(&s, 1, Variant::STANDARD);
        assert_eq!(
            ls,
            vec![Label::ValFlag, Label::NuPrompt, Label::LamTest(1, MCtx::Idx(1))]
        );
        let p = State::env_only(vec![Term::prompt(0)]);
        let lp = enumerate_labels(&p, 2, Variant::STANDARD);
        assert!(lp.contains(&Label::PromptEq(1, 1)) && lp.contains(&Label::NuPrompt));
        let st = State::running(vec![], t("(grab (prompt 0) k k)"));
        assert!(enumerate_labels(&st, 1, Variant::STANDARD).contains(&Label::StuckTest(MECtx::Hole)));
    }

    #[test]
    fn weak_transitions() {
        let s = State::running(vec![], t("((lam x x) (lam y y))"));
        assert!(weak_apply(&s, &Label::Tau, 5, Variant::STANDARD).contains(&s));
        let w = weak_apply(&s, &Label::ValFlag, 5, Variant::STANDARD);
        assert_eq!(w, vec![State::env_only(vec![t("(lam y y)")])]);
        let slow = State::running(vec![], t("((lam a ((lam b b) a)) ((lam c c) (lam y y)))"));
        assert!(weak_apply(&slow, &Label::ValFlag, 2, Variant::STANDARD).is_empty());
        assert_eq!(weak_apply(&slow, &Label::ValFlag, 3, Variant::STANDARD).len(), 1);
    }

    #[test]
    fn canonical_prompts_by_first_occurrence() {
        let s = State::env_only(vec![Term::prompt(7), t("(cont (reset (prompt 3) _))")]);
        let (c, _) = s.canonical_prompts();
        assert_eq!(c.env[0], Term::prompt(0));
        assert_eq!(c.env[1], t("(cont (reset (prompt 1) _))"));
    }
}
