//! The multi-prompt calculus as a bisimulation game, and a constructive
//! matcher for the up-to closure of a finite relation.
//!
//! A pair `(s, t)` is justified by a member `(Γ, e) R (Δ, f)` when both
//! sides are the member, with prompts renamed, seen through one shared
//! skeleton: a value context per environment entry and a context (or an
//! evaluation context around the member's running term) for the running
//! term. Skeleton holes point into the member's environment; in the star
//! variant, `(star i ·)` nodes plug the related continuations stored at
//! index `i`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use super::{Expanded, Game, Justifier, Rule, Technique, UpToSpec};
use crate::contexts::{Generation, MCtx, MECtx};
use crate::lts::{apply_label, enumerate_labels, tau, Label, State, Variant};
use crate::syntax::{least_fresh_prompt, EvalCtx, Permutation, Prompt, Term};

#[derive(Clone, Copy, Debug)]
pub struct SharpGame {
    pub variant: Variant,
    pub ctx_size: usize,
}

impl SharpGame {
    pub fn new(variant: Variant, ctx_size: usize) -> Self {
        SharpGame { variant, ctx_size }
    }
}

impl Game for SharpGame {
    type State = State;
    type Label = Label;

    fn labels(&self, s: &State) -> Vec<Label> {
        enumerate_labels(s, self.ctx_size, self.variant)
    }

    fn apply(&self, s: &State, l: &Label) -> Option<State> {
        apply_label(s, l, self.variant).ok()
    }

    fn tau(&self, s: &State) -> Option<State> {
        tau(s)
    }

    fn is_tau(&self, l: &Label) -> bool {
        *l == Label::Tau
    }

    fn is_passive(&self, l: &Label) -> bool {
        self.variant.is_passive(l)
    }

    fn canonical(&self, s: &State) -> State {
        s.canonical()
    }

    fn same(&self, a: &State, b: &State) -> bool {
        a.alpha_eq(b)
    }
}

/// Extends related environments with one fresh prompt on each side.
pub struct PromptCheck;

impl Rule<State> for PromptCheck {
    fn name(&self) -> &str {
        "prcheck"
    }

    fn apply(&self, l: &State, r: &State, _ctx_size: usize) -> Vec<(State, State)> {
        if !(l.is_env_only() && r.is_env_only()) {
            return Vec::new();
        }
        let grow = |s: &State| {
            let mut env = s.env.clone();
            env.push(Term::Prompt(least_fresh_prompt(&s.env_prompts())));
            State::env_only(env)
        };
        vec![(grow(l), grow(r))]
    }
}

// ---------------------------------------------------------------------------
// Hashing modulo bound names and prompt names

fn hash_term<'a>(t: &'a Term, stack: &mut Vec<&'a str>, h: &mut DefaultHasher) {
    match t {
        Term::Var(x) => match stack.iter().rposition(|y| *y == x.as_str()) {
            Some(i) => (0u8, stack.len() - i).hash(h),
            None => (1u8, x).hash(h),
        },
        Term::Lam(x, b) | Term::New(x, b) => {
            (if matches!(t, Term::Lam(..)) { 2u8 } else { 3u8 }).hash(h);
            stack.push(x);
            hash_term(b, stack, h);
            stack.pop();
        }
        Term::App(a, b) | Term::Reset(a, b) | Term::Throw(a, b) => {
            (match t {
                Term::App(..) => 4u8,
                Term::Reset(..) => 5,
                _ => 6,
            })
            .hash(h);
            hash_term(a, stack, h);
            hash_term(b, stack, h);
        }
        Term::Grab(d, x, b) => {
            7u8.hash(h);
            hash_term(d, stack, h);
            stack.push(x);
            hash_term(b, stack, h);
            stack.pop();
        }
        Term::Prompt(_) => 8u8.hash(h),
        Term::Cont(e) => {
            9u8.hash(h);
            hash_ctx(e, stack, h);
        }
    }
}

fn hash_ctx<'a>(e: &'a EvalCtx, stack: &mut Vec<&'a str>, h: &mut DefaultHasher) {
    match e {
        EvalCtx::Hole => 10u8.hash(h),
        EvalCtx::AppL(e, a) => {
            11u8.hash(h);
            hash_ctx(e, stack, h);
            hash_term(a, stack, h);
        }
        EvalCtx::AppR(v, e) => {
            12u8.hash(h);
            hash_term(v, stack, h);
            hash_ctx(e, stack, h);
        }
        EvalCtx::Delim(_, e) => {
            13u8.hash(h);
            hash_ctx(e, stack, h);
        }
    }
}

/// Hash invariant under renaming of bound variables and of prompts.
pub fn erased_hash(t: &Term) -> u64 {
    let mut h = DefaultHasher::new();
    hash_term(t, &mut Vec::new(), &mut h);
    h.finish()
}

fn eval_subterms<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    out.push(t);
    match t {
        Term::App(f, a) => {
            eval_subterms(f, out);
            if f.is_value() {
                eval_subterms(a, out);
            }
        }
        Term::Reset(_, b) => eval_subterms(b, out),
        _ => {}
    }
}

fn value_subterms<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    if matches!(t, Term::Lam(..) | Term::Cont(_)) {
        out.push(t);
    }
    match t {
        Term::Var(_) | Term::Prompt(_) => {}
        Term::Lam(_, b) | Term::New(_, b) => value_subterms(b, out),
        Term::App(a, b) | Term::Reset(a, b) | Term::Throw(a, b) | Term::Grab(a, _, b) => {
            value_subterms(a, out);
            value_subterms(b, out);
        }
        Term::Cont(e) => {
            let mut c = e;
            loop {
                match c {
                    EvalCtx::Hole => break,
                    EvalCtx::AppL(i, a) => {
                        value_subterms(a, out);
                        c = i;
                    }
                    EvalCtx::AppR(v, i) => {
                        value_subterms(v, out);
                        c = i;
                    }
                    EvalCtx::Delim(_, i) => c = i,
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Equality modulo a prompt map and bound names

/// Target prompt to member prompt.
pub type PromptMap = BTreeMap<Prompt, Prompt>;

fn var_eq(x: &str, bt: &[&str], y: &str, bm: &[&str]) -> bool {
    match (
        bt.iter().rposition(|n| *n == x),
        bm.iter().rposition(|n| *n == y),
    ) {
        (Some(i), Some(j)) => bt.len() - i == bm.len() - j,
        (None, None) => x == y,
        _ => false,
    }
}

fn eqv<'a>(
    t: &'a Term,
    m: &'a Term,
    s: &PromptMap,
    bt: &mut Vec<&'a str>,
    bm: &mut Vec<&'a str>,
) -> bool {
    match (t, m) {
        (Term::Var(x), Term::Var(y)) => var_eq(x, bt, y, bm),
        (Term::Lam(x, a), Term::Lam(y, b)) | (Term::New(x, a), Term::New(y, b)) => {
            bt.push(x);
            bm.push(y);
            let r = eqv(a, b, s, bt, bm);
            bt.pop();
            bm.pop();
            r
        }
        (Term::App(a1, a2), Term::App(b1, b2))
        | (Term::Reset(a1, a2), Term::Reset(b1, b2))
        | (Term::Throw(a1, a2), Term::Throw(b1, b2)) => {
            eqv(a1, b1, s, bt, bm) && eqv(a2, b2, s, bt, bm)
        }
        (Term::Grab(d1, x, a), Term::Grab(d2, y, b)) => {
            if !eqv(d1, d2, s, bt, bm) {
                return false;
            }
            bt.push(x);
            bm.push(y);
            let r = eqv(a, b, s, bt, bm);
            bt.pop();
            bm.pop();
            r
        }
        (Term::Prompt(p), Term::Prompt(q)) => s.get(p) == Some(q),
        (Term::Cont(e1), Term::Cont(e2)) => eqc(e1, e2, s, bt, bm),
        _ => false,
    }
}

fn eqc<'a>(
    t: &'a EvalCtx,
    m: &'a EvalCtx,
    s: &PromptMap,
    bt: &mut Vec<&'a str>,
    bm: &mut Vec<&'a str>,
) -> bool {
    match (t, m) {
        (EvalCtx::Hole, EvalCtx::Hole) => true,
        (EvalCtx::AppL(e1, a), EvalCtx::AppL(e2, b)) => {
            eqc(e1, e2, s, bt, bm) && eqv(a, b, s, bt, bm)
        }
        (EvalCtx::AppR(a, e1), EvalCtx::AppR(b, e2)) => {
            eqv(a, b, s, bt, bm) && eqc(e1, e2, s, bt, bm)
        }
        (EvalCtx::Delim(p, e1), EvalCtx::Delim(q, e2)) => {
            s.get(p) == Some(q) && eqc(e1, e2, s, bt, bm)
        }
        _ => false,
    }
}

fn closed_eq(t: &Term, m: &Term, s: &PromptMap) -> bool {
    eqv(t, m, s, &mut Vec::new(), &mut Vec::new())
}

/// `t = e'[x]` with `e'` equal to the closed context `e`: returns `x`.
fn strip<'t>(t: &'t Term, e: &EvalCtx, s: &PromptMap) -> Option<&'t Term> {
    match e {
        EvalCtx::Hole => Some(t),
        EvalCtx::AppL(e1, a) => match t {
            Term::App(f, x) if closed_eq(x, a, s) => strip(f, e1, s),
            _ => None,
        },
        EvalCtx::AppR(v, e1) => match t {
            Term::App(f, x) if closed_eq(f, v, s) => strip(x, e1, s),
            _ => None,
        },
        EvalCtx::Delim(p, e1) => match t {
            Term::Reset(d, b) => match &**d {
                Term::Prompt(q) if s.get(q) == Some(p) => strip(b, e1, s),
                _ => None,
            },
            _ => None,
        },
    }
}

fn strip_ctx<'t>(t: &'t EvalCtx, e: &EvalCtx, s: &PromptMap) -> Option<&'t EvalCtx> {
    match (e, t) {
        (EvalCtx::Hole, _) => Some(t),
        (EvalCtx::AppL(e1, a), EvalCtx::AppL(t1, x)) if closed_eq(x, a, s) => strip_ctx(t1, e1, s),
        (EvalCtx::AppR(v, e1), EvalCtx::AppR(f, t1)) if closed_eq(f, v, s) => strip_ctx(t1, e1, s),
        (EvalCtx::Delim(p, e1), EvalCtx::Delim(q, t1)) if s.get(q) == Some(p) => {
            strip_ctx(t1, e1, s)
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Skeletons

/// How the running term of a justified pair is obtained from the member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunSkel {
    /// Neither the pair nor the member has a running term.
    None,
    /// The running terms are the member's, unchanged.
    Same,
    /// A context over an environment-only member.
    Ctx(MCtx),
    /// An evaluation context around the member's running term.
    Eval(MECtx),
}

impl fmt::Display for RunSkel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunSkel::None => write!(f, "-"),
            RunSkel::Same => write!(f, "same"),
            RunSkel::Ctx(c) => write!(f, "{c}"),
            RunSkel::Eval(e) => write!(f, "{e}"),
        }
    }
}

struct Matcher<'a> {
    ml: &'a State,
    mr: &'a State,
    sl: &'a PromptMap,
    sr: &'a PromptMap,
    conts: Vec<(usize, &'a EvalCtx, &'a EvalCtx)>,
    prompts: Vec<(usize, Prompt, Prompt)>,
}

impl<'a> Matcher<'a> {
    fn new(
        ml: &'a State,
        mr: &'a State,
        sl: &'a PromptMap,
        sr: &'a PromptMap,
        star: bool,
    ) -> Self {
        let mut conts = Vec::new();
        let mut prompts = Vec::new();
        for (i, (a, b)) in ml.env.iter().zip(&mr.env).enumerate() {
            match (a, b) {
                (Term::Cont(x), Term::Cont(y)) if star && !(x.is_hole() && y.is_hole()) => {
                    conts.push((i + 1, x, y))
                }
                (Term::Prompt(p), Term::Prompt(q)) => prompts.push((i + 1, *p, *q)),
                _ => {}
            }
        }
        Matcher {
            ml,
            mr,
            sl,
            sr,
            conts,
            prompts,
        }
    }

    fn delim_index(&self, p: Prompt, q: Prompt) -> Option<usize> {
        let (mp, mq) = (self.sl.get(&p)?, self.sr.get(&q)?);
        self.prompts
            .iter()
            .find(|(_, a, b)| a == mp && b == mq)
            .map(|(i, _, _)| *i)
    }

    fn idx(&self, tl: &Term, tr: &Term) -> Option<usize> {
        (0..self.ml.env.len().min(self.mr.env.len()))
            .find(|&j| closed_eq(tl, &self.ml.env[j], self.sl) && closed_eq(tr, &self.mr.env[j], self.sr))
            .map(|j| j + 1)
    }

    fn c<'t>(
        &self,
        tl: &'t Term,
        tr: &'t Term,
        bl: &mut Vec<&'t str>,
        br: &mut Vec<&'t str>,
    ) -> Option<MCtx> {
        if tl.is_value() && tr.is_value() {
            if let Some(j) = self.idx(tl, tr) {
                return Some(MCtx::Idx(j));
            }
        }
        if let Some(c) = self.c_struct(tl, tr, bl, br) {
            return Some(c);
        }
        for &(i, el, er) in &self.conts {
            if let (Some(x), Some(y)) = (strip(tl, el, self.sl), strip(tr, er, self.sr)) {
                if let Some(c) = self.c(x, y, bl, br) {
                    return Some(MCtx::Star(i, Box::new(c)));
                }
            }
        }
        None
    }

    fn under<'t>(
        &self,
        x: &'t str,
        y: &'t str,
        a: &'t Term,
        b: &'t Term,
        bl: &mut Vec<&'t str>,
        br: &mut Vec<&'t str>,
    ) -> Option<MCtx> {
        bl.push(x);
        br.push(y);
        let r = self.c(a, b, bl, br);
        bl.pop();
        br.pop();
        r
    }

    fn c_struct<'t>(
        &self,
        tl: &'t Term,
        tr: &'t Term,
        bl: &mut Vec<&'t str>,
        br: &mut Vec<&'t str>,
    ) -> Option<MCtx> {
        match (tl, tr) {
            (Term::Var(x), Term::Var(y)) => {
                let bound = bl.iter().any(|n| *n == x.as_str());
                (bound && var_eq(x, bl, y, br)).then(|| MCtx::Var(x.clone()))
            }
            (Term::Lam(x, a), Term::Lam(y, b)) => {
                Some(MCtx::Lam(x.clone(), Box::new(self.under(x, y, a, b, bl, br)?)))
            }
            (Term::New(x, a), Term::New(y, b)) => {
                Some(MCtx::New(x.clone(), Box::new(self.under(x, y, a, b, bl, br)?)))
            }
            (Term::App(a1, a2), Term::App(b1, b2)) => Some(MCtx::App(
                Box::new(self.c(a1, b1, bl, br)?),
                Box::new(self.c(a2, b2, bl, br)?),
            )),
            (Term::Reset(a1, a2), Term::Reset(b1, b2)) => Some(MCtx::Reset(
                Box::new(self.c(a1, b1, bl, br)?),
                Box::new(self.c(a2, b2, bl, br)?),
            )),
            (Term::Throw(a1, a2), Term::Throw(b1, b2)) => Some(MCtx::Throw(
                Box::new(self.c(a1, b1, bl, br)?),
                Box::new(self.c(a2, b2, bl, br)?),
            )),
            (Term::Grab(d1, x, a), Term::Grab(d2, y, b)) => {
                let d = self.c(d1, d2, bl, br)?;
                let body = self.under(x, y, a, b, bl, br)?;
                Some(MCtx::Grab(Box::new(d), x.clone(), Box::new(body)))
            }
            (Term::Cont(e1), Term::Cont(e2)) => Some(MCtx::Cont(Box::new(self.ce(e1, e2, bl, br)?))),
            _ => None,
        }
    }

    /// Skeleton of a continuation value; its hole is the continuation's.
    fn ce<'t>(
        &self,
        tl: &'t EvalCtx,
        tr: &'t EvalCtx,
        bl: &mut Vec<&'t str>,
        br: &mut Vec<&'t str>,
    ) -> Option<MECtx> {
        let structural = match (tl, tr) {
            (EvalCtx::Hole, EvalCtx::Hole) => Some(MECtx::Hole),
            (EvalCtx::AppL(e1, a), EvalCtx::AppL(e2, b)) => (|| {
                Some(MECtx::AppL(
                    Box::new(self.ce(e1, e2, bl, br)?),
                    Box::new(self.c(a, b, bl, br)?),
                ))
            })(),
            (EvalCtx::AppR(a, e1), EvalCtx::AppR(b, e2)) => (|| {
                Some(MECtx::AppR(
                    Box::new(self.c(a, b, bl, br)?),
                    Box::new(self.ce(e1, e2, bl, br)?),
                ))
            })(),
            (EvalCtx::Delim(p, e1), EvalCtx::Delim(q, e2)) => (|| {
                let i = self.delim_index(*p, *q)?;
                Some(MECtx::Delim(i, Box::new(self.ce(e1, e2, bl, br)?)))
            })(),
            _ => None,
        };
        if structural.is_some() {
            return structural;
        }
        for &(i, el, er) in &self.conts {
            if let (Some(x), Some(y)) = (strip_ctx(tl, el, self.sl), strip_ctx(tr, er, self.sr)) {
                if let Some(c) = self.ce(x, y, bl, br) {
                    return Some(MECtx::Star(i, Box::new(c)));
                }
            }
        }
        None
    }

    /// Evaluation skeleton around the member's running terms.
    fn e(&self, tl: &Term, tr: &Term) -> Option<MECtx> {
        let (ml, mr) = (self.ml.running.as_ref()?, self.mr.running.as_ref()?);
        if closed_eq(tl, ml, self.sl) && closed_eq(tr, mr, self.sr) {
            return Some(MECtx::Hole);
        }
        let structural = match (tl, tr) {
            (Term::App(f, a), Term::App(g, b)) => {
                let left = self.e(f, g).and_then(|e| {
                    let c = self.c(a, b, &mut Vec::new(), &mut Vec::new())?;
                    Some(MECtx::AppL(Box::new(e), Box::new(c)))
                });
                left.or_else(|| {
                    if !(f.is_value() && g.is_value()) {
                        return None;
                    }
                    let e = self.e(a, b)?;
                    let v = self.c(f, g, &mut Vec::new(), &mut Vec::new())?;
                    Some(MECtx::AppR(Box::new(v), Box::new(e)))
                })
            }
            (Term::Reset(d1, a), Term::Reset(d2, b)) => match (&**d1, &**d2) {
                (Term::Prompt(p), Term::Prompt(q)) => self
                    .delim_index(*p, *q)
                    .and_then(|i| Some(MECtx::Delim(i, Box::new(self.e(a, b)?)))),
                _ => None,
            },
            _ => None,
        };
        if structural.is_some() {
            return structural;
        }
        for &(i, el, er) in &self.conts {
            if let (Some(x), Some(y)) = (strip(tl, el, self.sl), strip(tr, er, self.sr)) {
                if let Some(e) = self.e(x, y) {
                    return Some(MECtx::Star(i, Box::new(e)));
                }
            }
        }
        None
    }

    fn full(&self, tl: &State, tr: &State) -> Option<(Vec<MCtx>, RunSkel)> {
        let mut env = Vec::with_capacity(tl.env.len());
        for (a, b) in tl.env.iter().zip(&tr.env) {
            env.push(self.c(a, b, &mut Vec::new(), &mut Vec::new())?);
        }
        let run = match (&tl.running, &tr.running) {
            (None, None) if self.ml.is_env_only() && self.mr.is_env_only() => RunSkel::None,
            (Some(a), Some(b)) if self.ml.is_env_only() && self.mr.is_env_only() => {
                RunSkel::Ctx(self.c(a, b, &mut Vec::new(), &mut Vec::new())?)
            }
            (Some(a), Some(b)) if !self.ml.is_env_only() && !self.mr.is_env_only() => {
                RunSkel::Eval(self.e(a, b)?)
            }
            _ => self.same_running(tl, tr)?,
        };
        Some((env, run))
    }

    fn same_running(&self, tl: &State, tr: &State) -> Option<RunSkel> {
        let ok = |t: &Option<Term>, m: &Option<Term>, s: &PromptMap| match (t, m) {
            (None, None) => true,
            (Some(a), Some(b)) => closed_eq(a, b, s),
            _ => false,
        };
        (ok(&tl.running, &self.ml.running, self.sl) && ok(&tr.running, &self.mr.running, self.sr))
            .then_some(RunSkel::Same)
    }

    /// Only renaming and dropping of environment entries.
    fn strong(&self, tl: &State, tr: &State) -> Option<(Vec<MCtx>, RunSkel)> {
        let run = self.same_running(tl, tr)?;
        let n = self.ml.env.len().min(self.mr.env.len());
        let mut next = 0;
        let mut env = Vec::with_capacity(tl.env.len());
        for (a, b) in tl.env.iter().zip(&tr.env) {
            let j = (next..n).find(|&j| {
                closed_eq(a, &self.ml.env[j], self.sl) && closed_eq(b, &self.mr.env[j], self.sr)
            })?;
            env.push(MCtx::Idx(j + 1));
            next = j + 1;
        }
        Some((env, run))
    }
}

trait HoleTest {
    fn is_hole(&self) -> bool;
}

impl HoleTest for EvalCtx {
    fn is_hole(&self) -> bool {
        matches!(self, EvalCtx::Hole)
    }
}

fn first_occurrence(s: &State) -> Vec<Prompt> {
    let mut out = Vec::new();
    s.visit_prompts(&mut |p| {
        if !out.contains(&p) {
            out.push(p);
        }
    });
    out
}

/// Injective maps from `from` into `to`, the order-aligned one first.
fn injections(from: &[Prompt], to: &[Prompt], limit: usize) -> Vec<PromptMap> {
    fn go(
        from: &[Prompt],
        to: &[Prompt],
        used: &mut Vec<bool>,
        cur: &mut PromptMap,
        out: &mut Vec<PromptMap>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let Some((p, rest)) = from.split_first() else {
            out.push(cur.clone());
            return;
        };
        for (k, q) in to.iter().enumerate() {
            if !used[k] {
                used[k] = true;
                cur.insert(*p, *q);
                go(rest, to, used, cur, out, limit);
                cur.remove(p);
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    if from.len() <= to.len() {
        go(from, to, &mut vec![false; to.len()], &mut PromptMap::new(), &mut out, limit);
    }
    out
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharpJust {
    pub member: usize,
    pub sigma_l: PromptMap,
    pub sigma_r: PromptMap,
    pub env: Vec<MCtx>,
    pub run: RunSkel,
    pub techniques: BTreeSet<Technique>,
}

impl fmt::Display for SharpJust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let techs: Vec<String> = self.techniques.iter().map(|t| t.to_string()).collect();
        write!(f, "member {} by {{{}}}: env [", self.member, techs.join(", "))?;
        for (i, c) in self.env.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "] run {}", self.run)
    }
}

/// Rebuilds one side of a justified pair from the member state.
pub fn rebuild(member: &State, sigma: &PromptMap, env: &[MCtx], run: &RunSkel) -> Option<State> {
    let inverse: BTreeMap<Prompt, Prompt> = sigma.iter().map(|(t, m)| (*m, *t)).collect();
    let pi = Permutation::complete(&inverse)?;
    let m = member.apply_perm(&pi);
    let env_out = env
        .iter()
        .map(|c| c.plug(&m.env).ok())
        .collect::<Option<Vec<_>>>()?;
    let running = match run {
        RunSkel::None => None,
        RunSkel::Same => m.running.clone(),
        RunSkel::Ctx(c) => Some(c.plug(&m.env).ok()?),
        RunSkel::Eval(e) => Some(e.plug(m.running.clone()?, &m.env).ok()?),
    };
    Some(State::new(env_out, running))
}

fn is_identity(s: &PromptMap) -> bool {
    s.iter().all(|(a, b)| a == b)
}

fn classify(
    generation: Generation,
    sl: &PromptMap,
    sr: &PromptMap,
    env: &[MCtx],
    run: &RunSkel,
    member_env: usize,
    member_running: bool,
) -> BTreeSet<Technique> {
    let mut out = BTreeSet::new();
    if !is_identity(sl) || !is_identity(sr) {
        out.insert(Technique::Perm);
    }
    let mut last = 0;
    let mut prefix = 0;
    for c in env {
        match c {
            MCtx::Idx(j) if *j > last => {
                last = *j;
                prefix += 1;
            }
            _ => break,
        }
    }
    if prefix < member_env {
        out.insert(Technique::Weak);
    }
    let built = env.len() > prefix;
    let ctx = match run {
        RunSkel::Ctx(_) => true,
        RunSkel::Eval(e) => *e != MECtx::Hole,
        RunSkel::None | RunSkel::Same => false,
    };
    match generation {
        Generation::Standard => {
            if built {
                out.insert(Technique::Str);
            }
            match run {
                RunSkel::Ctx(_) => {
                    out.insert(Technique::UtCtxV);
                }
                RunSkel::Eval(e) if *e != MECtx::Hole => {
                    out.insert(Technique::UtCtx);
                }
                _ => {}
            }
        }
        Generation::Star => {
            if built || ctx {
                out.insert(if member_running {
                    Technique::UtrCtx
                } else {
                    Technique::UtrCtxV
                });
            }
        }
    }
    out
}

/// Indexes an expanded relation for [`Justifier`] queries.
pub struct SharpIndex {
    pairs: Vec<(State, State)>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    generation: Generation,
    spec: UpToSpec,
    by_running: HashMap<u64, Vec<usize>>,
    by_value: HashMap<u64, Vec<usize>>,
    small_env_only: Vec<usize>,
    max_candidates: usize,
}

impl SharpIndex {
    pub fn new(exp: &Expanded<State>, variant: Variant, spec: UpToSpec) -> Self {
        let n = exp.pairs.len();
        let mut children = vec![Vec::new(); n];
        for (i, p) in exp.parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut by_running: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut by_value: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut env_only = Vec::new();
        for (i, (l, _)) in exp.pairs.iter().enumerate() {
            match &l.running {
                Some(e) => by_running.entry(erased_hash(e)).or_default().push(i),
                None => {
                    env_only.push(i);
                    let mut seen = HashSet::new();
                    for v in &l.env {
                        if matches!(v, Term::Prompt(_)) {
                            continue;
                        }
                        let h = erased_hash(v);
                        if seen.insert(h) {
                            by_value.entry(h).or_default().push(i);
                        }
                    }
                }
            }
        }
        env_only.sort_by_key(|&i| (exp.pairs[i].0.env.len(), i));
        env_only.truncate(4);
        SharpIndex {
            pairs: exp.pairs.clone(),
            parent: exp.parent.clone(),
            children,
            generation: variant.generation,
            spec,
            by_running,
            by_value,
            small_env_only: env_only,
            max_candidates: 400,
        }
    }

    pub fn pair(&self, i: usize) -> &(State, State) {
        &self.pairs[i]
    }

    fn candidates(&self, l: &State, hint: Option<usize>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut push = |i: usize, out: &mut Vec<usize>| {
            if seen.insert(i) {
                out.push(i);
            }
        };
        if let Some(h) = hint {
            push(h, &mut out);
            for &c in &self.children[h] {
                push(c, &mut out);
            }
            if let Some(p) = self.parent[h] {
                push(p, &mut out);
            }
        }
        if let Some(e) = &l.running {
            let mut subs = Vec::new();
            eval_subterms(e, &mut subs);
            for s in subs {
                if let Some(ms) = self.by_running.get(&erased_hash(s)) {
                    for &m in ms {
                        push(m, &mut out);
                    }
                }
            }
        }
        let mut vals = Vec::new();
        for v in &l.env {
            value_subterms(v, &mut vals);
        }
        if let Some(e) = &l.running {
            value_subterms(e, &mut vals);
        }
        let mut hashes = Vec::new();
        for v in vals {
            let h = erased_hash(v);
            if !hashes.contains(&h) {
                hashes.push(h);
            }
        }
        for h in hashes {
            if let Some(ms) = self.by_value.get(&h) {
                for &m in ms {
                    push(m, &mut out);
                }
            }
        }
        for &m in &self.small_env_only {
            push(m, &mut out);
        }
        out.truncate(self.max_candidates);
        out
    }

    fn try_member(&self, m: usize, l: &State, r: &State, strong_only: bool) -> Option<SharpJust> {
        let (ml, mr) = &self.pairs[m];
        if l.env.len() != r.env.len() {
            return None;
        }
        if strong_only && (l.env.len() > ml.env.len() || l.running.is_some() != ml.running.is_some())
        {
            return None;
        }
        if ml.running.is_some() && l.running.is_none() {
            return None;
        }
        let (ptl, ptr) = (first_occurrence(l), first_occurrence(r));
        let (pml, pmr) = (first_occurrence(ml), first_occurrence(mr));
        let sls = injections(&ptl, &pml, 24);
        let srs = injections(&ptr, &pmr, 24);
        for sl in &sls {
            for sr in &srs {
                let mt = Matcher::new(ml, mr, sl, sr, self.generation == Generation::Star);
                let res = if strong_only { mt.strong(l, r) } else { mt.full(l, r) };
                if let Some((env, run)) = res {
                    let techniques = classify(
                        self.generation,
                        sl,
                        sr,
                        &env,
                        &run,
                        ml.env.len(),
                        ml.running.is_some(),
                    );
                    if self.spec.permits(&techniques, strong_only) {
                        return Some(SharpJust {
                            member: m,
                            sigma_l: sl.clone(),
                            sigma_r: sr.clone(),
                            env,
                            run,
                            techniques,
                        });
                    }
                }
            }
        }
        None
    }
}

impl Justifier<SharpGame> for SharpIndex {
    type Just = SharpJust;

    fn justify(&self, l: &State, r: &State, strong_only: bool, hint: Option<usize>) -> Option<SharpJust> {
        self.candidates(l, hint)
            .into_iter()
            .find_map(|m| self.try_member(m, l, r, strong_only))
    }

    fn replay(&self, j: &SharpJust) -> Option<(State, State)> {
        let (ml, mr) = self.pairs.get(j.member)?;
        Some((
            rebuild(ml, &j.sigma_l, &j.env, &j.run)?,
            rebuild(mr, &j.sigma_r, &j.env, &j.run)?,
        ))
    }

    fn techniques(&self, j: &SharpJust) -> BTreeSet<Technique> {
        j.techniques.clone()
    }
}

/// The common-skeleton decomposition of two states against a single
/// member, as used by the justifier.
pub fn anti_unify(
    member: &(State, State),
    s: &State,
    t: &State,
    generation: Generation,
) -> Option<(Vec<MCtx>, RunSkel, PromptMap, PromptMap)> {
    let (ml, mr) = member;
    let sls = injections(&first_occurrence(s), &first_occurrence(ml), 24);
    let srs = injections(&first_occurrence(t), &first_occurrence(mr), 24);
    for sl in &sls {
        for sr in &srs {
            let mt = Matcher::new(ml, mr, sl, sr, generation == Generation::Star);
            if s.env.len() == t.env.len() {
                if let Some((env, run)) = mt.full(s, t) {
                    return Some((env, run, sl.clone(), sr.clone()));
                }
            }
        }
    }
    None
}
