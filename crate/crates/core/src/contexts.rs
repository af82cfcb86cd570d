//! Promptless multi-hole contexts, their plugging, and bounded enumeration.
//!
//! Holes `#i` (1-based) are filled with environment values. A delimiter in
//! a context is always `(reset #i ...)` with `#i` a prompt of the
//! environment, and `(star i C)` plugs `C` into the continuation stored at
//! index `i` (star generation only).

use std::collections::HashMap;
use std::fmt;

use crate::error::{PlugError, SyntaxError};
use crate::parse::{ident, read_one, term_of_sexp, SExp};
use crate::stdlib;
use crate::syntax::{EvalCtx, Name, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generation {
    Standard,
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MCtx {
    Var(Name),
    Lam(Name, Box<MCtx>),
    Cont(Box<MECtx>),
    Idx(usize),
    App(Box<MCtx>, Box<MCtx>),
    New(Name, Box<MCtx>),
    Reset(Box<MCtx>, Box<MCtx>),
    Grab(Box<MCtx>, Name, Box<MCtx>),
    Throw(Box<MCtx>, Box<MCtx>),
    Star(usize, Box<MCtx>),
}

/// Multi-hole evaluation contexts: the unindexed hole `_` is in evaluation
/// position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MECtx {
    Hole,
    AppL(Box<MECtx>, Box<MCtx>),
    AppR(Box<MCtx>, Box<MECtx>),
    Delim(usize, Box<MECtx>),
    Star(usize, Box<MECtx>),
}

/// What an environment slot holds, as far as context formation cares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Prompt,
    Cont,
    Other,
}

pub fn shape_of(v: &Term) -> Shape {
    match v {
        Term::Prompt(_) => Shape::Prompt,
        Term::Cont(_) => Shape::Cont,
        _ => Shape::Other,
    }
}

pub fn env_shape(env: &[Term]) -> Vec<Shape> {
    env.iter().map(shape_of).collect()
}

fn slot(env: &[Term], i: usize) -> Result<&Term, PlugError> {
    if i == 0 || i > env.len() {
        Err(PlugError::IndexOutOfRange {
            index: i,
            size: env.len(),
        })
    } else {
        Ok(&env[i - 1])
    }
}

fn cont_slot(env: &[Term], i: usize) -> Result<&EvalCtx, PlugError> {
    match slot(env, i)? {
        Term::Cont(e) => Ok(e),
        other => Err(PlugError::KindMismatch {
            index: i,
            expected: "continuation",
            found: other.to_string(),
        }),
    }
}

fn prompt_slot(env: &[Term], i: usize) -> Result<crate::syntax::Prompt, PlugError> {
    match slot(env, i)? {
        Term::Prompt(p) => Ok(*p),
        other => Err(PlugError::KindMismatch {
            index: i,
            expected: "prompt",
            found: other.to_string(),
        }),
    }
}

impl MCtx {
    pub fn is_value_ctx(&self) -> bool {
        matches!(self, MCtx::Var(_) | MCtx::Lam(..) | MCtx::Cont(_) | MCtx::Idx(_))
    }

    pub fn size(&self) -> usize {
        match self {
            MCtx::Var(_) | MCtx::Idx(_) => 1,
            MCtx::Lam(_, c) | MCtx::New(_, c) | MCtx::Star(_, c) => 1 + c.size(),
            MCtx::Cont(e) => 1 + e.size(),
            MCtx::App(a, b) | MCtx::Reset(a, b) | MCtx::Grab(a, _, b) | MCtx::Throw(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn uses_star(&self) -> bool {
        match self {
            MCtx::Var(_) | MCtx::Idx(_) => false,
            MCtx::Star(..) => true,
            MCtx::Lam(_, c) | MCtx::New(_, c) => c.uses_star(),
            MCtx::Cont(e) => e.uses_star(),
            MCtx::App(a, b) | MCtx::Reset(a, b) | MCtx::Grab(a, _, b) | MCtx::Throw(a, b) => {
                a.uses_star() || b.uses_star()
            }
        }
    }

    pub fn plug(&self, env: &[Term]) -> Result<Term, PlugError> {
        Ok(match self {
            MCtx::Var(x) => Term::Var(x.clone()),
            MCtx::Idx(i) => slot(env, *i)?.clone(),
            MCtx::Lam(x, c) => Term::Lam(x.clone(), Box::new(c.plug(env)?)),
            MCtx::New(x, c) => Term::New(x.clone(), Box::new(c.plug(env)?)),
            MCtx::Cont(e) => Term::Cont(e.plug_ctx(env)?),
            MCtx::App(a, b) => Term::App(Box::new(a.plug(env)?), Box::new(b.plug(env)?)),
            MCtx::Reset(a, b) => Term::Reset(Box::new(a.plug(env)?), Box::new(b.plug(env)?)),
            MCtx::Grab(a, x, b) => {
                Term::Grab(Box::new(a.plug(env)?), x.clone(), Box::new(b.plug(env)?))
            }
            MCtx::Throw(a, b) => Term::Throw(Box::new(a.plug(env)?), Box::new(b.plug(env)?)),
            MCtx::Star(i, c) => cont_slot(env, *i)?.plug(c.plug(env)?),
        })
    }

    /// Converts a promptless term into a hole-free context.
    pub fn from_term(t: &Term) -> Option<MCtx> {
        Some(match t {
            Term::Var(x) => MCtx::Var(x.clone()),
            Term::Lam(x, b) => MCtx::Lam(x.clone(), Box::new(MCtx::from_term(b)?)),
            Term::New(x, b) => MCtx::New(x.clone(), Box::new(MCtx::from_term(b)?)),
            Term::App(a, b) => MCtx::App(Box::new(MCtx::from_term(a)?), Box::new(MCtx::from_term(b)?)),
            Term::Reset(a, b) => {
                MCtx::Reset(Box::new(MCtx::from_term(a)?), Box::new(MCtx::from_term(b)?))
            }
            Term::Throw(a, b) => {
                MCtx::Throw(Box::new(MCtx::from_term(a)?), Box::new(MCtx::from_term(b)?))
            }
            Term::Grab(a, x, b) => MCtx::Grab(
                Box::new(MCtx::from_term(a)?),
                x.clone(),
                Box::new(MCtx::from_term(b)?),
            ),
            Term::Prompt(_) => return None,
            Term::Cont(e) => MCtx::Cont(Box::new(MECtx::from_eval_ctx(e)?)),
        })
    }

    pub fn max_index(&self) -> usize {
        match self {
            MCtx::Var(_) => 0,
            MCtx::Idx(i) => *i,
            MCtx::Star(i, c) => (*i).max(c.max_index()),
            MCtx::Lam(_, c) | MCtx::New(_, c) => c.max_index(),
            MCtx::Cont(e) => e.max_index(),
            MCtx::App(a, b) | MCtx::Reset(a, b) | MCtx::Grab(a, _, b) | MCtx::Throw(a, b) => {
                a.max_index().max(b.max_index())
            }
        }
    }
}

impl MECtx {
    pub fn size(&self) -> usize {
        match self {
            MECtx::Hole => 1,
            MECtx::AppL(e, c) => 1 + e.size() + c.size(),
            MECtx::AppR(c, e) => 1 + c.size() + e.size(),
            MECtx::Delim(_, e) | MECtx::Star(_, e) => 1 + e.size(),
        }
    }

    pub fn uses_star(&self) -> bool {
        match self {
            MECtx::Hole => false,
            MECtx::Star(..) => true,
            MECtx::AppL(e, c) | MECtx::AppR(c, e) => e.uses_star() || c.uses_star(),
            MECtx::Delim(_, e) => e.uses_star(),
        }
    }

    pub fn max_index(&self) -> usize {
        match self {
            MECtx::Hole => 0,
            MECtx::AppL(e, c) | MECtx::AppR(c, e) => e.max_index().max(c.max_index()),
            MECtx::Delim(i, e) | MECtx::Star(i, e) => (*i).max(e.max_index()),
        }
    }

    /// The evaluation context obtained by filling the indexed holes.
    pub fn plug_ctx(&self, env: &[Term]) -> Result<EvalCtx, PlugError> {
        Ok(match self {
            MECtx::Hole => EvalCtx::Hole,
            MECtx::AppL(e, c) => EvalCtx::AppL(Box::new(e.plug_ctx(env)?), Box::new(c.plug(env)?)),
            MECtx::AppR(c, e) => EvalCtx::AppR(Box::new(c.plug(env)?), Box::new(e.plug_ctx(env)?)),
            MECtx::Delim(i, e) => EvalCtx::Delim(prompt_slot(env, *i)?, Box::new(e.plug_ctx(env)?)),
            MECtx::Star(i, e) => cont_slot(env, *i)?.compose(&e.plug_ctx(env)?),
        })
    }

    /// `E♦[e, Γ]`
    pub fn plug(&self, e: Term, env: &[Term]) -> Result<Term, PlugError> {
        Ok(self.plug_ctx(env)?.plug(e))
    }

    pub fn from_eval_ctx(e: &EvalCtx) -> Option<MECtx> {
        Some(match e {
            EvalCtx::Hole => MECtx::Hole,
            EvalCtx::AppL(e, t) => {
                MECtx::AppL(Box::new(MECtx::from_eval_ctx(e)?), Box::new(MCtx::from_term(t)?))
            }
            EvalCtx::AppR(t, e) => {
                MECtx::AppR(Box::new(MCtx::from_term(t)?), Box::new(MECtx::from_eval_ctx(e)?))
            }
            EvalCtx::Delim(..) => return None,
        })
    }

    /// `self[inner]`
    pub fn compose(&self, inner: &MECtx) -> MECtx {
        match self {
            MECtx::Hole => inner.clone(),
            MECtx::AppL(e, c) => MECtx::AppL(Box::new(e.compose(inner)), c.clone()),
            MECtx::AppR(c, e) => MECtx::AppR(c.clone(), Box::new(e.compose(inner))),
            MECtx::Delim(i, e) => MECtx::Delim(*i, Box::new(e.compose(inner))),
            MECtx::Star(i, e) => MECtx::Star(*i, Box::new(e.compose(inner))),
        }
    }

    /// Embeds into the general grammar with `c` in the hole.
    pub fn fill(&self, c: MCtx) -> MCtx {
        match self {
            MECtx::Hole => c,
            MECtx::AppL(e, a) => MCtx::App(Box::new(e.fill(c)), a.clone()),
            MECtx::AppR(f, e) => MCtx::App(f.clone(), Box::new(e.fill(c))),
            MECtx::Delim(i, e) => MCtx::Reset(Box::new(MCtx::Idx(*i)), Box::new(e.fill(c))),
            MECtx::Star(i, e) => MCtx::Star(*i, Box::new(e.fill(c))),
        }
    }
}

impl fmt::Display for MCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MCtx::Var(x) => write!(f, "{x}"),
            MCtx::Idx(i) => write!(f, "#{i}"),
            MCtx::Lam(x, c) => write!(f, "(lam {x} {c})"),
            MCtx::New(x, c) => write!(f, "(new {x} {c})"),
            MCtx::Cont(e) => write!(f, "(cont {e})"),
            MCtx::App(a, b) => write!(f, "({a} {b})"),
            MCtx::Reset(a, b) => write!(f, "(reset {a} {b})"),
            MCtx::Grab(a, x, b) => write!(f, "(grab {a} {x} {b})"),
            MCtx::Throw(a, b) => write!(f, "(throw {a} {b})"),
            MCtx::Star(i, c) => write!(f, "(star {i} {c})"),
        }
    }
}

impl fmt::Display for MECtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MECtx::Hole => write!(f, "_"),
            MECtx::AppL(e, c) => write!(f, "({e} {c})"),
            MECtx::AppR(c, e) => write!(f, "({c} {e})"),
            MECtx::Delim(i, e) => write!(f, "(reset #{i} {e})"),
            MECtx::Star(i, e) => write!(f, "(star {i} {e})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax

const HOLE: &str = "\u{0}chole";

fn index_atom(s: &SExp) -> Option<usize> {
    s.atom()
        .and_then(|a| a.strip_prefix('#'))
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| *n >= 1)
}

fn mctx_of(s: &SExp) -> Result<MCtx, SyntaxError> {
    let err = |msg: &str| SyntaxError::at(s.pos(), msg);
    match s {
        SExp::Atom(a, _) => {
            if a == "_" {
                return Ok(MCtx::Var(HOLE.into()));
            }
            if let Some(i) = index_atom(s) {
                return Ok(MCtx::Idx(i));
            }
            if stdlib::KEYWORDS.contains(&a.as_str()) {
                let t = term_of_sexp(s)?;
                return MCtx::from_term(&t).ok_or_else(|| err("contexts cannot mention prompts"));
            }
            Ok(MCtx::Var(ident(s)?))
        }
        SExp::List(items, _) => {
            let head = items.first().ok_or_else(|| err("empty application"))?;
            let arg = |i: usize| items.get(i).ok_or_else(|| err("missing argument"));
            let check = |n: usize| {
                if items.len() == n {
                    Ok(())
                } else {
                    Err(err("wrong number of arguments"))
                }
            };
            let value = |c: MCtx| {
                if c.is_value_ctx() {
                    Ok(c)
                } else {
                    Err(err("expected a value context"))
                }
            };
            match head.atom() {
                Some("lam") => {
                    if items.len() < 3 {
                        return Err(err("`lam` expects binders and a body"));
                    }
                    let mut body = mctx_of(items.last().unwrap())?;
                    for b in items[1..items.len() - 1].iter().rev() {
                        body = MCtx::Lam(ident(b)?, Box::new(body));
                    }
                    Ok(body)
                }
                Some("new") => {
                    check(3)?;
                    Ok(MCtx::New(ident(arg(1)?)?, Box::new(mctx_of(arg(2)?)?)))
                }
                Some("reset") => {
                    check(3)?;
                    Ok(MCtx::Reset(
                        Box::new(value(mctx_of(arg(1)?)?)?),
                        Box::new(mctx_of(arg(2)?)?),
                    ))
                }
                Some("grab") => {
                    check(4)?;
                    Ok(MCtx::Grab(
                        Box::new(value(mctx_of(arg(1)?)?)?),
                        ident(arg(2)?)?,
                        Box::new(mctx_of(arg(3)?)?),
                    ))
                }
                Some("throw") => {
                    check(3)?;
                    Ok(MCtx::Throw(
                        Box::new(value(mctx_of(arg(1)?)?)?),
                        Box::new(mctx_of(arg(2)?)?),
                    ))
                }
                Some("star") => {
                    check(3)?;
                    let i = crate::parse::number(arg(1)?)? as usize;
                    if i == 0 {
                        return Err(err("star indices start at 1"));
                    }
                    Ok(MCtx::Star(i, Box::new(mctx_of(arg(2)?)?)))
                }
                Some("cont") => {
                    check(2)?;
                    let body = mctx_of(arg(1)?)?;
                    Ok(MCtx::Cont(Box::new(ectx_of_holed(&body).ok_or_else(|| {
                        err("a continuation context needs one hole `_` in evaluation position")
                    })?)))
                }
                Some("prompt") => Err(err("contexts cannot mention prompts")),
                Some(kw) if stdlib::KEYWORDS.contains(&kw) => {
                    let t = term_of_sexp(s)?;
                    MCtx::from_term(&t).ok_or_else(|| err("contexts cannot mention prompts"))
                }
                _ => {
                    let mut it = items.iter();
                    let mut acc = mctx_of(it.next().unwrap())?;
                    for a in it {
                        acc = MCtx::App(Box::new(acc), Box::new(mctx_of(a)?));
                    }
                    Ok(acc)
                }
            }
        }
    }
}

fn holes(c: &MCtx) -> usize {
    match c {
        MCtx::Var(x) => usize::from(x == HOLE),
        MCtx::Idx(_) | MCtx::Cont(_) => 0,
        MCtx::Lam(_, b) | MCtx::New(_, b) | MCtx::Star(_, b) => holes(b),
        MCtx::App(a, b) | MCtx::Reset(a, b) | MCtx::Grab(a, _, b) | MCtx::Throw(a, b) => {
            holes(a) + holes(b)
        }
    }
}

fn ectx_of_holed(c: &MCtx) -> Option<MECtx> {
    if holes(c) != 1 {
        return None;
    }
    fn go(c: &MCtx) -> Option<MECtx> {
        match c {
            MCtx::Var(x) if x == HOLE => Some(MECtx::Hole),
            MCtx::App(f, a) => {
                if holes(f) == 1 {
                    Some(MECtx::AppL(Box::new(go(f)?), a.clone()))
                } else if f.is_value_ctx() {
                    Some(MECtx::AppR(f.clone(), Box::new(go(a)?)))
                } else {
                    None
                }
            }
            MCtx::Reset(d, b) if holes(b) == 1 => match **d {
                MCtx::Idx(i) => Some(MECtx::Delim(i, Box::new(go(b)?))),
                _ => None,
            },
            MCtx::Star(i, b) => Some(MECtx::Star(*i, Box::new(go(b)?))),
            _ => None,
        }
    }
    go(c)
}

pub fn mctx_of_sexp(s: &SExp) -> Result<MCtx, SyntaxError> {
    let c = mctx_of(s)?;
    if holes(&c) != 0 {
        return Err(SyntaxError::at(s.pos(), "unexpected hole `_` in a context without one"));
    }
    Ok(c)
}

pub fn mectx_of_sexp(s: &SExp) -> Result<MECtx, SyntaxError> {
    let c = mctx_of(s)?;
    ectx_of_holed(&c)
        .ok_or_else(|| SyntaxError::at(s.pos(), "expected one hole `_` in evaluation position"))
}

pub fn parse_mctx(src: &str) -> Result<MCtx, SyntaxError> {
    mctx_of_sexp(&read_one(src)?)
}

pub fn parse_mectx(src: &str) -> Result<MECtx, SyntaxError> {
    mectx_of_sexp(&read_one(src)?)
}

// ---------------------------------------------------------------------------
// Enumeration

/// Binder names by nesting depth; enumerated contexts nest at most this
/// many binders and only mention bound variables.
pub const BINDERS: [&str; 2] = ["x", "y"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    C,
    Cv,
    Edia,
}

/// Exhaustive, deterministic enumeration of well-kinded contexts for a
/// given environment shape.
pub struct Enumerator {
    generation: Generation,
    shape: Vec<Shape>,
    memo_c: HashMap<(usize, usize, bool), Vec<MCtx>>,
    memo_e: HashMap<(usize, usize), Vec<MECtx>>,
}

impl Enumerator {
    pub fn new(generation: Generation, shape: Vec<Shape>) -> Self {
        Enumerator {
            generation,
            shape,
            memo_c: HashMap::new(),
            memo_e: HashMap::new(),
        }
    }

    pub fn for_env(generation: Generation, env: &[Term]) -> Self {
        Self::new(generation, env_shape(env))
    }

    fn indices(&self, want: Shape) -> Vec<usize> {
        (1..=self.shape.len())
            .filter(|i| self.shape[i - 1] == want)
            .collect()
    }

    /// Contexts (or value contexts) of exactly size `n` under `depth` binders.
    pub fn exact(&mut self, n: usize, depth: usize, value_only: bool) -> Vec<MCtx> {
        if let Some(v) = self.memo_c.get(&(n, depth, value_only)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        // value contexts
        if n == 1 {
            out.extend(BINDERS[..depth].iter().map(|b| MCtx::Var(b.to_string())));
            out.extend((1..=self.shape.len()).map(MCtx::Idx));
        }
        if depth < BINDERS.len() && n >= 2 {
            for b in self.exact(n - 1, depth + 1, false) {
                out.push(MCtx::Lam(BINDERS[depth].to_string(), Box::new(b)));
            }
        }
        if n >= 2 {
            for e in self.exact_e(n - 1, depth) {
                out.push(MCtx::Cont(Box::new(e)));
            }
        }
        if !value_only && n >= 3 {
            for a in 1..n - 1 {
                let b = n - 1 - a;
                let lefts = self.exact(a, depth, false);
                let rights = self.exact(b, depth, false);
                for l in &lefts {
                    for r in &rights {
                        out.push(MCtx::App(Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
                let vals = self.exact(a, depth, true);
                for l in &vals {
                    for r in &rights {
                        out.push(MCtx::Reset(Box::new(l.clone()), Box::new(r.clone())));
                    }
                    for r in &rights {
                        out.push(MCtx::Throw(Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
                if depth < BINDERS.len() {
                    let bodies = self.exact(b, depth + 1, false);
                    for l in &vals {
                        for r in &bodies {
                            out.push(MCtx::Grab(
                                Box::new(l.clone()),
                                BINDERS[depth].to_string(),
                                Box::new(r.clone()),
                            ));
                        }
                    }
                }
            }
        }
        if !value_only && n >= 2 {
            if depth < BINDERS.len() {
                for b in self.exact(n - 1, depth + 1, false) {
                    out.push(MCtx::New(BINDERS[depth].to_string(), Box::new(b)));
                }
            }
            if self.generation == Generation::Star {
                let conts = self.indices(Shape::Cont);
                let inner = self.exact(n - 1, depth, false);
                for i in conts {
                    for c in &inner {
                        out.push(MCtx::Star(i, Box::new(c.clone())));
                    }
                }
            }
        }
        self.memo_c.insert((n, depth, value_only), out.clone());
        out
    }

    pub fn exact_e(&mut self, n: usize, depth: usize) -> Vec<MECtx> {
        if let Some(v) = self.memo_e.get(&(n, depth)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.push(MECtx::Hole);
        }
        if n >= 3 {
            for a in 1..n - 1 {
                let b = n - 1 - a;
                let es = self.exact_e(a, depth);
                let cs = self.exact(b, depth, false);
                for e in &es {
                    for c in &cs {
                        out.push(MECtx::AppL(Box::new(e.clone()), Box::new(c.clone())));
                    }
                }
                let vs = self.exact(a, depth, true);
                let es2 = self.exact_e(b, depth);
                for v in &vs {
                    for e in &es2 {
                        out.push(MECtx::AppR(Box::new(v.clone()), Box::new(e.clone())));
                    }
                }
            }
        }
        if n >= 2 {
            let inner = self.exact_e(n - 1, depth);
            for i in self.indices(Shape::Prompt) {
                for e in &inner {
                    out.push(MECtx::Delim(i, Box::new(e.clone())));
                }
            }
            if self.generation == Generation::Star {
                for i in self.indices(Shape::Cont) {
                    for e in &inner {
                        out.push(MECtx::Star(i, Box::new(e.clone())));
                    }
                }
            }
        }
        self.memo_e.insert((n, depth), out.clone());
        out
    }

    /// All closed contexts of the given kind with size at most `size`, by
    /// increasing size.
    pub fn up_to(&mut self, kind: Kind, size: usize) -> Vec<MCtx> {
        match kind {
            Kind::C => (1..=size).flat_map(|n| self.exact(n, 0, false)).collect(),
            Kind::Cv => (1..=size).flat_map(|n| self.exact(n, 0, true)).collect(),
            Kind::Edia => panic!("use up_to_e for evaluation contexts"),
        }
    }

    pub fn up_to_e(&mut self, size: usize) -> Vec<MECtx> {
        (1..=size).flat_map(|n| self.exact_e(n, 0)).collect()
    }
}

pub fn enumerate_multi(
    kind: Kind,
    generation: Generation,
    size: usize,
    shape: &[Shape],
) -> Vec<MCtx> {
    Enumerator::new(generation, shape.to_vec()).up_to(kind, size)
}

pub fn enumerate_multi_eval(generation: Generation, size: usize, shape: &[Shape]) -> Vec<MECtx> {
    Enumerator::new(generation, shape.to_vec()).up_to_e(size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::syntax::Prompt;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn plug_examples() {
        assert_eq!(EvalCtx::Hole.plug(t("(lam v v)")), t("(lam v v)"));
        assert_eq!(
            EvalCtx::app_l(EvalCtx::Hole, t("e")).plug(t("f")),
            t("(f e)")
        );
        assert_eq!(
            EvalCtx::delim(Prompt(0), EvalCtx::Hole).plug(t("(lam v v)")),
            t("(reset (prompt 0) (lam v v))")
        );
    }

    #[test]
    fn plug_multi_examples() {
        let id = t("(lam x x)");
        assert_eq!(MCtx::Idx(1).plug(&[id.clone()]).unwrap(), id);
        let e = MECtx::Delim(1, Box::new(MECtx::Hole));
        assert_eq!(
            e.plug(t("(lam v v)"), &[Term::prompt(0)]).unwrap(),
            t("(reset (prompt 0) (lam v v))")
        );
        let c = MCtx::Star(1, Box::new(MCtx::Idx(2)));
        let env = [t("(cont (_ (lam w w)))"), t("(lam v v)")];
        assert_eq!(c.plug(&env).unwrap(), t("((lam v v) (lam w w))"));
        let s = MECtx::Star(1, Box::new(MECtx::Hole));
        assert_eq!(
            s.plug(t("e"), &[t("(cont (reset (prompt 0) _))")]).unwrap(),
            t("(reset (prompt 0) e)")
        );
    }

    #[test]
    fn plug_errors() {
        assert_eq!(
            MCtx::Idx(2).plug(&[Term::prompt(0)]),
            Err(PlugError::IndexOutOfRange { index: 2, size: 1 })
        );
        assert!(matches!(
            MECtx::Delim(1, Box::new(MECtx::Hole)).plug(t("v"), &[t("(lam v v)")]),
            Err(PlugError::KindMismatch { .. })
        ));
    }

    #[test]
    fn syntax_round_trip() {
        for src in [
            "(lam x (#1 x))",
            "(star 2 (reset #1 #3))",
            "(cont ((lam x x) (reset #1 _)))",
            "(grab #1 x (throw #2 x))",
        ] {
            let c = parse_mctx(src).unwrap();
            assert_eq!(c.to_string(), src);
        }
        let e = parse_mectx("(star 1 (_ #2))").unwrap();
        assert_eq!(
            e,
            MECtx::Star(1, Box::new(MECtx::AppL(Box::new(MECtx::Hole), Box::new(MCtx::Idx(2)))))
        );
        assert!(parse_mctx("(reset (prompt 0) #1)").is_err());
        assert!(parse_mectx("(lam x _)").is_err());
    }

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(enumerate_multi_eval(Generation::Standard, 1, &[]), vec![MECtx::Hole]);
        let e2 = enumerate_multi_eval(Generation::Standard, 2, &[Shape::Prompt]);
        assert_eq!(e2, vec![MECtx::Hole, MECtx::Delim(1, Box::new(MECtx::Hole))]);
        let cv = enumerate_multi(Kind::Cv, Generation::Standard, 2, &[Shape::Other]);
        assert!(cv.contains(&MCtx::Idx(1)));
        assert!(cv.contains(&MCtx::Lam("x".into(), Box::new(MCtx::Idx(1)))));
        assert!(cv.contains(&MCtx::Lam("x".into(), Box::new(MCtx::Var("x".into())))));
        assert!(cv.iter().all(|c| c.size() <= 2 && c.is_value_ctx()));
    }

    #[test]
    fn enumeration_respects_generation() {
        let shape = [Shape::Cont, Shape::Prompt];
        let std = enumerate_multi(Kind::C, Generation::Standard, 4, &shape);
        assert!(std.iter().all(|c| !c.uses_star()));
        let star = enumerate_multi(Kind::C, Generation::Star, 4, &shape);
        assert!(star.iter().any(|c| c.uses_star()));
        for c in &star {
            let env = [t("(cont _)"), Term::prompt(0)];
            assert!(c.plug(&env).is_ok(), "{c}");
        }
    }
}
