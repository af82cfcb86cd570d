//! Abstract syntax of the multi-prompt calculus: terms, evaluation
//! contexts, prompts and prompt permutations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::SyntaxError;

pub type Name = String;

/// A dynamically generated prompt. Prompts are compared by id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Prompt(pub u32);

impl fmt::Display for Prompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Name),
    Lam(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `new x e`: binds `x` to a freshly generated prompt in `e`.
    New(Name, Box<Term>),
    /// `reset v e`: delimits `e` with the prompt `v`.
    Reset(Box<Term>, Box<Term>),
    /// `grab v x e`: captures the context up to the nearest `v` delimiter.
    Grab(Box<Term>, Name, Box<Term>),
    /// `throw v e`: plugs the unevaluated `e` into the captured context `v`.
    Throw(Box<Term>, Box<Term>),
    Prompt(Prompt),
    Cont(EvalCtx),
}

/// Evaluation contexts, read outside-in: the outermost constructor is the
/// outermost frame of the plugged term.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum EvalCtx {
    Hole,
    /// `E e`
    AppL(Box<EvalCtx>, Box<Term>),
    /// `v E`
    AppR(Box<Term>, Box<EvalCtx>),
    /// `<E>_p`
    Delim(Prompt, Box<EvalCtx>),
}

fn require_value(t: &Term) -> Result<(), SyntaxError> {
    if t.is_value() {
        Ok(())
    } else {
        Err(SyntaxError::NotAValue(t.to_string()))
    }
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::Lam(x.to_string(), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Left-nested application `f a1 a2 ...`.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn new_prompt(x: &str, body: Term) -> Term {
        Term::New(x.to_string(), Box::new(body))
    }

    pub fn prompt(id: u32) -> Term {
        Term::Prompt(Prompt(id))
    }

    pub fn reset(delim: Term, body: Term) -> Result<Term, SyntaxError> {
        require_value(&delim)?;
        Ok(Term::Reset(Box::new(delim), Box::new(body)))
    }

    pub fn grab(delim: Term, x: &str, body: Term) -> Result<Term, SyntaxError> {
        require_value(&delim)?;
        Ok(Term::Grab(Box::new(delim), x.to_string(), Box::new(body)))
    }

    pub fn throw(cont: Term, arg: Term) -> Result<Term, SyntaxError> {
        require_value(&cont)?;
        Ok(Term::Throw(Box::new(cont), Box::new(arg)))
    }

    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Term::Var(_) | Term::Lam(..) | Term::Prompt(_) | Term::Cont(_)
        )
    }

    /// Checks the grammar restriction that delimiters, grab prompts and
    /// thrown-to continuations are syntactic values, everywhere in the term.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Term::Var(_) | Term::Prompt(_) => true,
            Term::Lam(_, b) | Term::New(_, b) => b.is_well_formed(),
            Term::App(f, a) => f.is_well_formed() && a.is_well_formed(),
            Term::Reset(v, b) | Term::Grab(v, _, b) | Term::Throw(v, b) => {
                v.is_value() && v.is_well_formed() && b.is_well_formed()
            }
            Term::Cont(e) => e.is_well_formed(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub(crate) fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Lam(x, b) | Term::New(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Reset(v, b) | Term::Throw(v, b) => {
                v.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Grab(v, x, b) => {
                v.collect_free(bound, out);
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::Prompt(_) => {}
            Term::Cont(e) => e.collect_free(bound, out),
        }
    }

    pub fn prompts(&self) -> BTreeSet<Prompt> {
        let mut out = BTreeSet::new();
        self.collect_prompts(&mut out);
        out
    }

    pub(crate) fn collect_prompts(&self, out: &mut BTreeSet<Prompt>) {
        self.visit_prompts(&mut |p| {
            out.insert(p);
        });
    }

    /// Visits prompt occurrences in a fixed pre-order, left to right.
    pub fn visit_prompts(&self, f: &mut impl FnMut(Prompt)) {
        match self {
            Term::Var(_) => {}
            Term::Lam(_, b) | Term::New(_, b) => b.visit_prompts(f),
            Term::App(a, b) | Term::Reset(a, b) | Term::Throw(a, b) | Term::Grab(a, _, b) => {
                a.visit_prompts(f);
                b.visit_prompts(f);
            }
            Term::Prompt(p) => f(*p),
            Term::Cont(e) => e.visit_prompts(f),
        }
    }

    pub fn map_prompts(&self, f: &impl Fn(Prompt) -> Prompt) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(b.map_prompts(f))),
            Term::New(x, b) => Term::New(x.clone(), Box::new(b.map_prompts(f))),
            Term::App(a, b) => Term::App(Box::new(a.map_prompts(f)), Box::new(b.map_prompts(f))),
            Term::Reset(a, b) => {
                Term::Reset(Box::new(a.map_prompts(f)), Box::new(b.map_prompts(f)))
            }
            Term::Throw(a, b) => {
                Term::Throw(Box::new(a.map_prompts(f)), Box::new(b.map_prompts(f)))
            }
            Term::Grab(a, x, b) => Term::Grab(
                Box::new(a.map_prompts(f)),
                x.clone(),
                Box::new(b.map_prompts(f)),
            ),
            Term::Prompt(p) => Term::Prompt(f(*p)),
            Term::Cont(e) => Term::Cont(e.map_prompts(f)),
        }
    }

    pub fn apply_perm(&self, sigma: &Permutation) -> Term {
        self.map_prompts(&|p| sigma.apply(p))
    }

    /// Capture-avoiding substitution `self[x := v]`.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        let fv = v.free_vars();
        self.subst_with(x, v, &fv)
    }

    fn subst_with(&self, x: &str, v: &Term, fv: &BTreeSet<Name>) -> Term {
        match self {
            Term::Var(y) => {
                if y == x {
                    v.clone()
                } else {
                    self.clone()
                }
            }
            Term::Lam(y, b) => {
                let (y, b) = subst_binder(y, b, x, v, fv);
                Term::Lam(y, Box::new(b))
            }
            Term::New(y, b) => {
                let (y, b) = subst_binder(y, b, x, v, fv);
                Term::New(y, Box::new(b))
            }
            Term::Grab(d, y, b) => {
                let d = d.subst_with(x, v, fv);
                let (y, b) = subst_binder(y, b, x, v, fv);
                Term::Grab(Box::new(d), y, Box::new(b))
            }
            Term::App(a, b) => Term::App(
                Box::new(a.subst_with(x, v, fv)),
                Box::new(b.subst_with(x, v, fv)),
            ),
            Term::Reset(a, b) => Term::Reset(
                Box::new(a.subst_with(x, v, fv)),
                Box::new(b.subst_with(x, v, fv)),
            ),
            Term::Throw(a, b) => Term::Throw(
                Box::new(a.subst_with(x, v, fv)),
                Box::new(b.subst_with(x, v, fv)),
            ),
            Term::Prompt(_) => self.clone(),
            Term::Cont(e) => Term::Cont(e.map_terms(&|t| t.subst_with(x, v, fv))),
        }
    }

    /// Replaces free occurrences of `x` by an arbitrary closed term. Used to
    /// instantiate program skeletons whose placeholders are not values.
    pub fn replace_free(&self, x: &str, t: &Term) -> Term {
        debug_assert!(t.is_closed());
        match self {
            Term::Var(y) if y == x => t.clone(),
            Term::Var(_) | Term::Prompt(_) => self.clone(),
            Term::Lam(y, _) | Term::New(y, _) if y == x => self.clone(),
            Term::Lam(y, b) => Term::Lam(y.clone(), Box::new(b.replace_free(x, t))),
            Term::New(y, b) => Term::New(y.clone(), Box::new(b.replace_free(x, t))),
            Term::Grab(d, y, b) => {
                let d = d.replace_free(x, t);
                let b = if y == x { (**b).clone() } else { b.replace_free(x, t) };
                Term::Grab(Box::new(d), y.clone(), Box::new(b))
            }
            Term::App(a, b) => Term::App(Box::new(a.replace_free(x, t)), Box::new(b.replace_free(x, t))),
            Term::Reset(a, b) => {
                Term::Reset(Box::new(a.replace_free(x, t)), Box::new(b.replace_free(x, t)))
            }
            Term::Throw(a, b) => {
                Term::Throw(Box::new(a.replace_free(x, t)), Box::new(b.replace_free(x, t)))
            }
            Term::Cont(e) => Term::Cont(e.map_terms(&|s| s.replace_free(x, t))),
        }
    }

    /// Alpha-canonical form: every binder is renamed after its binding depth,
    /// so alpha-equivalent terms have structurally equal canonical forms.
    pub fn canonical(&self) -> Term {
        self.canon(&mut Vec::new())
    }

    fn canon(&self, scope: &mut Vec<(Name, Name)>) -> Term {
        match self {
            Term::Var(x) => match scope.iter().rev().find(|(o, _)| o == x) {
                Some((_, n)) => Term::Var(n.clone()),
                None => self.clone(),
            },
            Term::Lam(x, b) => {
                let n = canon_name(scope.len());
                scope.push((x.clone(), n.clone()));
                let b = b.canon(scope);
                scope.pop();
                Term::Lam(n, Box::new(b))
            }
            Term::New(x, b) => {
                let n = canon_name(scope.len());
                scope.push((x.clone(), n.clone()));
                let b = b.canon(scope);
                scope.pop();
                Term::New(n, Box::new(b))
            }
            Term::Grab(d, x, b) => {
                let d = d.canon(scope);
                let n = canon_name(scope.len());
                scope.push((x.clone(), n.clone()));
                let b = b.canon(scope);
                scope.pop();
                Term::Grab(Box::new(d), n, Box::new(b))
            }
            Term::App(a, b) => Term::App(Box::new(a.canon(scope)), Box::new(b.canon(scope))),
            Term::Reset(a, b) => Term::Reset(Box::new(a.canon(scope)), Box::new(b.canon(scope))),
            Term::Throw(a, b) => Term::Throw(Box::new(a.canon(scope)), Box::new(b.canon(scope))),
            Term::Prompt(_) => self.clone(),
            Term::Cont(e) => Term::Cont(e.map_terms_mut(&mut |t| t.canon(scope))),
        }
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.canonical() == other.canonical()
    }

    /// Number of syntax constructors.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Prompt(_) => 1,
            Term::Lam(_, b) | Term::New(_, b) => 1 + b.size(),
            Term::App(a, b) | Term::Reset(a, b) | Term::Throw(a, b) | Term::Grab(a, _, b) => {
                1 + a.size() + b.size()
            }
            Term::Cont(e) => 1 + e.size(),
        }
    }
}

fn canon_name(depth: usize) -> Name {
    format!("%{depth}")
}

fn subst_binder(
    y: &Name,
    body: &Term,
    x: &str,
    v: &Term,
    fv: &BTreeSet<Name>,
) -> (Name, Term) {
    if y == x {
        return (y.clone(), body.clone());
    }
    if fv.contains(y) {
        let mut avoid = body.free_vars();
        avoid.extend(fv.iter().cloned());
        avoid.insert(x.to_string());
        let fresh = fresh_name(y, &avoid);
        let renamed = body.subst(y, &Term::Var(fresh.clone()));
        (fresh.clone(), renamed.subst_with(x, v, fv))
    } else {
        (y.clone(), body.subst_with(x, v, fv))
    }
}

/// Returns `base` or `base` followed by the least numeric suffix that is
/// not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}

impl EvalCtx {
    pub fn app_l(inner: EvalCtx, arg: Term) -> EvalCtx {
        EvalCtx::AppL(Box::new(inner), Box::new(arg))
    }

    pub fn app_r(fun: Term, inner: EvalCtx) -> EvalCtx {
        EvalCtx::AppR(Box::new(fun), Box::new(inner))
    }

    pub fn delim(p: Prompt, inner: EvalCtx) -> EvalCtx {
        EvalCtx::Delim(p, Box::new(inner))
    }

    pub fn is_well_formed(&self) -> bool {
        match self {
            EvalCtx::Hole => true,
            EvalCtx::AppL(e, t) => e.is_well_formed() && t.is_well_formed(),
            EvalCtx::AppR(v, e) => v.is_value() && v.is_well_formed() && e.is_well_formed(),
            EvalCtx::Delim(_, e) => e.is_well_formed(),
        }
    }

    pub fn plug(&self, t: Term) -> Term {
        match self {
            EvalCtx::Hole => t,
            EvalCtx::AppL(e, a) => Term::App(Box::new(e.plug(t)), a.clone()),
            EvalCtx::AppR(v, e) => Term::App(v.clone(), Box::new(e.plug(t))),
            EvalCtx::Delim(p, e) => Term::Reset(Box::new(Term::Prompt(*p)), Box::new(e.plug(t))),
        }
    }

    /// `self[inner]`
    pub fn compose(&self, inner: &EvalCtx) -> EvalCtx {
        match self {
            EvalCtx::Hole => inner.clone(),
            EvalCtx::AppL(e, a) => EvalCtx::AppL(Box::new(e.compose(inner)), a.clone()),
            EvalCtx::AppR(v, e) => EvalCtx::AppR(v.clone(), Box::new(e.compose(inner))),
            EvalCtx::Delim(p, e) => EvalCtx::Delim(*p, Box::new(e.compose(inner))),
        }
    }

    /// Prompts of the delimiters guarding the hole.
    pub fn sur_prompts(&self) -> BTreeSet<Prompt> {
        let mut out = BTreeSet::new();
        let mut cur = self;
        loop {
            match cur {
                EvalCtx::Hole => return out,
                EvalCtx::AppL(e, _) | EvalCtx::AppR(_, e) => cur = e,
                EvalCtx::Delim(p, e) => {
                    out.insert(*p);
                    cur = e;
                }
            }
        }
    }

    /// Splits `self = outer[<inner>_p]` at the delimiter for `p` nearest to
    /// the hole, so that `p` does not guard the hole of `inner`.
    pub fn split_at(&self, p: Prompt) -> Option<(EvalCtx, EvalCtx)> {
        match self {
            EvalCtx::Hole => None,
            EvalCtx::AppL(e, a) => e
                .split_at(p)
                .map(|(o, i)| (EvalCtx::AppL(Box::new(o), a.clone()), i)),
            EvalCtx::AppR(v, e) => e
                .split_at(p)
                .map(|(o, i)| (EvalCtx::AppR(v.clone(), Box::new(o)), i)),
            EvalCtx::Delim(q, e) => match e.split_at(p) {
                Some((o, i)) => Some((EvalCtx::Delim(*q, Box::new(o)), i)),
                None if *q == p => Some((EvalCtx::Hole, (**e).clone())),
                None => None,
            },
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            EvalCtx::Hole => {}
            EvalCtx::AppL(e, t) | EvalCtx::AppR(t, e) => {
                e.collect_free(bound, out);
                t.collect_free(bound, out);
            }
            EvalCtx::Delim(_, e) => e.collect_free(bound, out),
        }
    }

    pub fn prompts(&self) -> BTreeSet<Prompt> {
        let mut out = BTreeSet::new();
        self.visit_prompts(&mut |p| {
            out.insert(p);
        });
        out
    }

    pub fn visit_prompts(&self, f: &mut impl FnMut(Prompt)) {
        match self {
            EvalCtx::Hole => {}
            EvalCtx::AppL(e, t) => {
                e.visit_prompts(f);
                t.visit_prompts(f);
            }
            EvalCtx::AppR(t, e) => {
                t.visit_prompts(f);
                e.visit_prompts(f);
            }
            EvalCtx::Delim(p, e) => {
                f(*p);
                e.visit_prompts(f);
            }
        }
    }

    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> EvalCtx {
        match self {
            EvalCtx::Hole => EvalCtx::Hole,
            EvalCtx::AppL(e, t) => EvalCtx::AppL(Box::new(e.map_terms(f)), Box::new(f(t))),
            EvalCtx::AppR(t, e) => EvalCtx::AppR(Box::new(f(t)), Box::new(e.map_terms(f))),
            EvalCtx::Delim(p, e) => EvalCtx::Delim(*p, Box::new(e.map_terms(f))),
        }
    }

    fn map_terms_mut(&self, f: &mut impl FnMut(&Term) -> Term) -> EvalCtx {
        match self {
            EvalCtx::Hole => EvalCtx::Hole,
            EvalCtx::AppL(e, t) => {
                let e = e.map_terms_mut(f);
                EvalCtx::AppL(Box::new(e), Box::new(f(t)))
            }
            EvalCtx::AppR(t, e) => {
                let t = f(t);
                EvalCtx::AppR(Box::new(t), Box::new(e.map_terms_mut(f)))
            }
            EvalCtx::Delim(p, e) => EvalCtx::Delim(*p, Box::new(e.map_terms_mut(f))),
        }
    }

    pub fn map_prompts(&self, f: &impl Fn(Prompt) -> Prompt) -> EvalCtx {
        match self {
            EvalCtx::Hole => EvalCtx::Hole,
            EvalCtx::AppL(e, t) => {
                EvalCtx::AppL(Box::new(e.map_prompts(f)), Box::new(t.map_prompts(f)))
            }
            EvalCtx::AppR(t, e) => {
                EvalCtx::AppR(Box::new(t.map_prompts(f)), Box::new(e.map_prompts(f)))
            }
            EvalCtx::Delim(p, e) => EvalCtx::Delim(f(*p), Box::new(e.map_prompts(f))),
        }
    }

    pub fn apply_perm(&self, sigma: &Permutation) -> EvalCtx {
        self.map_prompts(&|p| sigma.apply(p))
    }

    pub fn canonical(&self) -> EvalCtx {
        self.map_terms(&|t| t.canonical())
    }

    pub fn size(&self) -> usize {
        match self {
            EvalCtx::Hole => 1,
            EvalCtx::AppL(e, t) | EvalCtx::AppR(t, e) => 1 + e.size() + t.size(),
            EvalCtx::Delim(_, e) => 1 + e.size(),
        }
    }

    /// Number of frames plus one; the hole alone has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            EvalCtx::Hole => 1,
            EvalCtx::AppL(e, _) | EvalCtx::AppR(_, e) | EvalCtx::Delim(_, e) => 1 + e.depth(),
        }
    }
}

/// A finite-support bijection on prompts. Only non-fixed points are stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Permutation {
    map: BTreeMap<Prompt, Prompt>,
}

impl Permutation {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn swap(p: Prompt, q: Prompt) -> Self {
        let mut map = BTreeMap::new();
        if p != q {
            map.insert(p, q);
            map.insert(q, p);
        }
        Permutation { map }
    }

    /// Builds a permutation from explicit pairs; fails unless the pairs
    /// describe a bijection on their support.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Prompt, Prompt)>) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(old) = map.insert(a, b) {
                if old != b {
                    return None;
                }
            }
        }
        let dom: BTreeSet<_> = map.keys().copied().collect();
        let img: BTreeSet<_> = map.values().copied().collect();
        if dom != img {
            return None;
        }
        map.retain(|a, b| a != b);
        Some(Permutation { map })
    }

    /// Extends an injective partial map into a permutation by closing its
    /// open chains into cycles.
    pub fn complete(partial: &BTreeMap<Prompt, Prompt>) -> Option<Self> {
        let img: BTreeSet<_> = partial.values().copied().collect();
        if img.len() != partial.len() {
            return None;
        }
        let mut map = partial.clone();
        // Chain starts have no preimage, chain ends have no image. Any
        // pairing of ends with starts closes the chains into cycles.
        let starts = partial.keys().filter(|k| !img.contains(k));
        let ends = img.iter().filter(|v| !partial.contains_key(v));
        for (s, e) in starts.zip(ends) {
            map.insert(*e, *s);
        }
        Self::from_pairs(map)
    }

    pub fn apply(&self, p: Prompt) -> Prompt {
        self.map.get(&p).copied().unwrap_or(p)
    }

    pub fn inverse(&self) -> Self {
        Permutation {
            map: self.map.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        let support: BTreeSet<Prompt> = self.map.keys().chain(other.map.keys()).copied().collect();
        let mut map = BTreeMap::new();
        for p in support {
            let q = self.apply(other.apply(p));
            if p != q {
                map.insert(p, q);
            }
        }
        Permutation { map }
    }

    pub fn support(&self) -> impl Iterator<Item = Prompt> + '_ {
        self.map.keys().copied()
    }
}

/// Anything with a set of prompts, for the freshness side condition.
pub trait HasPrompts {
    fn prompt_set(&self) -> BTreeSet<Prompt>;
}

impl HasPrompts for Term {
    fn prompt_set(&self) -> BTreeSet<Prompt> {
        self.prompts()
    }
}

impl HasPrompts for EvalCtx {
    fn prompt_set(&self) -> BTreeSet<Prompt> {
        self.prompts()
    }
}

impl HasPrompts for [Term] {
    fn prompt_set(&self) -> BTreeSet<Prompt> {
        let mut out = BTreeSet::new();
        for t in self {
            t.collect_prompts(&mut out);
        }
        out
    }
}

impl HasPrompts for BTreeSet<Prompt> {
    fn prompt_set(&self) -> BTreeSet<Prompt> {
        self.clone()
    }
}

/// The side condition `(prompts(m1) \ prompts(m2)) ∩ prompts(m3) = ∅`.
pub fn fresh_cond<A, B, C>(m1: &A, m2: &B, m3: &C) -> bool
where
    A: HasPrompts + ?Sized,
    B: HasPrompts + ?Sized,
    C: HasPrompts + ?Sized,
{
    let p2 = m2.prompt_set();
    let p3 = m3.prompt_set();
    m1.prompt_set()
        .iter()
        .all(|p| p2.contains(p) || !p3.contains(p))
}

/// The least prompt id not in `used`.
pub fn least_fresh_prompt(used: &BTreeSet<Prompt>) -> Prompt {
    (0..)
        .map(Prompt)
        .find(|p| !used.contains(p))
        .expect("unbounded prompt supply")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn free_vars_follow_binders() {
        assert_eq!(t("(lam x (x y))").free_vars(), names(&["y"]));
        assert_eq!(t("(grab (prompt 0) x x)").free_vars(), names(&[]));
        assert_eq!(t("(new x (x x))").free_vars(), names(&[]));
        // the delimiter of grab is outside the binder
        assert_eq!(t("(grab x x x)").free_vars(), names(&["x"]));
    }

    #[test]
    fn prompts_of_terms_and_contexts() {
        let p: BTreeSet<_> = [Prompt(0)].into();
        assert_eq!(t("(reset (prompt 0) x)").prompts(), p);
        assert!(t("(lam x x)").prompts().is_empty());
        assert_eq!(t("(cont ((lam u u) (reset (prompt 0) _)))").prompts(), p);
    }

    #[test]
    fn sur_prompts_examples() {
        let ctx = |s: &str| match t(&format!("(cont {s})")) {
            Term::Cont(e) => e,
            _ => unreachable!(),
        };
        assert_eq!(
            ctx("((lam u u) (reset (prompt 0) ((lam v v) _)))").sur_prompts(),
            [Prompt(0)].into()
        );
        assert!(ctx("(_ (lam e e))").sur_prompts().is_empty());
        assert_eq!(
            ctx("(reset (prompt 1) (reset (prompt 0) _))").sur_prompts(),
            [Prompt(0), Prompt(1)].into()
        );
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(
            t("(x x)").subst("x", &t("(lam y y)")),
            t("((lam y y) (lam y y))")
        );
        assert_eq!(t("(lam x x)").subst("x", &Term::prompt(0)), t("(lam x x)"));
        assert_eq!(
            t("(grab x k k)").subst("x", &Term::prompt(0)),
            t("(grab (prompt 0) k k)")
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        let r = t("(lam y (x y))").subst("x", &t("y"));
        assert!(r.alpha_eq(&t("(lam z (y z))")));
        assert!(!r.alpha_eq(&t("(lam y (y y))")));
    }

    #[test]
    fn alpha_equivalence_examples() {
        assert!(t("(lam x x)").alpha_eq(&t("(lam y y)")));
        assert!(!t("(lam x x)").alpha_eq(&t("(lam x (x x))")));
        assert!(t("(new x (grab x k k))").alpha_eq(&t("(new y (grab y j j))")));
        assert!(!t("(lam x (lam y x))").alpha_eq(&t("(lam x (lam y y))")));
    }

    #[test]
    fn permutation_examples() {
        let s = Permutation::swap(Prompt(0), Prompt(1));
        let e = t("(reset (prompt 0) x)");
        assert_eq!(e.apply_perm(&s), t("(reset (prompt 1) x)"));
        assert_eq!(e.apply_perm(&Permutation::identity()), e);
        assert_eq!(e.apply_perm(&s).apply_perm(&s), e);
    }

    #[test]
    fn permutation_completion() {
        let partial: BTreeMap<_, _> = [(Prompt(0), Prompt(3)), (Prompt(3), Prompt(5))].into();
        let s = Permutation::complete(&partial).unwrap();
        assert_eq!(s.apply(Prompt(0)), Prompt(3));
        assert_eq!(s.apply(Prompt(3)), Prompt(5));
        assert_eq!(s.apply(Prompt(5)), Prompt(0));
        assert_eq!(s.compose(&s.inverse()), Permutation::identity());
    }

    #[test]
    fn fresh_cond_examples() {
        let p: BTreeSet<_> = [Prompt(0)].into();
        let q: BTreeSet<_> = [Prompt(1)].into();
        let none = BTreeSet::new();
        assert!(fresh_cond(&p, &p, &p));
        assert!(!fresh_cond(&q, &none, &q));
    }

    #[test]
    fn split_picks_nearest_delimiter() {
        let e = EvalCtx::delim(Prompt(0), EvalCtx::app_l(EvalCtx::delim(Prompt(0), EvalCtx::Hole), t("(lam z z)")));
        let (outer, inner) = e.split_at(Prompt(0)).unwrap();
        assert_eq!(outer, EvalCtx::delim(Prompt(0), EvalCtx::app_l(EvalCtx::Hole, t("(lam z z)"))));
        assert_eq!(inner, EvalCtx::Hole);
        assert!(e.split_at(Prompt(7)).is_none());
    }
}
