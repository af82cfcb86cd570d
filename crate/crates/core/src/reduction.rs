//! Call-by-value reduction with dynamic prompt generation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::syntax::{least_fresh_prompt, EvalCtx, Name, Prompt, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorReason {
    AppNonLambda,
    ResetNonPrompt,
    GrabNonPrompt,
    ThrowNonCont,
    FreeVariable,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalClass {
    Value,
    /// The term is `outer[grab prompt binder.body]` with `prompt` not
    /// guarding the hole of `outer`.
    ControlStuck {
        prompt: Prompt,
        outer: EvalCtx,
        binder: Name,
        body: Term,
    },
    Error(ErrorReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Beta,
    Reset,
    Capture,
    Throw,
    New,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleKind::Beta => "beta",
            RuleKind::Reset => "reset",
            RuleKind::Capture => "capture",
            RuleKind::Throw => "throw",
            RuleKind::New => "new",
        };
        f.write_str(s)
    }
}

/// A redex together with what is needed to contract it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    Beta { x: Name, body: Term, arg: Term },
    ResetVal { prompt: Prompt, value: Term },
    Capture { prompt: Prompt, inner: EvalCtx, x: Name, body: Term },
    Throw { ctx: EvalCtx, arg: Term },
    New { x: Name, body: Term },
}

impl Redex {
    pub fn kind(&self) -> RuleKind {
        match self {
            Redex::Beta { .. } => RuleKind::Beta,
            Redex::ResetVal { .. } => RuleKind::Reset,
            Redex::Capture { .. } => RuleKind::Capture,
            Redex::Throw { .. } => RuleKind::Throw,
            Redex::New { .. } => RuleKind::New,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Redex::Beta { x, body, arg } => {
                Term::App(Box::new(Term::Lam(x.clone(), Box::new(body.clone()))), Box::new(arg.clone()))
            }
            Redex::ResetVal { prompt, value } => {
                Term::Reset(Box::new(Term::Prompt(*prompt)), Box::new(value.clone()))
            }
            Redex::Capture { prompt, inner, x, body } => Term::Reset(
                Box::new(Term::Prompt(*prompt)),
                Box::new(inner.plug(Term::Grab(
                    Box::new(Term::Prompt(*prompt)),
                    x.clone(),
                    Box::new(body.clone()),
                ))),
            ),
            Redex::Throw { ctx, arg } => {
                Term::Throw(Box::new(Term::Cont(ctx.clone())), Box::new(arg.clone()))
            }
            Redex::New { x, body } => Term::New(x.clone(), Box::new(body.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Redex(EvalCtx, Redex),
    Normal(NormalClass),
}

enum Dec {
    Redex(EvalCtx, Redex),
    Value,
    Stuck(Prompt, EvalCtx, Name, Term),
    Error(ErrorReason),
}

fn value_error(v: &Term, otherwise: ErrorReason) -> ErrorReason {
    if matches!(v, Term::Var(_)) {
        ErrorReason::FreeVariable
    } else {
        otherwise
    }
}

fn dec(t: &Term) -> Dec {
    match t {
        Term::Var(_) => Dec::Error(ErrorReason::FreeVariable),
        Term::Lam(..) | Term::Prompt(_) | Term::Cont(_) => Dec::Value,
        Term::App(f, a) => match dec(f) {
            Dec::Redex(e, r) => Dec::Redex(EvalCtx::AppL(Box::new(e), a.clone()), r),
            Dec::Stuck(p, e, x, b) => Dec::Stuck(p, EvalCtx::AppL(Box::new(e), a.clone()), x, b),
            Dec::Error(r) => Dec::Error(r),
            Dec::Value => match dec(a) {
                Dec::Redex(e, r) => Dec::Redex(EvalCtx::AppR(f.clone(), Box::new(e)), r),
                Dec::Stuck(p, e, x, b) => {
                    Dec::Stuck(p, EvalCtx::AppR(f.clone(), Box::new(e)), x, b)
                }
                Dec::Error(r) => Dec::Error(r),
                Dec::Value => match &**f {
                    Term::Lam(x, body) => Dec::Redex(
                        EvalCtx::Hole,
                        Redex::Beta {
                            x: x.clone(),
                            body: (**body).clone(),
                            arg: (**a).clone(),
                        },
                    ),
                    other => Dec::Error(value_error(other, ErrorReason::AppNonLambda)),
                },
            },
        },
        Term::New(x, b) => Dec::Redex(
            EvalCtx::Hole,
            Redex::New {
                x: x.clone(),
                body: (**b).clone(),
            },
        ),
        Term::Reset(d, b) => match &**d {
            Term::Prompt(p) => match dec(b) {
                Dec::Value => Dec::Redex(
                    EvalCtx::Hole,
                    Redex::ResetVal {
                        prompt: *p,
                        value: (**b).clone(),
                    },
                ),
                Dec::Redex(e, r) => Dec::Redex(EvalCtx::Delim(*p, Box::new(e)), r),
                Dec::Error(r) => Dec::Error(r),
                Dec::Stuck(q, e, x, body) => {
                    if q == *p {
                        Dec::Redex(
                            EvalCtx::Hole,
                            Redex::Capture {
                                prompt: *p,
                                inner: e,
                                x,
                                body,
                            },
                        )
                    } else {
                        Dec::Stuck(q, EvalCtx::Delim(*p, Box::new(e)), x, body)
                    }
                }
            },
            other => Dec::Error(value_error(other, ErrorReason::ResetNonPrompt)),
        },
        Term::Grab(d, x, b) => match &**d {
            Term::Prompt(p) => Dec::Stuck(*p, EvalCtx::Hole, x.clone(), (**b).clone()),
            other => Dec::Error(value_error(other, ErrorReason::GrabNonPrompt)),
        },
        Term::Throw(k, b) => match &**k {
            Term::Cont(e) => Dec::Redex(
                EvalCtx::Hole,
                Redex::Throw {
                    ctx: e.clone(),
                    arg: (**b).clone(),
                },
            ),
            other => Dec::Error(value_error(other, ErrorReason::ThrowNonCont)),
        },
    }
}

/// Splits a term into an evaluation context and a redex, or classifies it
/// as a normal form. Open terms are reported as `FreeVariable` errors.
pub fn decompose(e: &Term) -> Decomposition {
    if !e.is_closed() {
        return Decomposition::Normal(NormalClass::Error(ErrorReason::FreeVariable));
    }
    match dec(e) {
        Dec::Redex(c, r) => Decomposition::Redex(c, r),
        Dec::Value => Decomposition::Normal(NormalClass::Value),
        Dec::Stuck(p, outer, binder, body) => Decomposition::Normal(NormalClass::ControlStuck {
            prompt: p,
            outer,
            binder,
            body,
        }),
        Dec::Error(r) => Decomposition::Normal(NormalClass::Error(r)),
    }
}

/// The normal-form class of `e`, or `None` if `e` reduces.
pub fn classify_normal(e: &Term) -> Option<NormalClass> {
    match decompose(e) {
        Decomposition::Normal(c) => Some(c),
        Decomposition::Redex(..) => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Reduced(Term, RuleKind),
    Normal(NormalClass),
}

/// Contracts a redex. `used` must contain every prompt the fresh one has
/// to avoid.
pub fn contract(r: &Redex, used: &BTreeSet<Prompt>) -> Term {
    match r {
        Redex::Beta { x, body, arg } => body.subst(x, arg),
        Redex::ResetVal { value, .. } => value.clone(),
        Redex::Capture { inner, x, body, .. } => body.subst(x, &Term::Cont(inner.clone())),
        Redex::Throw { ctx, arg } => ctx.plug(arg.clone()),
        Redex::New { x, body } => body.subst(x, &Term::Prompt(least_fresh_prompt(used))),
    }
}

/// One reduction step. A generated prompt is the least id that occurs
/// neither in `e` nor in `avoid`.
pub fn step(e: &Term, avoid: &BTreeSet<Prompt>) -> Step {
    match decompose(e) {
        Decomposition::Normal(c) => Step::Normal(c),
        Decomposition::Redex(ctx, r) => {
            let kind = r.kind();
            let contractum = if kind == RuleKind::New {
                let mut used = e.prompts();
                used.extend(avoid.iter().copied());
                contract(&r, &used)
            } else {
                contract(&r, &BTreeSet::new())
            };
            Step::Reduced(ctx.plug(contractum), kind)
        }
    }
}

/// One step if `e` reduces, `e` itself if it is a normal form.
pub fn red_hat(e: &Term, avoid: &BTreeSet<Prompt>) -> Term {
    match step(e, avoid) {
        Step::Reduced(t, _) => t,
        Step::Normal(_) => e.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    Stuck(NormalClass, Term),
    Error(ErrorReason),
    FuelExhausted(usize),
}

pub fn eval(e: &Term, fuel: usize) -> Outcome {
    eval_counting(e, fuel).0
}

/// Like [`eval`], also returning the number of steps taken.
pub fn eval_counting(e: &Term, fuel: usize) -> (Outcome, usize) {
    if !e.is_closed() {
        return (Outcome::Error(ErrorReason::FreeVariable), 0);
    }
    let empty = BTreeSet::new();
    let mut cur = e.clone();
    for n in 0..=fuel {
        match step(&cur, &empty) {
            Step::Normal(NormalClass::Value) => return (Outcome::Value(cur), n),
            Step::Normal(NormalClass::Error(r)) => return (Outcome::Error(r), n),
            Step::Normal(c @ NormalClass::ControlStuck { .. }) => return (Outcome::Stuck(c, cur), n),
            Step::Reduced(next, _) => {
                if n == fuel {
                    break;
                }
                cur = next;
            }
        }
    }
    (Outcome::FuelExhausted(fuel), fuel)
}

/// Reduction trace: every intermediate term with the rule that produced it.
pub fn trace(e: &Term, fuel: usize) -> (Vec<(Term, RuleKind)>, Outcome) {
    let empty = BTreeSet::new();
    let mut out = Vec::new();
    let mut cur = e.clone();
    if !e.is_closed() {
        return (out, Outcome::Error(ErrorReason::FreeVariable));
    }
    loop {
        match step(&cur, &empty) {
            Step::Normal(NormalClass::Value) => return (out, Outcome::Value(cur)),
            Step::Normal(NormalClass::Error(r)) => return (out, Outcome::Error(r)),
            Step::Normal(c) => return (out, Outcome::Stuck(c, cur)),
            Step::Reduced(next, k) => {
                if out.len() == fuel {
                    return (out, Outcome::FuelExhausted(fuel));
                }
                out.push((next.clone(), k));
                cur = next;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ObsClass {
    Value,
    Stuck,
    ErrOrDiv,
    Unknown(usize),
}

impl ObsClass {
    pub fn is_decided(&self) -> bool {
        !matches!(self, ObsClass::Unknown(_))
    }

    /// Reading fuel exhaustion as divergence; only for explicitly flagged
    /// presumed-divergence checks.
    pub fn presume_divergent(self) -> ObsClass {
        match self {
            ObsClass::Unknown(_) => ObsClass::ErrOrDiv,
            o => o,
        }
    }
}

impl fmt::Display for ObsClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsClass::Value => write!(f, "value"),
            ObsClass::Stuck => write!(f, "stuck"),
            ObsClass::ErrOrDiv => write!(f, "error-or-divergence"),
            ObsClass::Unknown(n) => write!(f, "unknown (fuel {n} exhausted)"),
        }
    }
}

impl Outcome {
    pub fn observable(&self) -> ObsClass {
        match self {
            Outcome::Value(_) => ObsClass::Value,
            Outcome::Stuck(..) => ObsClass::Stuck,
            Outcome::Error(_) => ObsClass::ErrOrDiv,
            Outcome::FuelExhausted(n) => ObsClass::Unknown(*n),
        }
    }
}

pub fn observable(e: &Term, fuel: usize) -> ObsClass {
    eval(e, fuel).observable()
}
