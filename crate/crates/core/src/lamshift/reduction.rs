use std::fmt;

use serde::Serialize;

use super::syntax::{SCtx, STerm};
use crate::error::EvalError;
use crate::reduction::ObsClass;
use crate::syntax::{fresh_name, Name};

/// Which programs count as complete. Under the original semantics every
/// program runs under a top-level `reset`, so it cannot get stuck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Semantics {
    Original,
    Relaxed,
}

impl std::str::FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "original" => Ok(Semantics::Original),
            "relaxed" => Ok(Semantics::Relaxed),
            other => Err(format!("unknown semantics `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SRule {
    Beta,
    ResetValue,
    Capture,
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SRule::Beta => "beta",
            SRule::ResetValue => "reset-value",
            SRule::Capture => "shift",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SStep {
    Reduced(STerm, SRule),
    Value,
    /// `E[shift k e]` with `E` pure: no delimiter to capture up to.
    Stuck { ctx: SCtx, binder: Name, body: STerm },
    /// A free variable in evaluation position.
    Open(Name),
}

enum Decomp {
    Value,
    Redex(SCtx, STerm, SRule),
    Stuck(SCtx, Name, STerm),
    Open(Name),
}

fn wrap(d: Decomp, frame: impl FnOnce(SCtx) -> SCtx) -> Decomp {
    match d {
        Decomp::Redex(f, c, r) => Decomp::Redex(frame(f), c, r),
        Decomp::Stuck(e, k, b) => Decomp::Stuck(frame(e), k, b),
        other => other,
    }
}

/// `λy.⟨E[y]⟩` with `y` the first name in `y, y0, y1, ...` not free in `E`.
pub fn reify(e: &SCtx) -> STerm {
    let y = fresh_name("y", &e.free_vars());
    STerm::lam(&y, STerm::reset(e.plug(STerm::var(&y))))
}

fn decompose(t: &STerm) -> Decomp {
    match t {
        STerm::Var(x) => Decomp::Open(x.clone()),
        STerm::Lam(..) => Decomp::Value,
        STerm::Shift(k, b) => Decomp::Stuck(SCtx::Hole, k.clone(), (**b).clone()),
        STerm::App(a, b) => {
            if !a.is_value() {
                return wrap(decompose(a), |f| SCtx::app_l(f, (**b).clone()));
            }
            if !b.is_value() {
                return wrap(decompose(b), |f| SCtx::app_r((**a).clone(), f));
            }
            match (&**a, &**b) {
                (STerm::Lam(x, body), _) => Decomp::Redex(SCtx::Hole, body.subst(x, b), SRule::Beta),
                (STerm::Var(x), _) => Decomp::Open(x.clone()),
                (_, STerm::Var(x)) => Decomp::Open(x.clone()),
                _ => unreachable!("values are variables or abstractions"),
            }
        }
        STerm::Reset(b) => {
            if let STerm::Lam(..) = **b {
                return Decomp::Redex(SCtx::Hole, (**b).clone(), SRule::ResetValue);
            }
            match decompose(b) {
                Decomp::Stuck(e, k, body) => {
                    let c = STerm::reset(body.subst(&k, &reify(&e)));
                    Decomp::Redex(SCtx::Hole, c, SRule::Capture)
                }
                d => wrap(d, SCtx::reset),
            }
        }
    }
}

/// One deterministic reduction step.
pub fn step_s(e: &STerm) -> SStep {
    match decompose(e) {
        Decomp::Value => SStep::Value,
        Decomp::Redex(f, c, r) => SStep::Reduced(f.plug(c), r),
        Decomp::Stuck(ctx, binder, body) => SStep::Stuck { ctx, binder, body },
        Decomp::Open(x) => SStep::Open(x),
    }
}

/// One step if there is one, `e` itself otherwise.
pub fn red_hat_s(e: &STerm) -> STerm {
    match step_s(e) {
        SStep::Reduced(n, _) => n,
        _ => e.clone(),
    }
}

pub fn is_stuck(e: &STerm) -> bool {
    matches!(step_s(e), SStep::Stuck { .. })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SOutcome {
    Value(STerm),
    Stuck(STerm),
    FuelExhausted(usize),
}

impl SOutcome {
    pub fn observable(&self) -> ObsClass {
        match self {
            SOutcome::Value(_) => ObsClass::Value,
            SOutcome::Stuck(_) => ObsClass::Stuck,
            SOutcome::FuelExhausted(n) => ObsClass::Unknown(*n),
        }
    }
}

fn require_closed(e: &STerm) -> Result<(), EvalError> {
    let fv = e.free_vars();
    if fv.is_empty() {
        Ok(())
    } else {
        Err(EvalError::OpenTerm(fv.into_iter().collect()))
    }
}

/// The program actually run: `⟨e⟩` under the original semantics.
pub fn program(e: &STerm, sem: Semantics) -> STerm {
    match sem {
        Semantics::Original => STerm::reset(e.clone()),
        Semantics::Relaxed => e.clone(),
    }
}

/// Runs `e` under `sem` and returns every intermediate term with the rule
/// that produced it.
pub fn trace_s(
    e: &STerm,
    fuel: usize,
    sem: Semantics,
) -> Result<(Vec<(STerm, SRule)>, SOutcome), EvalError> {
    require_closed(e)?;
    let mut cur = program(e, sem);
    let mut out = Vec::new();
    loop {
        match step_s(&cur) {
            SStep::Value => return Ok((out, SOutcome::Value(cur))),
            SStep::Stuck { .. } => return Ok((out, SOutcome::Stuck(cur))),
            SStep::Open(x) => return Err(EvalError::OpenTerm(vec![x])),
            SStep::Reduced(n, r) => {
                if out.len() == fuel {
                    return Ok((out, SOutcome::FuelExhausted(fuel)));
                }
                out.push((n.clone(), r));
                cur = n;
            }
        }
    }
}

pub fn eval_s(e: &STerm, fuel: usize, sem: Semantics) -> Result<SOutcome, EvalError> {
    require_closed(e)?;
    let mut cur = program(e, sem);
    for n in 0..=fuel {
        match step_s(&cur) {
            SStep::Value => return Ok(SOutcome::Value(cur)),
            SStep::Stuck { .. } => return Ok(SOutcome::Stuck(cur)),
            SStep::Open(x) => return Err(EvalError::OpenTerm(vec![x])),
            SStep::Reduced(next, _) => {
                if n == fuel {
                    break;
                }
                cur = next;
            }
        }
    }
    Ok(SOutcome::FuelExhausted(fuel))
}

pub fn observable_s(e: &STerm, fuel: usize, sem: Semantics) -> Result<ObsClass, EvalError> {
    Ok(eval_s(e, fuel, sem)?.observable())
}
