//! Bounded contextual equivalence: plug both terms into every small
//! promptless evaluation context and compare what they do.
//!
//! The size of an evaluation context is its number of frames plus one, so
//! `_` has size 1. Argument and function slots are filled with the closed
//! promptless terms of at most `size - 1` constructors, followed by the
//! caller's atom pool.

use serde::Serialize;

use crate::contexts::{Enumerator, Generation, Kind};
use crate::error::EvalError;
use crate::reduction::{observable, ObsClass};
use crate::syntax::{EvalCtx, Term};

/// Closed promptless terms with at most `size` constructors.
pub fn closed_terms(size: usize) -> Vec<Term> {
    let mut en = Enumerator::new(Generation::Standard, Vec::new());
    en.up_to(Kind::C, size)
        .into_iter()
        .filter_map(|c| c.plug(&[]).ok())
        .collect()
}

pub fn enumerate_eval_ctx(size: usize, atoms: &[Term]) -> Vec<EvalCtx> {
    if size == 0 {
        return Vec::new();
    }
    let mut slots = closed_terms(size - 1);
    slots.extend(atoms.iter().cloned());
    let values: Vec<Term> = slots.iter().filter(|t| t.is_value()).cloned().collect();
    // layers[k] holds the contexts with exactly k frames
    let mut layers = vec![vec![EvalCtx::Hole]];
    for _ in 1..size {
        let mut next = Vec::new();
        for inner in layers.last().unwrap() {
            for a in &slots {
                next.push(EvalCtx::app_l(inner.clone(), a.clone()));
            }
            for f in &values {
                next.push(EvalCtx::app_r(f.clone(), inner.clone()));
            }
        }
        layers.push(next);
    }
    layers.into_iter().flatten().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CtxVerdict {
    EquivalentWithinBounds { contexts: usize },
    Distinguisher { ctx: String, obs1: ObsClass, obs2: ObsClass },
    /// Mismatches in which one side ran out of fuel.
    Inconclusive { cases: Vec<(String, ObsClass, ObsClass)> },
}

impl CtxVerdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            CtxVerdict::EquivalentWithinBounds { .. } => 0,
            CtxVerdict::Distinguisher { .. } => 1,
            CtxVerdict::Inconclusive { .. } => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CtxEqConfig {
    pub size: usize,
    pub fuel: usize,
    pub atoms: Vec<Term>,
    /// Read fuel exhaustion as divergence. Only for documented cases where
    /// the diverging side is known to diverge.
    pub presume_divergence: bool,
}

impl CtxEqConfig {
    pub fn new(size: usize, fuel: usize) -> Self {
        CtxEqConfig {
            size,
            fuel,
            atoms: Vec::new(),
            presume_divergence: false,
        }
    }
}

fn require_closed(e: &Term) -> Result<(), EvalError> {
    let fv = e.free_vars();
    if fv.is_empty() {
        Ok(())
    } else {
        Err(EvalError::OpenTerm(fv.into_iter().collect()))
    }
}

/// Compares the two terms in each of the given contexts, in order.
pub fn check_in_contexts(
    e1: &Term,
    e2: &Term,
    contexts: &[EvalCtx],
    fuel: usize,
    presume_divergence: bool,
) -> Result<CtxVerdict, EvalError> {
    require_closed(e1)?;
    require_closed(e2)?;
    let mut inconclusive = Vec::new();
    for ctx in contexts {
        let mut o1 = observable(&ctx.plug(e1.clone()), fuel);
        let mut o2 = observable(&ctx.plug(e2.clone()), fuel);
        if presume_divergence {
            o1 = o1.presume_divergent();
            o2 = o2.presume_divergent();
        }
        if o1 == o2 || (!o1.is_decided() && !o2.is_decided()) {
            continue;
        }
        if o1.is_decided() && o2.is_decided() {
            return Ok(CtxVerdict::Distinguisher {
                ctx: ctx.to_string(),
                obs1: o1,
                obs2: o2,
            });
        }
        inconclusive.push((ctx.to_string(), o1, o2));
    }
    Ok(if inconclusive.is_empty() {
        CtxVerdict::EquivalentWithinBounds {
            contexts: contexts.len(),
        }
    } else {
        CtxVerdict::Inconclusive {
            cases: inconclusive,
        }
    })
}

pub fn ctx_equiv_check(e1: &Term, e2: &Term, cfg: &CtxEqConfig) -> Result<CtxVerdict, EvalError> {
    let ctxs = enumerate_eval_ctx(cfg.size, &cfg.atoms);
    check_in_contexts(e1, e2, &ctxs, cfg.fuel, cfg.presume_divergence)
}

/// `λx1...λxn.e`, closing an open term over the given variables. Open terms
/// are compared by comparing their closures.
pub fn lambda_wrap(e: &Term, vars: &[&str]) -> Term {
    vars.iter().rev().fold(e.clone(), |b, x| Term::lam(x, b))
}

/// Checks the terms in a general context written with the free variable
/// `hole`. The hole may sit under binders; it is filled without renaming.
pub fn check_in_general_context(
    ctx: &Term,
    hole: &str,
    e1: &Term,
    e2: &Term,
    fuel: usize,
    presume_divergence: bool,
) -> Result<CtxVerdict, EvalError> {
    require_closed(e1)?;
    require_closed(e2)?;
    let c1 = ctx.replace_free(hole, e1);
    let c2 = ctx.replace_free(hole, e2);
    let fv: Vec<String> = c1.free_vars().union(&c2.free_vars()).cloned().collect();
    if !fv.is_empty() {
        return Err(EvalError::OpenTerm(fv));
    }
    check_in_contexts(&c1, &c2, &[EvalCtx::Hole], fuel, presume_divergence)
}
