//! Bounded contextual equivalence for shift/reset, measured like the
//! multi-prompt version: a context has size frames + 1 and its term slots
//! hold closed terms of at most `size - 1` constructors.

use super::contexts::closed_sterms;
use super::reduction::{observable_s, Semantics};
use super::syntax::{SCtx, STerm};
use crate::ctxeq::CtxVerdict;
use crate::error::EvalError;

/// Evaluation contexts built from application frames and, when `resets` is
/// set, delimiters.
pub fn enumerate_sctx(size: usize, atoms: &[STerm], resets: bool) -> Vec<SCtx> {
    if size == 0 {
        return Vec::new();
    }
    let mut slots = closed_sterms(size - 1);
    slots.extend(atoms.iter().cloned());
    let values: Vec<STerm> = slots.iter().filter(|t| t.is_value()).cloned().collect();
    let mut layers = vec![vec![SCtx::Hole]];
    for _ in 1..size {
        let mut next = Vec::new();
        for inner in layers.last().unwrap() {
            for a in &slots {
                next.push(SCtx::app_l(inner.clone(), a.clone()));
            }
            for f in &values {
                next.push(SCtx::app_r(f.clone(), inner.clone()));
            }
            if resets {
                next.push(SCtx::reset(inner.clone()));
            }
        }
        layers.push(next);
    }
    layers.into_iter().flatten().collect()
}

/// Compares `E[e1]` and `E[e2]` under `sem` for every enumerated `E`. The
/// original semantics runs each program under a top-level reset, so
/// contexts there are pure.
pub fn ctx_equiv_check_s(
    e1: &STerm,
    e2: &STerm,
    size: usize,
    fuel: usize,
    sem: Semantics,
    presume_divergence: bool,
) -> Result<CtxVerdict, EvalError> {
    let ctxs = enumerate_sctx(size, &[], sem == Semantics::Relaxed);
    let mut inconclusive = Vec::new();
    for ctx in &ctxs {
        let mut o1 = observable_s(&ctx.plug(e1.clone()), fuel, sem)?;
        let mut o2 = observable_s(&ctx.plug(e2.clone()), fuel, sem)?;
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
        CtxVerdict::EquivalentWithinBounds { contexts: ctxs.len() }
    } else {
        CtxVerdict::Inconclusive { cases: inconclusive }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lamshift::syntax::parse_sterm;
    use crate::reduction::ObsClass;

    fn t(s: &str) -> STerm {
        parse_sterm(s).unwrap()
    }

    #[test]
    fn shift_k_k_v_depends_on_the_semantics() {
        let l = t("(shift k (k (lam z z)))");
        let r = t("(lam z z)");
        let o = ctx_equiv_check_s(&l, &r, 3, 100, Semantics::Original, false).unwrap();
        assert_eq!(o.exit_code(), 0);
        let r = ctx_equiv_check_s(&l, &r, 3, 100, Semantics::Relaxed, false).unwrap();
        assert_eq!(
            r,
            CtxVerdict::Distinguisher {
                ctx: "_".into(),
                obs1: ObsClass::Stuck,
                obs2: ObsClass::Value
            }
        );
    }

    #[test]
    fn contexts_include_delimiters_only_when_asked() {
        assert!(enumerate_sctx(2, &[], true).contains(&SCtx::reset(SCtx::Hole)));
        assert!(enumerate_sctx(3, &[], false).iter().all(SCtx::is_pure));
    }
}
