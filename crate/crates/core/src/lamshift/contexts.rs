//! Multi-hole contexts for shift/reset. `#j` takes the value at index `j`,
//! `(star i C)` plugs `C` into the evaluation context at index `i`.

use std::collections::HashMap;
use std::fmt;

use super::syntax::{SCtx, STerm};
use crate::contexts::BINDERS;
use crate::error::PlugError;
use crate::syntax::Name;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SMCtx {
    Var(Name),
    Lam(Name, Box<SMCtx>),
    Idx(usize),
    App(Box<SMCtx>, Box<SMCtx>),
    Reset(Box<SMCtx>),
    Shift(Name, Box<SMCtx>),
    Star(usize, Box<SMCtx>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SMECtx {
    Hole,
    AppL(Box<SMECtx>, Box<SMCtx>),
    AppR(Box<SMCtx>, Box<SMECtx>),
    Reset(Box<SMECtx>),
    Star(usize, Box<SMECtx>),
}

fn get<T>(xs: &[T], i: usize) -> Result<&T, PlugError> {
    if i == 0 || i > xs.len() {
        Err(PlugError::IndexOutOfRange {
            index: i,
            size: xs.len(),
        })
    } else {
        Ok(&xs[i - 1])
    }
}

impl SMCtx {
    pub fn is_value_ctx(&self) -> bool {
        matches!(self, SMCtx::Var(_) | SMCtx::Lam(..) | SMCtx::Idx(_))
    }

    pub fn size(&self) -> usize {
        match self {
            SMCtx::Var(_) | SMCtx::Idx(_) => 1,
            SMCtx::Lam(_, c) | SMCtx::Reset(c) | SMCtx::Shift(_, c) | SMCtx::Star(_, c) => {
                1 + c.size()
            }
            SMCtx::App(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// `C[Ē, Γ]`
    pub fn plug(&self, ctxs: &[SCtx], vals: &[STerm]) -> Result<STerm, PlugError> {
        Ok(match self {
            SMCtx::Var(x) => STerm::Var(x.clone()),
            SMCtx::Idx(j) => get(vals, *j)?.clone(),
            SMCtx::Lam(x, c) => STerm::Lam(x.clone(), Box::new(c.plug(ctxs, vals)?)),
            SMCtx::Shift(x, c) => STerm::Shift(x.clone(), Box::new(c.plug(ctxs, vals)?)),
            SMCtx::App(a, b) => STerm::app(a.plug(ctxs, vals)?, b.plug(ctxs, vals)?),
            SMCtx::Reset(c) => STerm::reset(c.plug(ctxs, vals)?),
            SMCtx::Star(i, c) => get(ctxs, *i)?.plug(c.plug(ctxs, vals)?),
        })
    }

    /// A hole-free context denoting `t`.
    pub fn from_term(t: &STerm) -> SMCtx {
        match t {
            STerm::Var(x) => SMCtx::Var(x.clone()),
            STerm::Lam(x, b) => SMCtx::Lam(x.clone(), Box::new(SMCtx::from_term(b))),
            STerm::Shift(x, b) => SMCtx::Shift(x.clone(), Box::new(SMCtx::from_term(b))),
            STerm::App(a, b) => SMCtx::App(Box::new(SMCtx::from_term(a)), Box::new(SMCtx::from_term(b))),
            STerm::Reset(b) => SMCtx::Reset(Box::new(SMCtx::from_term(b))),
        }
    }

    /// True when the context is a bare index (or a star around the hole
    /// only, for evaluation contexts): the entry is copied unchanged.
    pub fn is_trivial(&self) -> bool {
        matches!(self, SMCtx::Idx(_))
    }
}

impl SMECtx {
    pub fn size(&self) -> usize {
        match self {
            SMECtx::Hole => 1,
            SMECtx::AppL(e, c) | SMECtx::AppR(c, e) => 1 + e.size() + c.size(),
            SMECtx::Reset(e) | SMECtx::Star(_, e) => 1 + e.size(),
        }
    }

    pub fn plug_ctx(&self, ctxs: &[SCtx], vals: &[STerm]) -> Result<SCtx, PlugError> {
        Ok(match self {
            SMECtx::Hole => SCtx::Hole,
            SMECtx::AppL(e, c) => SCtx::app_l(e.plug_ctx(ctxs, vals)?, c.plug(ctxs, vals)?),
            SMECtx::AppR(c, e) => SCtx::app_r(c.plug(ctxs, vals)?, e.plug_ctx(ctxs, vals)?),
            SMECtx::Reset(e) => SCtx::reset(e.plug_ctx(ctxs, vals)?),
            SMECtx::Star(i, e) => get(ctxs, *i)?.compose(&e.plug_ctx(ctxs, vals)?),
        })
    }

    /// `F♦[e, Ē, Γ]`
    pub fn plug(&self, e: STerm, ctxs: &[SCtx], vals: &[STerm]) -> Result<STerm, PlugError> {
        Ok(self.plug_ctx(ctxs, vals)?.plug(e))
    }

    pub fn from_ctx(e: &SCtx) -> SMECtx {
        match e {
            SCtx::Hole => SMECtx::Hole,
            SCtx::AppL(e, t) => SMECtx::AppL(Box::new(SMECtx::from_ctx(e)), Box::new(SMCtx::from_term(t))),
            SCtx::AppR(t, e) => SMECtx::AppR(Box::new(SMCtx::from_term(t)), Box::new(SMECtx::from_ctx(e))),
            SCtx::Reset(e) => SMECtx::Reset(Box::new(SMECtx::from_ctx(e))),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, SMECtx::Star(_, e) if **e == SMECtx::Hole)
    }

    /// No reset and no star on the path to the hole.
    pub fn is_pure(&self) -> bool {
        match self {
            SMECtx::Hole => true,
            SMECtx::AppL(e, _) | SMECtx::AppR(_, e) => e.is_pure(),
            SMECtx::Reset(_) | SMECtx::Star(..) => false,
        }
    }
}

impl fmt::Display for SMCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SMCtx::Var(x) => write!(f, "{x}"),
            SMCtx::Idx(j) => write!(f, "#{j}"),
            SMCtx::Lam(x, c) => write!(f, "(lam {x} {c})"),
            SMCtx::Shift(x, c) => write!(f, "(shift {x} {c})"),
            SMCtx::App(a, b) => write!(f, "({a} {b})"),
            SMCtx::Reset(c) => write!(f, "(reset {c})"),
            SMCtx::Star(i, c) => write!(f, "(star {i} {c})"),
        }
    }
}

impl fmt::Display for SMECtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SMECtx::Hole => write!(f, "_"),
            SMECtx::AppL(e, c) => write!(f, "({e} {c})"),
            SMECtx::AppR(c, e) => write!(f, "({c} {e})"),
            SMECtx::Reset(e) => write!(f, "(reset {e})"),
            SMECtx::Star(i, e) => write!(f, "(star {i} {e})"),
        }
    }
}

/// Exhaustive enumeration of contexts over an environment with `ctxs`
/// evaluation contexts and `vals` values, by exact constructor count.
pub struct SEnumerator {
    ctxs: usize,
    vals: usize,
    memo_c: HashMap<(usize, usize, bool), Vec<SMCtx>>,
    memo_e: HashMap<usize, Vec<SMECtx>>,
}

impl SEnumerator {
    pub fn new(ctxs: usize, vals: usize) -> Self {
        SEnumerator {
            ctxs,
            vals,
            memo_c: HashMap::new(),
            memo_e: HashMap::new(),
        }
    }

    pub fn exact(&mut self, n: usize, depth: usize, value_only: bool) -> Vec<SMCtx> {
        if let Some(v) = self.memo_c.get(&(n, depth, value_only)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(BINDERS[..depth].iter().map(|b| SMCtx::Var(b.to_string())));
            out.extend((1..=self.vals).map(SMCtx::Idx));
        }
        if n >= 2 && depth < BINDERS.len() {
            for b in self.exact(n - 1, depth + 1, false) {
                out.push(SMCtx::Lam(BINDERS[depth].to_string(), Box::new(b)));
            }
        }
        if !value_only && n >= 3 {
            for a in 1..n - 1 {
                let lefts = self.exact(a, depth, false);
                let rights = self.exact(n - 1 - a, depth, false);
                for l in &lefts {
                    for r in &rights {
                        out.push(SMCtx::App(Box::new(l.clone()), Box::new(r.clone())));
                    }
                }
            }
        }
        if !value_only && n >= 2 {
            let inner = self.exact(n - 1, depth, false);
            for c in &inner {
                out.push(SMCtx::Reset(Box::new(c.clone())));
            }
            if depth < BINDERS.len() {
                for b in self.exact(n - 1, depth + 1, false) {
                    out.push(SMCtx::Shift(BINDERS[depth].to_string(), Box::new(b)));
                }
            }
            for i in 1..=self.ctxs {
                for c in &inner {
                    out.push(SMCtx::Star(i, Box::new(c.clone())));
                }
            }
        }
        self.memo_c.insert((n, depth, value_only), out.clone());
        out
    }

    /// Evaluation contexts of exactly size `n`; term slots are closed.
    pub fn exact_e(&mut self, n: usize) -> Vec<SMECtx> {
        if let Some(v) = self.memo_e.get(&n) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.push(SMECtx::Hole);
        }
        if n >= 3 {
            for a in 1..n - 1 {
                let b = n - 1 - a;
                let es = self.exact_e(a);
                for e in &es {
                    for c in self.exact(b, 0, false) {
                        out.push(SMECtx::AppL(Box::new(e.clone()), Box::new(c)));
                    }
                }
                let vs = self.exact(a, 0, true);
                for v in &vs {
                    for e in self.exact_e(b) {
                        out.push(SMECtx::AppR(Box::new(v.clone()), Box::new(e)));
                    }
                }
            }
        }
        if n >= 2 {
            let inner = self.exact_e(n - 1);
            for e in &inner {
                out.push(SMECtx::Reset(Box::new(e.clone())));
            }
            for i in 1..=self.ctxs {
                for e in &inner {
                    out.push(SMECtx::Star(i, Box::new(e.clone())));
                }
            }
        }
        self.memo_e.insert(n, out.clone());
        out
    }

    pub fn up_to(&mut self, size: usize, value_only: bool) -> Vec<SMCtx> {
        (1..=size).flat_map(|n| self.exact(n, 0, value_only)).collect()
    }

    pub fn up_to_e(&mut self, size: usize) -> Vec<SMECtx> {
        (1..=size).flat_map(|n| self.exact_e(n)).collect()
    }
}

/// Closed terms with at most `size` constructors.
pub fn closed_sterms(size: usize) -> Vec<STerm> {
    SEnumerator::new(0, 0)
        .up_to(size, false)
        .into_iter()
        .filter_map(|c| c.plug(&[], &[]).ok())
        .collect()
}

/// Closed pure evaluation contexts with at most `size` constructors.
pub fn pure_contexts(size: usize) -> Vec<SCtx> {
    SEnumerator::new(0, 0)
        .up_to_e(size)
        .into_iter()
        .filter(SMECtx::is_pure)
        .filter_map(|e| e.plug_ctx(&[], &[]).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lamshift::syntax::parse_sterm;

    #[test]
    fn small_counts() {
        let mut en = SEnumerator::new(0, 0);
        let two: Vec<String> = en.exact(2, 0, false).iter().map(ToString::to_string).collect();
        assert_eq!(two, vec!["(lam x x)", "(shift x x)"]);
        assert!(en.exact(1, 0, false).is_empty());
        let mut en = SEnumerator::new(1, 1);
        assert_eq!(en.exact(1, 0, true), vec![SMCtx::Idx(1)]);
        assert_eq!(en.exact_e(2).len(), 2);
    }

    #[test]
    fn star_plugs_into_contexts() {
        let ctxs = vec![SCtx::reset(SCtx::Hole)];
        let vals = vec![parse_sterm("(lam z z)").unwrap()];
        let c = SMCtx::Star(1, Box::new(SMCtx::App(Box::new(SMCtx::Idx(1)), Box::new(SMCtx::Idx(1)))));
        assert_eq!(c.plug(&ctxs, &vals).unwrap().to_string(), "(reset ((lam z z) (lam z z)))");
        assert!(SMCtx::Idx(2).plug(&ctxs, &vals).is_err());
        let e = SMECtx::Star(1, Box::new(SMECtx::AppL(Box::new(SMECtx::Hole), Box::new(SMCtx::Idx(1)))));
        assert_eq!(e.plug_ctx(&ctxs, &vals).unwrap().to_string(), "(reset (_ (lam z z)))");
    }

    #[test]
    fn enumerated_contexts_are_closed_and_pure_when_asked() {
        for t in closed_sterms(4) {
            assert!(t.is_closed(), "{t}");
        }
        let ps = pure_contexts(4);
        assert!(ps.contains(&SCtx::Hole));
        assert!(ps.iter().all(SCtx::is_pure));
        assert!(ps.iter().all(|e| e.free_vars().is_empty()));
    }
}
