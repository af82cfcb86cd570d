use std::collections::BTreeSet;
use std::fmt;

use crate::error::SyntaxError;
use crate::parse::{read_one, Pos, SExp};
use crate::syntax::{fresh_name, Name};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum STerm {
    Var(Name),
    Lam(Name, Box<STerm>),
    App(Box<STerm>, Box<STerm>),
    Reset(Box<STerm>),
    Shift(Name, Box<STerm>),
}

/// Evaluation contexts `F`, outside-in. A context is pure when no `Reset`
/// frame sits on the path to the hole.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SCtx {
    Hole,
    AppL(Box<SCtx>, Box<STerm>),
    AppR(Box<STerm>, Box<SCtx>),
    Reset(Box<SCtx>),
}

impl STerm {
    pub fn var(x: &str) -> STerm {
        STerm::Var(x.to_string())
    }

    pub fn lam(x: &str, b: STerm) -> STerm {
        STerm::Lam(x.to_string(), Box::new(b))
    }

    pub fn app(a: STerm, b: STerm) -> STerm {
        STerm::App(Box::new(a), Box::new(b))
    }

    pub fn reset(b: STerm) -> STerm {
        STerm::Reset(Box::new(b))
    }

    pub fn shift(k: &str, b: STerm) -> STerm {
        STerm::Shift(k.to_string(), Box::new(b))
    }

    /// `(λx.x x) (λx.x x)`
    pub fn omega() -> STerm {
        let w = STerm::lam("x", STerm::app(STerm::var("x"), STerm::var("x")));
        STerm::app(w.clone(), w)
    }

    pub fn is_value(&self) -> bool {
        matches!(self, STerm::Lam(..) | STerm::Var(_))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut Vec::new(), &mut out);
        out
    }

    fn fv_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            STerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            STerm::Lam(x, b) | STerm::Shift(x, b) => {
                bound.push(x.clone());
                b.fv_into(bound, out);
                bound.pop();
            }
            STerm::App(a, b) => {
                a.fv_into(bound, out);
                b.fv_into(bound, out);
            }
            STerm::Reset(b) => b.fv_into(bound, out),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution `self[x := v]`.
    pub fn subst(&self, x: &str, v: &STerm) -> STerm {
        let fv = v.free_vars();
        self.subst_with(x, v, &fv)
    }

    fn subst_with(&self, x: &str, v: &STerm, fv: &BTreeSet<Name>) -> STerm {
        let binder = |y: &Name, b: &STerm| -> (Name, STerm) {
            if y == x {
                return (y.clone(), b.clone());
            }
            if fv.contains(y) {
                let mut avoid = b.free_vars();
                avoid.extend(fv.iter().cloned());
                avoid.insert(x.to_string());
                let z = fresh_name(y, &avoid);
                let b = b.subst(y, &STerm::Var(z.clone()));
                (z, b.subst_with(x, v, fv))
            } else {
                (y.clone(), b.subst_with(x, v, fv))
            }
        };
        match self {
            STerm::Var(y) if y == x => v.clone(),
            STerm::Var(_) => self.clone(),
            STerm::Lam(y, b) => {
                let (y, b) = binder(y, b);
                STerm::Lam(y, Box::new(b))
            }
            STerm::Shift(y, b) => {
                let (y, b) = binder(y, b);
                STerm::Shift(y, Box::new(b))
            }
            STerm::App(a, b) => STerm::app(a.subst_with(x, v, fv), b.subst_with(x, v, fv)),
            STerm::Reset(b) => STerm::reset(b.subst_with(x, v, fv)),
        }
    }

    /// Replaces free occurrences of `x` by `t` without renaming binders.
    /// Meant for closed `t`.
    pub fn replace_free(&self, x: &str, t: &STerm) -> STerm {
        match self {
            STerm::Var(y) if y == x => t.clone(),
            STerm::Var(_) => self.clone(),
            STerm::Lam(y, _) | STerm::Shift(y, _) if y == x => self.clone(),
            STerm::Lam(y, b) => STerm::Lam(y.clone(), Box::new(b.replace_free(x, t))),
            STerm::Shift(y, b) => STerm::Shift(y.clone(), Box::new(b.replace_free(x, t))),
            STerm::App(a, b) => STerm::app(a.replace_free(x, t), b.replace_free(x, t)),
            STerm::Reset(b) => STerm::reset(b.replace_free(x, t)),
        }
    }

    pub fn canonical(&self) -> STerm {
        self.canon(&mut Vec::new())
    }

    fn canon(&self, scope: &mut Vec<(Name, Name)>) -> STerm {
        match self {
            STerm::Var(x) => match scope.iter().rev().find(|(o, _)| o == x) {
                Some((_, n)) => STerm::Var(n.clone()),
                None => self.clone(),
            },
            STerm::Lam(x, b) | STerm::Shift(x, b) => {
                let n = format!("%{}", scope.len());
                scope.push((x.clone(), n.clone()));
                let b = Box::new(b.canon(scope));
                scope.pop();
                match self {
                    STerm::Lam(..) => STerm::Lam(n, b),
                    _ => STerm::Shift(n, b),
                }
            }
            STerm::App(a, b) => STerm::app(a.canon(scope), b.canon(scope)),
            STerm::Reset(b) => STerm::reset(b.canon(scope)),
        }
    }

    pub fn alpha_eq(&self, other: &STerm) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn size(&self) -> usize {
        match self {
            STerm::Var(_) => 1,
            STerm::Lam(_, b) | STerm::Shift(_, b) | STerm::Reset(b) => 1 + b.size(),
            STerm::App(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl SCtx {
    pub fn app_l(e: SCtx, t: STerm) -> SCtx {
        SCtx::AppL(Box::new(e), Box::new(t))
    }

    pub fn app_r(v: STerm, e: SCtx) -> SCtx {
        SCtx::AppR(Box::new(v), Box::new(e))
    }

    pub fn reset(e: SCtx) -> SCtx {
        SCtx::Reset(Box::new(e))
    }

    pub fn plug(&self, t: STerm) -> STerm {
        match self {
            SCtx::Hole => t,
            SCtx::AppL(e, a) => STerm::app(e.plug(t), (**a).clone()),
            SCtx::AppR(v, e) => STerm::app((**v).clone(), e.plug(t)),
            SCtx::Reset(e) => STerm::reset(e.plug(t)),
        }
    }

    /// `self[inner]`
    pub fn compose(&self, inner: &SCtx) -> SCtx {
        match self {
            SCtx::Hole => inner.clone(),
            SCtx::AppL(e, a) => SCtx::AppL(Box::new(e.compose(inner)), a.clone()),
            SCtx::AppR(v, e) => SCtx::AppR(v.clone(), Box::new(e.compose(inner))),
            SCtx::Reset(e) => SCtx::Reset(Box::new(e.compose(inner))),
        }
    }

    pub fn is_pure(&self) -> bool {
        match self {
            SCtx::Hole => true,
            SCtx::AppL(e, _) | SCtx::AppR(_, e) => e.is_pure(),
            SCtx::Reset(_) => false,
        }
    }

    /// `F[⟨E⟩]` with `E` pure: the innermost delimiter on the hole path.
    pub fn split_innermost_reset(&self) -> Option<(SCtx, SCtx)> {
        match self {
            SCtx::Hole => None,
            SCtx::AppL(e, a) => e
                .split_innermost_reset()
                .map(|(f, p)| (SCtx::AppL(Box::new(f), a.clone()), p)),
            SCtx::AppR(v, e) => e
                .split_innermost_reset()
                .map(|(f, p)| (SCtx::AppR(v.clone(), Box::new(f)), p)),
            SCtx::Reset(e) => match e.split_innermost_reset() {
                Some((f, p)) => Some((SCtx::Reset(Box::new(f)), p)),
                None => Some((SCtx::Hole, (**e).clone())),
            },
        }
    }

    pub fn frames(&self) -> usize {
        match self {
            SCtx::Hole => 0,
            SCtx::AppL(e, _) | SCtx::AppR(_, e) | SCtx::Reset(e) => 1 + e.frames(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SCtx::Hole => 1,
            SCtx::AppL(e, t) | SCtx::AppR(t, e) => 1 + e.size() + t.size(),
            SCtx::Reset(e) => 1 + e.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        // the hole is never under a binder
        let mut out = BTreeSet::new();
        let mut cur = self;
        loop {
            match cur {
                SCtx::Hole => return out,
                SCtx::AppL(e, t) | SCtx::AppR(t, e) => {
                    out.extend(t.free_vars());
                    cur = e;
                }
                SCtx::Reset(e) => cur = e,
            }
        }
    }

    pub fn canonical(&self) -> SCtx {
        match self {
            SCtx::Hole => SCtx::Hole,
            SCtx::AppL(e, t) => SCtx::app_l(e.canonical(), t.canonical()),
            SCtx::AppR(t, e) => SCtx::app_r(t.canonical(), e.canonical()),
            SCtx::Reset(e) => SCtx::reset(e.canonical()),
        }
    }

    pub fn alpha_eq(&self, other: &SCtx) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for STerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            STerm::Var(x) => write!(f, "{x}"),
            STerm::Lam(x, b) => write!(f, "(lam {x} {b})"),
            STerm::App(a, b) => write!(f, "({a} {b})"),
            STerm::Reset(b) => write!(f, "(reset {b})"),
            STerm::Shift(k, b) => write!(f, "(shift {k} {b})"),
        }
    }
}

impl fmt::Display for SCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SCtx::Hole => write!(f, "_"),
            SCtx::AppL(e, a) => write!(f, "({e} {a})"),
            SCtx::AppR(v, e) => write!(f, "({v} {e})"),
            SCtx::Reset(e) => write!(f, "(reset {e})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax: `x (lam x ... e) (e1 e2 ...) (reset e) (shift k e)`, and
// `omega`. Contexts use `_` for the hole.

const FORMS: &[&str] = &["lam", "reset", "shift", "omega", "_"];

fn err(pos: Pos, msg: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        line: pos.0,
        col: pos.1,
        msg: msg.into(),
    }
}

fn name(s: &SExp) -> Result<Name, SyntaxError> {
    match s.atom() {
        Some(a) if !FORMS.contains(&a) && !a.starts_with('%') && a.parse::<i64>().is_err() => {
            Ok(a.to_string())
        }
        _ => Err(err(s.pos(), "expected a variable name")),
    }
}

const HOLE: &str = "\u{0}hole";

fn term_of(s: &SExp, holes: bool) -> Result<STerm, SyntaxError> {
    match s {
        SExp::Atom(a, p) => match a.as_str() {
            "omega" => Ok(STerm::omega()),
            "_" if holes => Ok(STerm::var(HOLE)),
            _ => name(s).map(STerm::Var).map_err(|_| err(*p, format!("unexpected `{a}`"))),
        },
        SExp::List(items, pos) => {
            let Some(head) = items.first() else {
                return Err(err(*pos, "empty application"));
            };
            match head.atom() {
                Some("lam") => {
                    if items.len() < 3 {
                        return Err(err(*pos, "`lam` expects binders and a body"));
                    }
                    let mut body = term_of(items.last().unwrap(), holes)?;
                    for b in items[1..items.len() - 1].iter().rev() {
                        body = STerm::Lam(name(b)?, Box::new(body));
                    }
                    Ok(body)
                }
                Some("reset") => {
                    if items.len() != 2 {
                        return Err(err(*pos, "`reset` expects 1 argument"));
                    }
                    Ok(STerm::reset(term_of(&items[1], holes)?))
                }
                Some("shift") => {
                    if items.len() != 3 {
                        return Err(err(*pos, "`shift` expects a name and a body"));
                    }
                    Ok(STerm::Shift(name(&items[1])?, Box::new(term_of(&items[2], holes)?)))
                }
                _ => {
                    let mut it = items.iter();
                    let mut acc = term_of(it.next().unwrap(), holes)?;
                    if items.len() == 1 {
                        return Err(err(*pos, "application needs an argument"));
                    }
                    for a in it {
                        acc = STerm::app(acc, term_of(a, holes)?);
                    }
                    Ok(acc)
                }
            }
        }
    }
}

pub fn sterm_of_sexp(s: &SExp) -> Result<STerm, SyntaxError> {
    term_of(s, false)
}

pub fn parse_sterm(src: &str) -> Result<STerm, SyntaxError> {
    sterm_of_sexp(&read_one(src)?)
}

fn holes(t: &STerm) -> usize {
    match t {
        STerm::Var(x) => usize::from(x == HOLE),
        STerm::Lam(_, b) | STerm::Shift(_, b) | STerm::Reset(b) => holes(b),
        STerm::App(a, b) => holes(a) + holes(b),
    }
}

pub fn sctx_of_sexp(s: &SExp) -> Result<SCtx, SyntaxError> {
    let t = term_of(s, true)?;
    if holes(&t) != 1 {
        return Err(err(s.pos(), "a context needs exactly one hole `_`"));
    }
    fn go(t: &STerm, pos: Pos) -> Result<SCtx, SyntaxError> {
        match t {
            STerm::Var(x) if x == HOLE => Ok(SCtx::Hole),
            STerm::App(a, b) if holes(a) == 1 => Ok(SCtx::app_l(go(a, pos)?, (**b).clone())),
            STerm::App(a, b) if a.is_value() => Ok(SCtx::app_r((**a).clone(), go(b, pos)?)),
            STerm::Reset(b) => Ok(SCtx::reset(go(b, pos)?)),
            _ => Err(err(pos, "the hole `_` is not in evaluation position")),
        }
    }
    go(&t, s.pos())
}

pub fn parse_sctx(src: &str) -> Result<SCtx, SyntaxError> {
    sctx_of_sexp(&read_one(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> STerm {
        parse_sterm(s).unwrap()
    }

    #[test]
    fn round_trip() {
        for s in ["(lam x (reset (x (shift k (k x)))))", "((lam y y) (lam z z))", "x"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("(lam x y z x)"), t("(lam x (lam y (lam z x)))"));
        assert_eq!(parse_sctx("(reset ((lam x x) _))").unwrap().to_string(), "(reset ((lam x x) _))");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_sterm("(shift k)").is_err());
        assert!(parse_sterm("(reset a b)").is_err());
        assert!(parse_sterm("(lam reset x)").is_err());
        assert!(parse_sctx("(lam x _)").is_err());
        assert!(parse_sctx("(_ _)").is_err());
        assert!(parse_sctx("((x x) _)").is_err());
    }

    #[test]
    fn substitution_avoids_capture() {
        let e = t("(lam y (x y))").subst("x", &t("y"));
        assert!(e.alpha_eq(&t("(lam z (y z))")));
        let e = t("(shift y (x y))").subst("x", &t("y"));
        assert_eq!(e.free_vars(), BTreeSet::from(["y".to_string()]));
        assert_eq!(t("(lam x x)").subst("x", &t("y")), t("(lam x x)"));
    }

    #[test]
    fn purity_and_split() {
        let f = parse_sctx("((reset ((lam x x) (reset (_ y)))) z)").unwrap();
        assert!(!f.is_pure());
        let (outer, inner) = f.split_innermost_reset().unwrap();
        assert_eq!(outer.to_string(), "((reset ((lam x x) _)) z)");
        assert_eq!(inner.to_string(), "(_ y)");
        assert!(inner.is_pure());
        assert_eq!(outer.compose(&SCtx::reset(inner)), f);
        assert!(SCtx::Hole.split_innermost_reset().is_none());
    }
}
