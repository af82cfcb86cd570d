//! Transition system over states `(Ē, Γ, e)`: a sequence of evaluation
//! contexts, a sequence of values and an optional running term.

use std::fmt;

use super::contexts::{SEnumerator, SMCtx, SMECtx};
use super::reduction::{red_hat_s, step_s, SStep, Semantics};
use super::syntax::{SCtx, STerm};
use crate::lts::NotApplicable;

/// As for the multi-prompt states, a running value is moved into the
/// value environment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SState {
    pub ctxs: Vec<SCtx>,
    pub vals: Vec<STerm>,
    pub running: Option<STerm>,
}

impl SState {
    pub fn new(ctxs: Vec<SCtx>, mut vals: Vec<STerm>, running: Option<STerm>) -> SState {
        let running = match running {
            Some(t) if t.is_value() => {
                vals.push(t);
                None
            }
            other => other,
        };
        SState { ctxs, vals, running }
    }

    pub fn term(e: STerm) -> SState {
        SState::new(Vec::new(), Vec::new(), Some(e))
    }

    pub fn is_env_only(&self) -> bool {
        self.running.is_none()
    }

    pub fn canonical(&self) -> SState {
        SState {
            ctxs: self.ctxs.iter().map(SCtx::canonical).collect(),
            vals: self.vals.iter().map(STerm::canonical).collect(),
            running: self.running.as_ref().map(STerm::canonical),
        }
    }

    pub fn alpha_eq(&self, other: &SState) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for SState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: Vec<String>| xs.join(", ");
        write!(
            f,
            "[{} ; {}",
            list(self.ctxs.iter().map(ToString::to_string).collect()),
            list(self.vals.iter().map(ToString::to_string).collect())
        )?;
        if let Some(e) = &self.running {
            write!(f, " | {e}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SLabel {
    Tau,
    LamTest(usize, SMCtx),
    ValFlag,
    StuckTest(SMECtx),
    CtxTest(usize, SMCtx),
    PureFlag(usize),
    SplitCtx(usize),
}

impl SLabel {
    /// Passive labels carry no information about the tested contexts and
    /// correspond to no reduction step.
    pub fn is_passive(&self) -> bool {
        matches!(self, SLabel::ValFlag | SLabel::CtxTest(..))
    }
}

impl fmt::Display for SLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SLabel::Tau => write!(f, "tau"),
            SLabel::LamTest(j, c) => write!(f, "lam {j} {c}"),
            SLabel::ValFlag => write!(f, "val"),
            SLabel::StuckTest(e) => write!(f, "stuck {e}"),
            SLabel::CtxTest(i, c) => write!(f, "ctx {i} {c}"),
            SLabel::PureFlag(i) => write!(f, "pure {i}"),
            SLabel::SplitCtx(i) => write!(f, "split {i}"),
        }
    }
}

fn entry<T>(xs: &[T], i: usize) -> Result<&T, NotApplicable> {
    if i == 0 || i > xs.len() {
        Err(NotApplicable::IndexOutOfRange {
            index: i,
            size: xs.len(),
        })
    } else {
        Ok(&xs[i - 1])
    }
}

fn env_only(s: &SState) -> Result<(), NotApplicable> {
    if s.running.is_some() {
        Err(NotApplicable::NotEnvOnly)
    } else {
        Ok(())
    }
}

fn value_param(c: &SMCtx) -> Result<(), NotApplicable> {
    if c.is_value_ctx() {
        Ok(())
    } else {
        Err(NotApplicable::WrongKind {
            index: 0,
            expected: "value context",
        })
    }
}

pub fn tau_s(s: &SState) -> Option<SState> {
    match step_s(s.running.as_ref()?) {
        SStep::Reduced(t, _) => Some(SState::new(s.ctxs.clone(), s.vals.clone(), Some(t))),
        _ => None,
    }
}

pub fn apply_label_s(s: &SState, l: &SLabel, sem: Semantics) -> Result<SState, NotApplicable> {
    let with_running = |e: STerm| SState::new(s.ctxs.clone(), s.vals.clone(), Some(e));
    match l {
        SLabel::Tau => {
            if s.running.is_none() {
                return Err(NotApplicable::NoRunning);
            }
            tau_s(s).ok_or(NotApplicable::NoStep)
        }
        SLabel::LamTest(j, c) => {
            env_only(s)?;
            value_param(c)?;
            match entry(&s.vals, *j)? {
                STerm::Lam(x, body) => Ok(with_running(body.subst(x, &c.plug(&s.ctxs, &s.vals)?))),
                _ => Err(NotApplicable::WrongKind {
                    index: *j,
                    expected: "abstraction",
                }),
            }
        }
        SLabel::ValFlag => {
            env_only(s)?;
            Ok(s.clone())
        }
        SLabel::StuckTest(f) => {
            let e = s.running.as_ref().ok_or(NotApplicable::NoRunning)?;
            let plugged = f.plug(e.clone(), &s.ctxs, &s.vals)?;
            match step_s(e) {
                SStep::Stuck { .. } => Ok(with_running(red_hat_s(&plugged))),
                _ if sem == Semantics::Original => Ok(with_running(plugged)),
                _ => Err(NotApplicable::NotStuck),
            }
        }
        SLabel::CtxTest(i, c) => {
            env_only(s)?;
            value_param(c)?;
            let ctx = entry(&s.ctxs, *i)?;
            Ok(with_running(ctx.plug(c.plug(&s.ctxs, &s.vals)?)))
        }
        SLabel::PureFlag(i) => {
            env_only(s)?;
            if entry(&s.ctxs, *i)?.is_pure() {
                Ok(s.clone())
            } else {
                Err(NotApplicable::WrongKind {
                    index: *i,
                    expected: "pure context",
                })
            }
        }
        SLabel::SplitCtx(i) => {
            env_only(s)?;
            let (f, e) = entry(&s.ctxs, *i)?
                .split_innermost_reset()
                .ok_or(NotApplicable::WrongKind {
                    index: *i,
                    expected: "impure context",
                })?;
            let mut ctxs = s.ctxs.clone();
            ctxs.push(f.compose(&SCtx::reset(SCtx::Hole)));
            ctxs.push(SCtx::reset(e));
            Ok(SState::new(ctxs, s.vals.clone(), None))
        }
    }
}

/// Every label applicable to `s` whose context parameter has at most
/// `ctx_size` constructors.
pub fn enumerate_labels_s(s: &SState, ctx_size: usize, sem: Semantics) -> Vec<SLabel> {
    let mut en = SEnumerator::new(s.ctxs.len(), s.vals.len());
    let mut out = Vec::new();
    match &s.running {
        Some(e) => {
            let stuck = match step_s(e) {
                SStep::Reduced(..) => {
                    out.push(SLabel::Tau);
                    false
                }
                SStep::Stuck { .. } => true,
                SStep::Value | SStep::Open(_) => return out,
            };
            if stuck || sem == Semantics::Original {
                out.extend(en.up_to_e(ctx_size).into_iter().map(SLabel::StuckTest));
            }
        }
        None => {
            let cvs = en.up_to(ctx_size, true);
            for (j, v) in s.vals.iter().enumerate() {
                if matches!(v, STerm::Lam(..)) {
                    out.extend(cvs.iter().map(|c| SLabel::LamTest(j + 1, c.clone())));
                }
            }
            out.push(SLabel::ValFlag);
            for (i, c) in s.ctxs.iter().enumerate() {
                out.extend(cvs.iter().map(|v| SLabel::CtxTest(i + 1, v.clone())));
                out.push(if c.is_pure() {
                    SLabel::PureFlag(i + 1)
                } else {
                    SLabel::SplitCtx(i + 1)
                });
            }
        }
    }
    out
}
