//! The shift/reset bisimulation game and its justifier. A pair is justified
//! against one member of the relation by a common skeleton: every entry of
//! the two target states is the same multi-hole context filled with the
//! member's two environments (weakening, up to related contexts), and the
//! running terms are either a context over the environments or an
//! evaluation context around the member's running terms.

use std::collections::BTreeSet;
use std::fmt;

use super::contexts::{SMCtx, SMECtx};
use super::lts::{apply_label_s, enumerate_labels_s, tau_s, SLabel, SState};
use super::reduction::{reify, Semantics};
use super::syntax::{SCtx, STerm};
use crate::bisim::{Candidate, Expanded, Game, Justifier, Technique, UpToSpec};
use crate::syntax::Name;

pub struct ShiftGame {
    pub semantics: Semantics,
    pub ctx_size: usize,
}

impl ShiftGame {
    pub fn new(semantics: Semantics, ctx_size: usize) -> Self {
        ShiftGame { semantics, ctx_size }
    }
}

impl Game for ShiftGame {
    type State = SState;
    type Label = SLabel;

    fn labels(&self, s: &SState) -> Vec<SLabel> {
        enumerate_labels_s(s, self.ctx_size, self.semantics)
    }

    fn apply(&self, s: &SState, l: &SLabel) -> Option<SState> {
        apply_label_s(s, l, self.semantics).ok()
    }

    fn tau(&self, s: &SState) -> Option<SState> {
        tau_s(s)
    }

    fn is_tau(&self, l: &SLabel) -> bool {
        *l == SLabel::Tau
    }

    fn is_passive(&self, l: &SLabel) -> bool {
        l.is_passive()
    }

    fn canonical(&self, s: &SState) -> SState {
        s.canonical()
    }

    fn same(&self, a: &SState, b: &SState) -> bool {
        a.alpha_eq(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SRun {
    None,
    /// A context over the member's environments (member is env-only).
    Ctx(SMCtx),
    /// An evaluation context around the member's running terms.
    Eval(SMECtx),
}

impl fmt::Display for SRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SRun::None => write!(f, "-"),
            SRun::Ctx(c) => write!(f, "{c}"),
            SRun::Eval(e) => write!(f, "{e}[e]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShiftJust {
    pub member: usize,
    pub ctxs: Vec<SMECtx>,
    pub vals: Vec<SMCtx>,
    pub run: SRun,
    pub techniques: BTreeSet<Technique>,
}

impl fmt::Display for ShiftJust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.techniques.iter().map(ToString::to_string).collect();
        let cs: Vec<String> = self.ctxs.iter().map(ToString::to_string).collect();
        let vs: Vec<String> = self.vals.iter().map(ToString::to_string).collect();
        write!(
            f,
            "pair {} via {{{}}}: [{} ; {} | {}]",
            self.member,
            ts.join(", "),
            cs.join(", "),
            vs.join(", "),
            self.run
        )
    }
}

/// Rebuilds one side of a justified pair from the member state.
pub fn rebuild_s(member: &SState, ctxs: &[SMECtx], vals: &[SMCtx], run: &SRun) -> Option<SState> {
    let (me, mv) = (&member.ctxs, &member.vals);
    let ctxs = ctxs.iter().map(|c| c.plug_ctx(me, mv).ok()).collect::<Option<Vec<_>>>()?;
    let vals = vals.iter().map(|c| c.plug(me, mv).ok()).collect::<Option<Vec<_>>>()?;
    let running = match run {
        SRun::None => None,
        SRun::Ctx(c) => Some(c.plug(me, mv).ok()?),
        SRun::Eval(e) => Some(e.plug(member.running.clone()?, me, mv).ok()?),
    };
    Some(SState { ctxs, vals, running })
}

/// Strips `outer` off `t`, returning `u` with `outer[u] = t`.
fn strip(outer: &SCtx, t: &STerm) -> Option<STerm> {
    match (outer, t) {
        (SCtx::Hole, _) => Some(t.clone()),
        (SCtx::AppL(e, a), STerm::App(x, y)) if a.alpha_eq(y) => strip(e, x),
        (SCtx::AppR(v, e), STerm::App(x, y)) if v.alpha_eq(x) => strip(e, y),
        (SCtx::Reset(e), STerm::Reset(x)) => strip(e, x),
        _ => None,
    }
}

fn strip_ctx(outer: &SCtx, c: &SCtx) -> Option<SCtx> {
    match (outer, c) {
        (SCtx::Hole, _) => Some(c.clone()),
        (SCtx::AppL(e, a), SCtx::AppL(x, y)) if a.alpha_eq(y) => strip_ctx(e, x),
        (SCtx::AppR(v, e), SCtx::AppR(x, y)) if v.alpha_eq(x) => strip_ctx(e, y),
        (SCtx::Reset(e), SCtx::Reset(x)) => strip_ctx(e, x),
        _ => None,
    }
}

struct Matcher<'a> {
    ml: &'a SState,
    mr: &'a SState,
}

impl Matcher<'_> {
    fn stars(&self) -> impl Iterator<Item = (usize, &SCtx, &SCtx)> {
        self.ml
            .ctxs
            .iter()
            .zip(&self.mr.ctxs)
            .enumerate()
            .filter(|(_, (a, b))| **a != SCtx::Hole || **b != SCtx::Hole)
            .map(|(i, (a, b))| (i + 1, a, b))
    }

    fn c(&self, l: &STerm, r: &STerm, scope: &mut Vec<(Name, Name)>) -> Option<SMCtx> {
        for (j, (a, b)) in self.ml.vals.iter().zip(&self.mr.vals).enumerate() {
            if a.alpha_eq(l) && b.alpha_eq(r) {
                return Some(SMCtx::Idx(j + 1));
            }
        }
        let structural = match (l, r) {
            (STerm::Var(x), STerm::Var(y)) => {
                let bx = scope.iter().rposition(|(a, _)| a == x);
                let by = scope.iter().rposition(|(_, b)| b == y);
                match (bx, by) {
                    (Some(i), Some(j)) if i == j => Some(SMCtx::Var(x.clone())),
                    (None, None) if x == y => Some(SMCtx::Var(x.clone())),
                    _ => None,
                }
            }
            (STerm::Lam(x, a), STerm::Lam(y, b)) | (STerm::Shift(x, a), STerm::Shift(y, b)) => {
                scope.push((x.clone(), y.clone()));
                let body = self.c(a, b, scope);
                scope.pop();
                body.map(|b| match l {
                    STerm::Lam(..) => SMCtx::Lam(x.clone(), Box::new(b)),
                    _ => SMCtx::Shift(x.clone(), Box::new(b)),
                })
            }
            (STerm::App(a, b), STerm::App(c, d)) => {
                match (self.c(a, c, scope), self.c(b, d, scope)) {
                    (Some(f), Some(g)) => Some(SMCtx::App(Box::new(f), Box::new(g))),
                    _ => None,
                }
            }
            (STerm::Reset(a), STerm::Reset(b)) => self.c(a, b, scope).map(|c| SMCtx::Reset(Box::new(c))),
            _ => None,
        };
        if structural.is_some() {
            return structural;
        }
        for (i, el, er) in self.stars() {
            if let (Some(a), Some(b)) = (strip(el, l), strip(er, r)) {
                if let Some(c) = self.c(&a, &b, scope) {
                    return Some(SMCtx::Star(i, Box::new(c)));
                }
            }
        }
        None
    }

    fn ce(&self, l: &SCtx, r: &SCtx) -> Option<SMECtx> {
        for (i, (a, b)) in self.ml.ctxs.iter().zip(&self.mr.ctxs).enumerate() {
            if a.alpha_eq(l) && b.alpha_eq(r) {
                return Some(SMECtx::Star(i + 1, Box::new(SMECtx::Hole)));
            }
        }
        let mut scope = Vec::new();
        let structural = match (l, r) {
            (SCtx::Hole, SCtx::Hole) => Some(SMECtx::Hole),
            (SCtx::AppL(e, a), SCtx::AppL(f, b)) => self
                .ce(e, f)
                .zip(self.c(a, b, &mut scope))
                .map(|(x, y)| SMECtx::AppL(Box::new(x), Box::new(y))),
            (SCtx::AppR(a, e), SCtx::AppR(b, f)) => self
                .c(a, b, &mut scope)
                .filter(SMCtx::is_value_ctx)
                .zip(self.ce(e, f))
                .map(|(x, y)| SMECtx::AppR(Box::new(x), Box::new(y))),
            (SCtx::Reset(e), SCtx::Reset(f)) => self.ce(e, f).map(|x| SMECtx::Reset(Box::new(x))),
            _ => None,
        };
        if structural.is_some() {
            return structural;
        }
        for (i, el, er) in self.stars() {
            if let (Some(a), Some(b)) = (strip_ctx(el, l), strip_ctx(er, r)) {
                if let Some(c) = self.ce(&a, &b) {
                    return Some(SMECtx::Star(i, Box::new(c)));
                }
            }
        }
        None
    }

    /// An evaluation context `F♦` with `l = F♦[e_l]` and `r = F♦[e_r]`.
    fn e(&self, l: &STerm, r: &STerm) -> Option<SMECtx> {
        let (el, er) = (self.ml.running.as_ref()?, self.mr.running.as_ref()?);
        if el.alpha_eq(l) && er.alpha_eq(r) {
            return Some(SMECtx::Hole);
        }
        let mut scope = Vec::new();
        let structural = match (l, r) {
            (STerm::App(a, b), STerm::App(c, d)) => self
                .e(a, c)
                .zip(self.c(b, d, &mut scope))
                .map(|(x, y)| SMECtx::AppL(Box::new(x), Box::new(y)))
                .or_else(|| {
                    self.c(a, c, &mut scope)
                        .filter(SMCtx::is_value_ctx)
                        .zip(self.e(b, d))
                        .map(|(x, y)| SMECtx::AppR(Box::new(x), Box::new(y)))
                }),
            (STerm::Reset(a), STerm::Reset(b)) => self.e(a, b).map(|x| SMECtx::Reset(Box::new(x))),
            _ => None,
        };
        if structural.is_some() {
            return structural;
        }
        for (i, cl, cr) in self.stars() {
            if let (Some(a), Some(b)) = (strip(cl, l), strip(cr, r)) {
                if let Some(c) = self.e(&a, &b) {
                    return Some(SMECtx::Star(i, Box::new(c)));
                }
            }
        }
        None
    }
}

/// Whether the trivial entries of a skeleton list copy the whole member
/// environment, in order, as a prefix.
fn is_prefix_copy(idx: &[Option<usize>], member_len: usize) -> bool {
    idx.len() >= member_len && (0..member_len).all(|k| idx[k] == Some(k + 1))
}

fn increasing(idx: &[Option<usize>]) -> bool {
    let xs: Vec<usize> = idx.iter().flatten().copied().collect();
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Anti-unifies the target pair `(l, r)` against one member.
pub fn match_member(member: &(SState, SState), index: usize, l: &SState, r: &SState) -> Option<ShiftJust> {
    let (ml, mr) = member;
    if l.ctxs.len() != r.ctxs.len() || l.vals.len() != r.vals.len() {
        return None;
    }
    if l.running.is_some() != r.running.is_some() || ml.running.is_some() != mr.running.is_some() {
        return None;
    }
    if ml.ctxs.len() != mr.ctxs.len() || ml.vals.len() != mr.vals.len() {
        return None;
    }
    let m = Matcher { ml, mr };
    let run = match (&l.running, &r.running, &ml.running) {
        (None, None, None) => SRun::None,
        (None, None, Some(_)) => return None,
        (Some(a), Some(b), None) => SRun::Ctx(m.c(a, b, &mut Vec::new())?),
        (Some(a), Some(b), Some(_)) => SRun::Eval(m.e(a, b)?),
        _ => return None,
    };
    let ctxs = l
        .ctxs
        .iter()
        .zip(&r.ctxs)
        .map(|(a, b)| m.ce(a, b))
        .collect::<Option<Vec<_>>>()?;
    let vals = l
        .vals
        .iter()
        .zip(&r.vals)
        .map(|(a, b)| m.c(a, b, &mut Vec::new()))
        .collect::<Option<Vec<_>>>()?;

    let ctx_idx: Vec<Option<usize>> = ctxs
        .iter()
        .map(|c| match c {
            SMECtx::Star(i, e) if **e == SMECtx::Hole => Some(*i),
            _ => None,
        })
        .collect();
    let val_idx: Vec<Option<usize>> = vals
        .iter()
        .map(|c| match c {
            SMCtx::Idx(j) => Some(*j),
            _ => None,
        })
        .collect();
    let mut techniques = BTreeSet::new();
    let built = ctx_idx.iter().chain(&val_idx).any(Option::is_none)
        || !increasing(&ctx_idx)
        || !increasing(&val_idx)
        || matches!(run, SRun::Ctx(_))
        || matches!(&run, SRun::Eval(e) if *e != SMECtx::Hole);
    if built {
        techniques.insert(if ml.running.is_some() {
            Technique::UtrCtx
        } else {
            Technique::UtrCtxV
        });
    }
    if !is_prefix_copy(&ctx_idx, ml.ctxs.len()) || !is_prefix_copy(&val_idx, ml.vals.len()) {
        techniques.insert(Technique::Weak);
    }
    Some(ShiftJust {
        member: index,
        ctxs,
        vals,
        run,
        techniques,
    })
}

/// The finite relation with its up-to closure, as a justifier.
pub struct ShiftIndex {
    pairs: Vec<(SState, SState)>,
    spec: UpToSpec,
}

impl ShiftIndex {
    pub fn new(exp: &Expanded<SState>, spec: UpToSpec) -> Self {
        ShiftIndex {
            pairs: exp.pairs.clone(),
            spec,
        }
    }

    pub fn pair(&self, i: usize) -> &(SState, SState) {
        &self.pairs[i]
    }
}

impl Justifier<ShiftGame> for ShiftIndex {
    type Just = ShiftJust;

    fn justify(&self, l: &SState, r: &SState, strong_only: bool, hint: Option<usize>) -> Option<ShiftJust> {
        let order = hint.into_iter().chain((0..self.pairs.len()).filter(|&i| Some(i) != hint));
        for i in order {
            if let Some(j) = match_member(&self.pairs[i], i, l, r) {
                if self.spec.permits(&j.techniques, strong_only) {
                    return Some(j);
                }
            }
        }
        None
    }

    fn replay(&self, j: &ShiftJust) -> Option<(SState, SState)> {
        let (ml, mr) = self.pairs.get(j.member)?;
        Some((
            rebuild_s(ml, &j.ctxs, &j.vals, &j.run)?,
            rebuild_s(mr, &j.ctxs, &j.vals, &j.run)?,
        ))
    }

    fn techniques(&self, j: &ShiftJust) -> BTreeSet<Technique> {
        j.techniques.clone()
    }
}

// ---------------------------------------------------------------------------
// Candidate relations

fn pure_family(ctx_size: usize) -> Vec<SCtx> {
    super::contexts::pure_contexts(ctx_size)
}

/// `shift k (k e)` against `e`, for `k` not free in `e`, together with the
/// context pairs `⟨(λx.⟨E[x]⟩) □⟩, ⟨⟨□⟩⟩` and `⟨E⟩, ⟨□⟩` for every pure
/// `E` up to the size bound.
pub fn skkt_candidate(e: &STerm, ctx_size: usize) -> Candidate<SState> {
    let k = crate::syntax::fresh_name("k", &e.free_vars());
    let mut cand = Candidate::new("shift k (k e)");
    cand.seeds.push((
        SState::term(STerm::shift(&k, STerm::app(STerm::var(&k), e.clone()))),
        SState::term(e.clone()),
    ));
    let rr = SCtx::reset(SCtx::reset(SCtx::Hole));
    for ctx in pure_family(ctx_size) {
        let cap = SCtx::reset(SCtx::app_r(reify(&ctx), SCtx::Hole));
        cand.seeds.push((
            SState::new(vec![cap, rr.clone()], vec![], None),
            SState::new(vec![SCtx::reset(ctx), SCtx::reset(SCtx::Hole)], vec![], None),
        ));
    }
    cand
}

/// `(λx.shift k e1) e2` against `shift k ((λx.e1) e2)` for `k` not free in
/// `e2`, with the pairs `⟨E[(λx.shift k e1) □]⟩` and
/// `⟨(λx.e1[k := λy.⟨E[y]⟩]) □⟩` for pure `E`.
pub fn shift_under_lambda_candidate(x: &str, k: &str, e1: &STerm, e2: &STerm, ctx_size: usize) -> Candidate<SState> {
    let mut cand = Candidate::new("(lam x (shift k e1)) e2");
    let f = STerm::lam(x, STerm::shift(k, e1.clone()));
    cand.seeds.push((
        SState::term(STerm::app(f.clone(), e2.clone())),
        SState::term(STerm::shift(k, STerm::app(STerm::lam(x, e1.clone()), e2.clone()))),
    ));
    for ctx in pure_family(ctx_size) {
        let left = SCtx::reset(ctx.compose(&SCtx::app_r(f.clone(), SCtx::Hole)));
        let right = SCtx::reset(SCtx::app_r(STerm::lam(x, e1.subst(k, &reify(&ctx))), SCtx::Hole));
        cand.seeds.push((
            SState::new(vec![left], vec![], None),
            SState::new(vec![right], vec![], None),
        ));
    }
    cand
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::{audit_diacritical, check, distinguish, expand, replay_all, verify_strategy};
    use crate::lamshift::reduction::observable_s;
    use crate::lamshift::syntax::parse_sterm;
    use crate::reduction::ObsClass;

    fn t(s: &str) -> STerm {
        parse_sterm(s).unwrap()
    }

    fn run(cand: &Candidate<SState>, sem: Semantics, ctx_size: usize) -> bool {
        let g = ShiftGame::new(sem, ctx_size);
        let exp = expand(&g, cand, ctx_size, 0);
        let spec = UpToSpec::lamshift();
        let idx = ShiftIndex::new(&exp, spec.clone());
        let rep = check(&g, &exp, &idx, 40, true);
        if !rep.verdict.is_valid() {
            return false;
        }
        assert!(audit_diacritical(&idx, &rep.log, &spec));
        assert!(replay_all(&g, &idx, &rep.log).is_empty());
        true
    }

    #[test]
    fn skkt_with_a_diverging_term() {
        assert!(run(&skkt_candidate(&STerm::omega(), 4), Semantics::Original, 4));
    }

    #[test]
    fn skkt_fails_in_the_relaxed_semantics() {
        let g = ShiftGame::new(Semantics::Relaxed, 2);
        let v = t("(lam z z)");
        let l = SState::term(t("(shift k (k (lam z z)))"));
        let r = SState::term(v.clone());
        let st = distinguish(&g, &l, &r, 2, 20).expect("distinguished");
        assert!(verify_strategy(&g, &l, &r, &st, 20));
        // one move: the stuck side cannot flag a value, the value cannot be stuck-tested
        assert_eq!(st.moves(), 1);
        assert_eq!(observable_s(&t("(shift k (k (lam z z)))"), 10, Semantics::Relaxed).unwrap(), ObsClass::Stuck);
        assert_eq!(observable_s(&v, 10, Semantics::Relaxed).unwrap(), ObsClass::Value);
    }

    #[test]
    fn skkt_with_a_stuck_term() {
        let e = t("((lam q q) (shift j (j (lam z z))))");
        assert!(run(&skkt_candidate(&e, 4), Semantics::Original, 4));
    }

    #[test]
    fn skkt_candidate_is_refuted_in_the_relaxed_semantics() {
        let g = ShiftGame::new(Semantics::Relaxed, 2);
        let cand = skkt_candidate(&STerm::omega(), 2);
        let exp = expand(&g, &cand, 2, 0);
        let idx = ShiftIndex::new(&exp, UpToSpec::lamshift());
        // the diverging side never answers the stuck test, so this stays open
        assert_eq!(check(&g, &exp, &idx, 20, false).verdict.kind(), "unjustified");
    }

    #[test]
    fn shift_under_lambda() {
        let cand = shift_under_lambda_candidate("x", "k", &t("(k x)"), &STerm::omega(), 4);
        assert!(run(&cand, Semantics::Original, 4));
    }

    #[test]
    fn identity_is_justified_by_weakening_only() {
        let s = SState::new(vec![SCtx::reset(SCtx::Hole)], vec![t("(lam x x)")], None);
        let j = match_member(&(s.clone(), s.clone()), 0, &s, &s).unwrap();
        assert!(j.techniques.is_empty());
        let dropped = SState::new(vec![], vec![t("(lam x x)")], None);
        let j = match_member(&(s.clone(), s), 0, &dropped, &dropped).unwrap();
        assert_eq!(j.techniques, [Technique::Weak].into());
    }
}
