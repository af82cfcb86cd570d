//! Bounded environmental bisimulation games.
//!
//! The engine is generic over a [`Game`] (states, labels, the internal
//! step) and a [`Justifier`] that decides membership in the closure of a
//! finite candidate relation under up-to techniques, producing replayable
//! certificates.

pub mod relfile;
pub mod sharp;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Technique {
    Perm,
    Weak,
    Str,
    UtCtxV,
    UtCtx,
    UtrCtxV,
    UtrCtx,
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::Perm => "perm",
            Technique::Weak => "weak",
            Technique::Str => "str",
            Technique::UtCtxV => "utctxv",
            Technique::UtCtx => "utctx",
            Technique::UtrCtxV => "utrctxv",
            Technique::UtrCtx => "utrctx",
        })
    }
}

impl std::str::FromStr for Technique {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "perm" => Technique::Perm,
            "weak" => Technique::Weak,
            "str" => Technique::Str,
            "utctxv" => Technique::UtCtxV,
            "utctx" => Technique::UtCtx,
            "utrctxv" => Technique::UtrCtxV,
            "utrctx" => Technique::UtrCtx,
            other => return Err(format!("unknown technique `{other}`")),
        })
    }
}

/// The up-to techniques a justification may use, and the strong subset
/// allowed right after a passive transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpToSpec {
    pub techniques: BTreeSet<Technique>,
    pub strong: BTreeSet<Technique>,
    pub composition_depth: usize,
}

impl UpToSpec {
    pub fn standard() -> Self {
        use Technique::*;
        let all: BTreeSet<_> = [Perm, Weak, Str, UtCtxV, UtCtx].into();
        UpToSpec {
            strong: all.clone(),
            techniques: all,
            composition_depth: 4,
        }
    }

    pub fn star() -> Self {
        use Technique::*;
        UpToSpec {
            techniques: [Perm, Weak, UtrCtxV, UtrCtx].into(),
            strong: [Perm, Weak].into(),
            composition_depth: 3,
        }
    }

    pub fn lamshift() -> Self {
        use Technique::*;
        UpToSpec {
            techniques: [Weak, UtrCtxV, UtrCtx].into(),
            strong: [Weak].into(),
            composition_depth: 2,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.composition_depth = depth;
        self
    }

    pub fn restricted_to(mut self, techniques: &BTreeSet<Technique>) -> Self {
        self.techniques = self.techniques.intersection(techniques).copied().collect();
        self.strong = self.strong.intersection(&self.techniques).copied().collect();
        self
    }

    pub fn permits(&self, used: &BTreeSet<Technique>, strong_only: bool) -> bool {
        let pool = if strong_only {
            &self.strong
        } else {
            &self.techniques
        };
        used.len() <= self.composition_depth && used.is_subset(pool)
    }
}

pub trait Game {
    type State: Clone + Eq + Hash + fmt::Display + fmt::Debug;
    type Label: Clone + Eq + fmt::Display + fmt::Debug;

    fn labels(&self, s: &Self::State) -> Vec<Self::Label>;
    fn apply(&self, s: &Self::State, l: &Self::Label) -> Option<Self::State>;
    fn tau(&self, s: &Self::State) -> Option<Self::State>;
    fn is_tau(&self, l: &Self::Label) -> bool;
    fn is_passive(&self, l: &Self::Label) -> bool;
    /// A representative modulo the renamings the game is insensitive to.
    fn canonical(&self, s: &Self::State) -> Self::State;
    /// Equality up to bound names.
    fn same(&self, a: &Self::State, b: &Self::State) -> bool;
}

/// Constructive membership in the up-to closure of an expanded relation.
pub trait Justifier<G: Game> {
    type Just: Clone + fmt::Debug + fmt::Display;

    /// `hint` is the index of the pair whose transition produced `(l, r)`;
    /// implementations use it to look at related pairs first.
    fn justify(
        &self,
        l: &G::State,
        r: &G::State,
        strong_only: bool,
        hint: Option<usize>,
    ) -> Option<Self::Just>;
    /// Rebuilds the justified pair from the certificate alone.
    fn replay(&self, j: &Self::Just) -> Option<(G::State, G::State)>;
    fn techniques(&self, j: &Self::Just) -> BTreeSet<Technique>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// The deterministic τ-chain from `s`, with a flag telling whether it ended
/// in a state without τ.
pub fn tau_chain<G: Game>(g: &G, s: &G::State, fuel: usize) -> (Vec<G::State>, bool) {
    let mut out = vec![s.clone()];
    for _ in 0..fuel {
        match g.tau(out.last().unwrap()) {
            Some(n) => out.push(n),
            None => return (out, true),
        }
    }
    let done = g.tau(out.last().unwrap()).is_none();
    (out, done)
}

/// All weak `l`-successors of `s` within `fuel` τ-steps. The flag is true
/// when no chain was cut by the fuel bound, so the list is exhaustive.
pub fn weak_responses<G: Game>(
    g: &G,
    s: &G::State,
    l: &G::Label,
    fuel: usize,
) -> (Vec<G::State>, bool) {
    let (pre, pre_done) = tau_chain(g, s, fuel);
    if g.is_tau(l) {
        return (pre, pre_done);
    }
    let mut out = Vec::new();
    let mut complete = pre_done;
    for (k, st) in pre.iter().enumerate() {
        if let Some(next) = g.apply(st, l) {
            let (post, done) = tau_chain(g, &next, fuel - k);
            complete &= done;
            out.extend(post);
        }
    }
    (out, complete)
}

// ---------------------------------------------------------------------------
// Candidate relations

pub trait Rule<S>: Send + Sync {
    fn name(&self) -> &str;
    /// Conclusions of the rule for one premise pair.
    fn apply(&self, l: &S, r: &S, ctx_size: usize) -> Vec<(S, S)>;
}

pub struct Candidate<S> {
    pub name: String,
    pub seeds: Vec<(S, S)>,
    pub rules: Vec<Box<dyn Rule<S>>>,
}

impl<S> Candidate<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Candidate {
            name: name.into(),
            seeds: Vec::new(),
            rules: Vec::new(),
        }
    }
}

/// A finite stage of a candidate relation: every pair with the height of
/// its shortest derivation.
#[derive(Clone, Debug)]
pub struct Expanded<S> {
    pub pairs: Vec<(S, S)>,
    pub depth: Vec<usize>,
    pub origin: Vec<String>,
    pub parent: Vec<Option<usize>>,
    pub rule_depth: usize,
}

impl<S> Expanded<S> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs whose transitions are checked (the deepest layer is only used
    /// as justification material).
    pub fn checked(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.pairs.len()).filter(|&i| self.depth[i] < self.rule_depth.max(1))
    }
}

pub fn expand<G: Game>(
    g: &G,
    cand: &Candidate<G::State>,
    ctx_size: usize,
    rule_depth: usize,
) -> Expanded<G::State> {
    let mut seen: HashSet<(G::State, G::State)> = HashSet::new();
    let mut out = Expanded {
        pairs: Vec::new(),
        depth: Vec::new(),
        origin: Vec::new(),
        parent: Vec::new(),
        rule_depth,
    };
    let mut frontier = Vec::new();
    for (l, r) in &cand.seeds {
        let key = (g.canonical(l), g.canonical(r));
        if seen.insert(key) {
            frontier.push(out.pairs.len());
            out.pairs.push((l.clone(), r.clone()));
            out.depth.push(0);
            out.origin.push("seed".into());
            out.parent.push(None);
        }
    }
    for d in 1..=rule_depth {
        let mut next = Vec::new();
        for &i in &frontier {
            let (l, r) = out.pairs[i].clone();
            for rule in &cand.rules {
                for (cl, cr) in rule.apply(&l, &r, ctx_size) {
                    let key = (g.canonical(&cl), g.canonical(&cr));
                    if seen.insert(key) {
                        next.push(out.pairs.len());
                        out.pairs.push((cl, cr));
                        out.depth.push(d);
                        out.origin.push(rule.name().to_string());
                        out.parent.push(Some(i));
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Clone, Debug)]
pub struct Obligation<S, J> {
    pub pair: usize,
    /// The justified pair.
    pub result: (S, S),
    pub side: Side,
    pub label: String,
    pub passive: bool,
    /// τ-steps taken by the attacker after its label before the pair was
    /// justified.
    pub advance: usize,
    pub just: J,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub pairs: usize,
    pub checked_pairs: usize,
    pub obligations: usize,
    pub by_technique: BTreeMap<String, usize>,
    pub max_advance: usize,
}

#[derive(Clone, Debug)]
pub enum Verdict<S, L> {
    ValidWithinBounds(Stats),
    /// The responder has no weak transition for the label at all.
    Counterexample {
        pair: (S, S),
        label: L,
        failing_side: Side,
        reason: String,
        trace: Vec<String>,
    },
    /// The responder can answer, but no resulting pair could be justified.
    Unjustified {
        pair: (S, S),
        label: L,
        attacker: Side,
        result: (S, S),
    },
}

impl<S, L> Verdict<S, L> {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::ValidWithinBounds(_))
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::Counterexample { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::ValidWithinBounds(_) => "valid-within-bounds",
            Verdict::Counterexample { .. } => "counterexample",
            Verdict::Unjustified { .. } => "unjustified",
        }
    }
}

impl<S: fmt::Display, L: fmt::Display> fmt::Display for Verdict<S, L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ValidWithinBounds(st) => write!(
                f,
                "valid within bounds ({} pairs, {} checked, {} obligations)",
                st.pairs, st.checked_pairs, st.obligations
            ),
            Verdict::Counterexample {
                pair,
                label,
                failing_side,
                reason,
                ..
            } => write!(
                f,
                "counterexample: {} cannot answer `{label}` ({reason})\n  left:  {}\n  right: {}",
                failing_side, pair.0, pair.1
            ),
            Verdict::Unjustified {
                pair,
                label,
                attacker,
                result,
            } => write!(
                f,
                "unjustified: {attacker} plays `{label}`\n  from left:  {}\n  from right: {}\n  reaching left:  {}\n  reaching right: {}",
                pair.0, pair.1, result.0, result.1
            ),
        }
    }
}

pub struct Report<S, L, J> {
    pub verdict: Verdict<S, L>,
    pub log: Vec<Obligation<S, J>>,
}

fn oriented<S: Clone>(side: Side, attacker: &S, responder: &S) -> (S, S) {
    match side {
        Side::Left => (attacker.clone(), responder.clone()),
        Side::Right => (responder.clone(), attacker.clone()),
    }
}

/// Checks every transition of every non-maximal pair of `exp` against the
/// up-to closure computed by `just`.
///
/// If the attacker's resulting state cannot be paired with any weak answer,
/// the attacker is also allowed to continue with its own deterministic τ
/// steps before the pair is justified; after a passive label only the
/// strong techniques are allowed unless at least one such step was taken.
pub fn check<G: Game, J: Justifier<G>>(
    g: &G,
    exp: &Expanded<G::State>,
    just: &J,
    tau_fuel: usize,
    keep_log: bool,
) -> Report<G::State, G::Label, J::Just> {
    let mut stats = Stats {
        pairs: exp.len(),
        ..Stats::default()
    };
    let mut log = Vec::new();
    let mut unjustified = None;
    for i in exp.checked() {
        stats.checked_pairs += 1;
        let (l, r) = &exp.pairs[i];
        for side in [Side::Left, Side::Right] {
            let (a, d) = match side {
                Side::Left => (l, r),
                Side::Right => (r, l),
            };
            for label in g.labels(a) {
                let Some(a1) = g.apply(a, &label) else {
                    continue;
                };
                stats.obligations += 1;
                let passive = g.is_passive(&label);
                let (responses, complete) = weak_responses(g, d, &label, tau_fuel);
                if responses.is_empty() {
                    if complete {
                        let reason = format!("no weak `{label}` transition");
                        return Report {
                            verdict: Verdict::Counterexample {
                                pair: (l.clone(), r.clone()),
                                label: label.clone(),
                                failing_side: side.other(),
                                reason,
                                trace: vec![
                                    format!("{side}: {label}"),
                                    format!("{}: no answer within {tau_fuel} tau steps", side.other()),
                                ],
                            },
                            log,
                        };
                    }
                    if unjustified.is_none() {
                        unjustified = Some(Verdict::Unjustified {
                            pair: (l.clone(), r.clone()),
                            label: label.clone(),
                            attacker: side,
                            result: oriented(side, &a1, d),
                        });
                    }
                    continue;
                }
                let (chain, _) = tau_chain(g, &a1, tau_fuel);
                let mut found = None;
                'search: for (adv, a2) in chain.iter().enumerate() {
                    let strong_only = passive && adv == 0;
                    for d2 in &responses {
                        let (x, y) = oriented(side, a2, d2);
                        if let Some(j) = just.justify(&x, &y, strong_only, Some(i)) {
                            found = Some((adv, j, (x, y)));
                            break 'search;
                        }
                    }
                }
                match found {
                    Some((adv, j, result)) => {
                        for t in just.techniques(&j) {
                            *stats.by_technique.entry(t.to_string()).or_default() += 1;
                        }
                        stats.max_advance = stats.max_advance.max(adv);
                        if keep_log {
                            log.push(Obligation {
                                pair: i,
                                result,
                                side,
                                label: label.to_string(),
                                passive,
                                advance: adv,
                                just: j,
                            });
                        }
                    }
                    None => {
                        if unjustified.is_none() {
                            unjustified = Some(Verdict::Unjustified {
                                pair: (l.clone(), r.clone()),
                                label: label.clone(),
                                attacker: side,
                                result: oriented(side, &a1, &responses[0]),
                            });
                        }
                    }
                }
            }
        }
    }
    Report {
        verdict: unjustified.unwrap_or(Verdict::ValidWithinBounds(stats)),
        log,
    }
}

/// Re-runs a counterexample: the attacker's label applies and the
/// responder has no weak answer with a complete τ-chain.
pub fn replay_counterexample<G: Game>(
    g: &G,
    pair: &(G::State, G::State),
    label: &G::Label,
    failing_side: Side,
    tau_fuel: usize,
) -> bool {
    let (a, d) = match failing_side {
        Side::Right => (&pair.0, &pair.1),
        Side::Left => (&pair.1, &pair.0),
    };
    if g.apply(a, label).is_none() {
        return false;
    }
    let (resp, complete) = weak_responses(g, d, label, tau_fuel);
    resp.is_empty() && complete
}

/// No obligation discharged right after a passive label (without
/// intermediate τ-steps) uses a technique outside the strong set.
pub fn audit_diacritical<G: Game, J: Justifier<G>>(
    just: &J,
    log: &[Obligation<G::State, J::Just>],
    spec: &UpToSpec,
) -> bool {
    log.iter()
        .filter(|o| o.passive && o.advance == 0)
        .all(|o| just.techniques(&o.just).is_subset(&spec.strong))
}

/// Replays every logged certificate and returns the indices of those that
/// do not rebuild the pair they were issued for.
pub fn replay_all<G: Game, J: Justifier<G>>(
    g: &G,
    just: &J,
    log: &[Obligation<G::State, J::Just>],
) -> Vec<usize> {
    log.iter()
        .enumerate()
        .filter(|(_, o)| match just.replay(&o.just) {
            Some((l, r)) => !(g.same(&l, &o.result.0) && g.same(&r, &o.result.1)),
            None => true,
        })
        .map(|(i, _)| i)
        .collect()
}

// ---------------------------------------------------------------------------
// Distinguishing

/// A winning attacker strategy: a label on one side and, for every weak
/// answer of the other side, a continuation strategy. A move without
/// answers wins outright.
#[derive(Clone, Debug)]
pub struct Strategy<S, L> {
    pub side: Side,
    pub label: L,
    pub answers: Vec<(S, Strategy<S, L>)>,
}

impl<S: fmt::Display, L: fmt::Display> Strategy<S, L> {
    /// One branch of the strategy as a list of moves.
    pub fn trace(&self) -> Vec<String> {
        let mut out = vec![format!("{}: {}", self.side, self.label)];
        match self.answers.first() {
            None => out.push(format!("{}: no answer", self.side.other())),
            Some((s, next)) => {
                out.push(format!("{} answers with {}", self.side.other(), s));
                out.extend(next.trace());
            }
        }
        out
    }

    pub fn moves(&self) -> usize {
        1 + self.answers.iter().map(|(_, s)| s.moves()).max().unwrap_or(0)
    }
}

pub fn distinguish<G: Game>(
    g: &G,
    s: &G::State,
    t: &G::State,
    depth: usize,
    tau_fuel: usize,
) -> Option<Strategy<G::State, G::Label>> {
    let mut memo = HashMap::new();
    wins(g, s, t, depth, tau_fuel, &mut memo)
}

type Memo<S, L> = HashMap<(S, S, usize), Option<Strategy<S, L>>>;

fn wins<G: Game>(
    g: &G,
    s: &G::State,
    t: &G::State,
    depth: usize,
    fuel: usize,
    memo: &mut Memo<G::State, G::Label>,
) -> Option<Strategy<G::State, G::Label>> {
    if depth == 0 {
        return None;
    }
    let key = (s.clone(), t.clone(), depth);
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    memo.insert(key.clone(), None);
    let mut result = None;
    'outer: for side in [Side::Left, Side::Right] {
        let (a, d) = match side {
            Side::Left => (s, t),
            Side::Right => (t, s),
        };
        for label in g.labels(a) {
            let Some(a1) = g.apply(a, &label) else {
                continue;
            };
            let (resp, complete) = weak_responses(g, d, &label, fuel);
            if !complete {
                continue;
            }
            let mut answers = Vec::new();
            let mut ok = true;
            for d1 in resp {
                let (x, y) = oriented(side, &a1, &d1);
                match wins(g, &x, &y, depth - 1, fuel, memo) {
                    Some(st) => answers.push((d1, st)),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                result = Some(Strategy {
                    side,
                    label,
                    answers,
                });
                break 'outer;
            }
        }
    }
    memo.insert(key, result.clone());
    result
}

/// Replays a strategy from scratch: every move applies, every weak answer
/// is covered, and every leaf leaves the responder without an answer.
pub fn verify_strategy<G: Game>(
    g: &G,
    s: &G::State,
    t: &G::State,
    st: &Strategy<G::State, G::Label>,
    tau_fuel: usize,
) -> bool {
    let (a, d) = match st.side {
        Side::Left => (s, t),
        Side::Right => (t, s),
    };
    let Some(a1) = g.apply(a, &st.label) else {
        return false;
    };
    let (resp, complete) = weak_responses(g, d, &st.label, tau_fuel);
    if !complete || resp.len() != st.answers.len() {
        return false;
    }
    resp.iter().all(|d1| {
        st.answers.iter().any(|(r, sub)| {
            r == d1 && {
                let (x, y) = oriented(st.side, &a1, d1);
                verify_strategy(g, &x, &y, sub, tau_fuel)
            }
        })
    })
}
