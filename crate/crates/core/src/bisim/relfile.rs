//! Text format for candidate relations.
//!
//! A file is a stream of S-expression items:
//!
//! ```text
//! variant standard            ; or star
//! prcheck                     ; close under the prompt-checking rule
//! seed (env (prompt 0) (shiftP (prompt 0))) (env (prompt 0) (shiftP' (prompt 0)))
//! rule lam-shift
//!   premise G D               ; an environment-only pair of the relation
//!   param V Cv:3              ; C, Cv or Edia, with an optional size cap
//!   param P freshprompt       ; least prompt not in the premise env (per side)
//!   where nosur (prompt 0) E G
//!   |- (env G (run (plug V G))) (env D (run (plug V D)))
//! end
//! ```
//!
//! Inside templates, `(plug V G)` is `V[Γ]`, `(ctx E G)` is the continuation
//! value of `E[Γ]`, and `(fill E G e)` is `E[e, Γ]`. In `env` forms an
//! environment metavariable is spliced and `(run e)` gives the running term.

use std::collections::HashMap;

use super::{Candidate, Rule};
use super::sharp::PromptCheck;
use crate::contexts::{Enumerator, Generation, Kind, MCtx, MECtx};
use crate::error::RelError;
use crate::lts::{State, Variant};
use crate::parse::{read_all, read_one, term_of_sexp, SExp};
use crate::syntax::{least_fresh_prompt, Prompt, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Ctx(Kind, Option<usize>),
    Eval(Option<usize>),
    FreshPrompt,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Clone, Debug)]
pub enum Cond {
    /// The prompt is not among the delimiters surrounding the hole of `E[Γ]`.
    NoSur { prompt: SExp, ctx: String, env: String },
}

#[derive(Clone, Debug)]
pub struct TemplateRule {
    pub name: String,
    pub premise: (String, String),
    pub params: Vec<Param>,
    pub conds: Vec<Cond>,
    pub left: SExp,
    pub right: SExp,
    pub generation: Generation,
}

#[derive(Debug)]
pub struct RelFile {
    pub variant: Variant,
    pub prcheck: bool,
    pub seeds: Vec<(State, State)>,
    pub rules: Vec<TemplateRule>,
}

fn ill(s: &SExp, msg: impl Into<String>) -> RelError {
    RelError::IllFormedRule {
        line: s.pos().0,
        msg: msg.into(),
    }
}

struct Cursor<'a> {
    items: &'a [SExp],
    i: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&'a SExp, RelError> {
        let s = self.items.get(self.i).ok_or_else(|| RelError::IllFormedRule {
            line: self.items.last().map_or(1, |s| s.pos().0),
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        self.i += 1;
        Ok(s)
    }

    fn atom(&mut self, what: &str) -> Result<(&'a str, &'a SExp), RelError> {
        let s = self.next(what)?;
        s.atom()
            .map(|a| (a, s))
            .ok_or_else(|| ill(s, format!("expected {what}")))
    }
}

fn param_kind(s: &SExp, spec: &str) -> Result<ParamKind, RelError> {
    let (k, size) = match spec.split_once(':') {
        Some((k, n)) => (
            k,
            Some(n.parse::<usize>().map_err(|_| ill(s, format!("bad size in `{spec}`")))?),
        ),
        None => (spec, None),
    };
    match k {
        "C" => Ok(ParamKind::Ctx(Kind::C, size)),
        "Cv" => Ok(ParamKind::Ctx(Kind::Cv, size)),
        "Edia" => Ok(ParamKind::Eval(size)),
        "freshprompt" => Ok(ParamKind::FreshPrompt),
        _ => Err(ill(s, format!("unknown parameter kind `{k}`"))),
    }
}

impl RelFile {
    pub fn parse(src: &str) -> Result<RelFile, RelError> {
        let items = read_all(src)?;
        let mut cur = Cursor { items: &items, i: 0 };
        let mut out = RelFile {
            variant: Variant::STANDARD,
            prcheck: false,
            seeds: Vec::new(),
            rules: Vec::new(),
        };
        while cur.i < items.len() {
            let (kw, s) = cur.atom("a directive")?;
            match kw {
                "variant" => {
                    let (v, s) = cur.atom("a variant")?;
                    out.variant = match v {
                        "standard" => Variant::STANDARD,
                        "star" => Variant::STAR,
                        _ => return Err(ill(s, format!("unknown variant `{v}`"))),
                    };
                }
                "prcheck" => out.prcheck = true,
                "seed" => {
                    let l = closed_state(cur.next("a state")?)?;
                    let r = closed_state(cur.next("a state")?)?;
                    out.seeds.push((l, r));
                }
                "rule" => {
                    let rule = parse_rule(&mut cur, out.variant.generation)?;
                    out.rules.push(rule);
                }
                _ => return Err(ill(s, format!("unknown directive `{kw}`"))),
            }
        }
        Ok(out)
    }

    pub fn into_candidate(self, name: impl Into<String>) -> Candidate<State> {
        let mut c = Candidate::new(name);
        c.seeds = self.seeds;
        if self.prcheck {
            c.rules.push(Box::new(PromptCheck));
        }
        for r in self.rules {
            c.rules.push(Box::new(r));
        }
        c
    }
}

fn parse_rule(cur: &mut Cursor<'_>, generation: Generation) -> Result<TemplateRule, RelError> {
    let (name, head) = cur.atom("a rule name")?;
    let mut premise = None;
    let mut params = Vec::new();
    let mut conds = Vec::new();
    let mut concl = None;
    loop {
        let (kw, s) = cur.atom("a rule clause or `end`")?;
        match kw {
            "premise" => {
                let (g, _) = cur.atom("an environment metavariable")?;
                let (d, _) = cur.atom("an environment metavariable")?;
                premise = Some((g.to_string(), d.to_string()));
            }
            "param" => {
                let (n, _) = cur.atom("a parameter name")?;
                let (k, ks) = cur.atom("a parameter kind")?;
                params.push(Param {
                    name: n.to_string(),
                    kind: param_kind(ks, k)?,
                });
            }
            "where" => {
                let (c, cs) = cur.atom("a condition")?;
                if c != "nosur" {
                    return Err(ill(cs, format!("unknown condition `{c}`")));
                }
                let prompt = cur.next("a prompt")?.clone();
                let (e, _) = cur.atom("a context parameter")?;
                let (g, _) = cur.atom("an environment metavariable")?;
                conds.push(Cond::NoSur {
                    prompt,
                    ctx: e.to_string(),
                    env: g.to_string(),
                });
            }
            "|-" | "⊢" => {
                let l = cur.next("a state template")?.clone();
                let r = cur.next("a state template")?.clone();
                concl = Some((l, r));
            }
            "end" => break,
            _ => return Err(ill(s, format!("unknown rule clause `{kw}`"))),
        }
    }
    let premise = premise.ok_or_else(|| ill(head, "rule without `premise`"))?;
    let (left, right) = concl.ok_or_else(|| ill(head, "rule without conclusion"))?;
    let rule = TemplateRule {
        name: name.to_string(),
        premise,
        params,
        conds,
        left,
        right,
        generation,
    };
    rule.validate(head)?;
    Ok(rule)
}

/// A closed state written as `(env v1 ... vn)` or `(env v1 ... (run e))`.
pub fn closed_state(s: &SExp) -> Result<State, RelError> {
    let b = Binding::default();
    b.state(s)
}

/// A state from source: an `env` form, or a bare term standing for the
/// one-value environment (values) or the running term (anything else).
pub fn parse_state(src: &str) -> Result<State, RelError> {
    let s = read_one(src)?;
    if let SExp::List(items, _) = &s {
        if items.first().and_then(|h| h.atom()) == Some("env") {
            return closed_state(&s);
        }
    }
    let t = term_of_sexp(&s)?;
    Ok(if t.is_value() {
        State::env_only(vec![t])
    } else {
        State::running(Vec::new(), t)
    })
}

#[derive(Default)]
struct Binding<'a> {
    envs: HashMap<&'a str, &'a [Term]>,
    ctxs: HashMap<&'a str, &'a MCtx>,
    ectxs: HashMap<&'a str, &'a MECtx>,
    prompts: HashMap<&'a str, Prompt>,
}

fn sexp_of_term(t: &Term) -> SExp {
    read_one(&t.to_string()).expect("printed terms re-read")
}

impl<'a> Binding<'a> {
    fn env(&self, s: &SExp) -> Result<&'a [Term], RelError> {
        s.atom()
            .and_then(|a| self.envs.get(a).copied())
            .ok_or_else(|| ill(s, "expected an environment metavariable"))
    }

    fn expand(&self, s: &SExp) -> Result<SExp, RelError> {
        match s {
            SExp::Atom(a, _) => Ok(match self.prompts.get(a.as_str()) {
                Some(p) => sexp_of_term(&Term::Prompt(*p)),
                None => s.clone(),
            }),
            SExp::List(items, pos) => {
                let head = items.first().and_then(|h| h.atom());
                let arg = |i: usize| items.get(i).ok_or_else(|| ill(s, "missing argument"));
                let plug_err = |e: crate::error::PlugError| ill(s, e.to_string());
                match head {
                    Some("plug") if items.len() == 3 => {
                        let c = arg(1)?
                            .atom()
                            .and_then(|a| self.ctxs.get(a))
                            .ok_or_else(|| ill(s, "expected a context parameter"))?;
                        Ok(sexp_of_term(&c.plug(self.env(arg(2)?)?).map_err(plug_err)?))
                    }
                    Some("ctx") if items.len() == 3 => {
                        let e = self.ectx(arg(1)?)?;
                        let k = e.plug_ctx(self.env(arg(2)?)?).map_err(plug_err)?;
                        Ok(sexp_of_term(&Term::Cont(k)))
                    }
                    Some("fill") if items.len() == 4 => {
                        let e = self.ectx(arg(1)?)?;
                        let body = term_of_sexp(&self.expand(arg(3)?)?)?;
                        let t = e.plug(body, self.env(arg(2)?)?).map_err(plug_err)?;
                        Ok(sexp_of_term(&t))
                    }
                    _ => Ok(SExp::List(
                        items.iter().map(|i| self.expand(i)).collect::<Result<_, _>>()?,
                        *pos,
                    )),
                }
            }
        }
    }

    fn ectx(&self, s: &SExp) -> Result<&'a MECtx, RelError> {
        s.atom()
            .and_then(|a| self.ectxs.get(a).copied())
            .ok_or_else(|| ill(s, "expected an evaluation-context parameter"))
    }

    fn term(&self, s: &SExp) -> Result<Term, RelError> {
        Ok(term_of_sexp(&self.expand(s)?)?)
    }

    fn state(&self, s: &SExp) -> Result<State, RelError> {
        let items = match s {
            SExp::List(items, _) if items.first().and_then(|h| h.atom()) == Some("env") => {
                &items[1..]
            }
            _ => return Err(ill(s, "expected `(env ...)`")),
        };
        let mut env = Vec::new();
        let mut running = None;
        for (k, it) in items.iter().enumerate() {
            if let Some(g) = it.atom().and_then(|a| self.envs.get(a)) {
                env.extend(g.iter().cloned());
                continue;
            }
            if let SExp::List(xs, _) = it {
                if xs.first().and_then(|h| h.atom()) == Some("run") {
                    if k + 1 != items.len() || xs.len() != 2 {
                        return Err(ill(it, "`(run e)` must be the last item"));
                    }
                    running = Some(self.term(&xs[1])?);
                    continue;
                }
            }
            let v = self.term(it)?;
            if !v.is_value() {
                return Err(ill(it, format!("environment entry is not a value: {v}")));
            }
            env.push(v);
        }
        let st = State::new(env, running);
        if !st.is_closed() {
            return Err(ill(s, "state is not closed"));
        }
        Ok(st)
    }
}

impl TemplateRule {
    fn validate(&self, at: &SExp) -> Result<(), RelError> {
        for c in &self.conds {
            let Cond::NoSur { ctx, .. } = c;
            if !self
                .params
                .iter()
                .any(|p| &p.name == ctx && matches!(p.kind, ParamKind::Eval(_)))
            {
                return Err(ill(at, format!("`{ctx}` is not an Edia parameter")));
            }
        }
        Ok(())
    }

    fn binding<'a>(
        &'a self,
        g: &'a [Term],
        d: &'a [Term],
        ctxs: &'a [Option<MCtx>],
        ectxs: &'a [Option<MECtx>],
        fresh: &[Option<Prompt>],
    ) -> Binding<'a> {
        let mut b = Binding::default();
        b.envs.insert(&self.premise.0, g);
        b.envs.insert(&self.premise.1, d);
        for (i, p) in self.params.iter().enumerate() {
            if let Some(c) = &ctxs[i] {
                b.ctxs.insert(&p.name, c);
            }
            if let Some(e) = &ectxs[i] {
                b.ectxs.insert(&p.name, e);
            }
            if let Some(q) = fresh[i] {
                b.prompts.insert(&p.name, q);
            }
        }
        b
    }

    fn conds_hold(&self, b: &Binding<'_>) -> bool {
        self.conds.iter().all(|c| {
            let Cond::NoSur { prompt, ctx, env } = c;
            let (Ok(p), Some(e), Some(g)) = (
                b.term(prompt),
                b.ectxs.get(ctx.as_str()),
                b.envs.get(env.as_str()),
            ) else {
                return false;
            };
            let Term::Prompt(p) = p else { return false };
            match e.plug_ctx(g) {
                Ok(k) => !k.sur_prompts().contains(&p),
                Err(_) => false,
            }
        })
    }
}

impl Rule<State> for TemplateRule {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, l: &State, r: &State, ctx_size: usize) -> Vec<(State, State)> {
        if !(l.is_env_only() && r.is_env_only()) {
            return Vec::new();
        }
        let mut en = Enumerator::for_env(self.generation, &l.env);
        let choices: Vec<Vec<(Option<MCtx>, Option<MECtx>)>> = self
            .params
            .iter()
            .map(|p| match &p.kind {
                ParamKind::Ctx(k, n) => en
                    .up_to(*k, n.map_or(ctx_size, |n| n.min(ctx_size)))
                    .into_iter()
                    .map(|c| (Some(c), None))
                    .collect(),
                ParamKind::Eval(n) => en
                    .up_to_e(n.map_or(ctx_size, |n| n.min(ctx_size)))
                    .into_iter()
                    .map(|e| (None, Some(e)))
                    .collect(),
                ParamKind::FreshPrompt => vec![(None, None)],
            })
            .collect();
        let fresh = |s: &State| -> Vec<Option<Prompt>> {
            self.params
                .iter()
                .map(|p| {
                    (p.kind == ParamKind::FreshPrompt)
                        .then(|| least_fresh_prompt(&s.env_prompts()))
                })
                .collect()
        };
        let (fl, fr) = (fresh(l), fresh(r));
        let mut out = Vec::new();
        let mut idx = vec![0usize; choices.len()];
        if choices.iter().any(|c| c.is_empty()) {
            return out;
        }
        loop {
            let ctxs: Vec<Option<MCtx>> = idx.iter().zip(&choices).map(|(&i, c)| c[i].0.clone()).collect();
            let ectxs: Vec<Option<MECtx>> = idx.iter().zip(&choices).map(|(&i, c)| c[i].1.clone()).collect();
            let bl = self.binding(&l.env, &r.env, &ctxs, &ectxs, &fl);
            let br = self.binding(&l.env, &r.env, &ctxs, &ectxs, &fr);
            if self.conds_hold(&bl) {
                if let (Ok(a), Ok(b)) = (bl.state(&self.left), br.state(&self.right)) {
                    out.push((a, b));
                }
            }
            // odometer over the parameter choices
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        variant standard
        prcheck
        seed (env (lam x x)) (env (lam y y))
        rule app
          premise G D
          param V Cv:1
          |- (env G (run ((plug V G) (lam z z)))) (env D (run ((plug V D) (lam z z))))
        end
    ";

    #[test]
    fn parses_and_expands() {
        let f = RelFile::parse(SMALL).unwrap();
        assert!(f.prcheck);
        assert_eq!(f.seeds.len(), 1);
        let r = &f.rules[0];
        let (l, rr) = &f.seeds[0];
        let out = r.apply(l, rr, 3);
        // Cv of size one over a one-value environment: only the hole #1
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0.running.as_ref().unwrap().to_string(), "((lam x x) (lam z z))");
    }

    #[test]
    fn errors_carry_lines() {
        let e = RelFile::parse("variant standard\nrule r\n premise G D\n bogus\nend").unwrap_err();
        assert_eq!(
            e,
            RelError::IllFormedRule {
                line: 4,
                msg: "unknown rule clause `bogus`".into()
            }
        );
        assert!(RelFile::parse("seed (env x) (env (lam x x))").is_err());
    }

    #[test]
    fn nosur_filters_contexts() {
        let src = "
            rule r premise G D param E Edia:2 where nosur (prompt 0) E G
              |- (env G (ctx E G)) (env D (ctx E D))
            end";
        let f = RelFile::parse(src).unwrap();
        let s = State::env_only(vec![Term::prompt(0)]);
        let out = f.rules[0].apply(&s, &s, 2);
        let all = Enumerator::for_env(Generation::Standard, &s.env).up_to_e(2);
        assert_eq!(out.len(), all.len() - 1);
        assert!(out.iter().all(|(l, _)| !l.env[1].to_string().contains("reset")));
    }
}
