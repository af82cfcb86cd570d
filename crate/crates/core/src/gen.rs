//! Seeded random generators for terms, contexts and exception-handling
//! programs. Everything is driven by a ChaCha stream, so a seed fixes the
//! output on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SyntaxError;
use crate::parse::{term_of_sexp, SExp};
use crate::reduction::{observable, ObsClass};
use crate::syntax::{EvalCtx, Name, Prompt, Term};

pub const DEFAULT_SEED: u64 = 0x5eed_1ab1;

/// The seed in `LAMBDABLA_SEED`, or `DEFAULT_SEED`.
pub fn seed_from_env() -> u64 {
    std::env::var("LAMBDABLA_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random closed terms of the multi-prompt calculus. Prompt positions
/// usually hold something prompt-like so that control operators fire, but
/// ill-formed combinations are produced too.
pub struct TermGen {
    pub max_prompt: u32,
}

#[derive(Default, Clone)]
struct Scope {
    vars: Vec<Name>,
    prompts: Vec<Name>,
    conts: Vec<Name>,
}

impl TermGen {
    pub fn new(max_prompt: u32) -> Self {
        TermGen { max_prompt }
    }

    pub fn term(&self, rng: &mut impl Rng, size: usize) -> Term {
        self.go(rng, size, &Scope::default(), 0)
    }

    /// Like [`TermGen::term`], but half of the time the result is built
    /// around a control redex (capture, throw or delimited value) sitting
    /// in a random evaluation context.
    pub fn redex_rich(&self, rng: &mut impl Rng, size: usize) -> Term {
        if rng.gen_bool(0.5) {
            return self.term(rng, size);
        }
        let sc = Scope::default();
        let n = size.max(3) / 3;
        let p = Prompt(rng.gen_range(0..=self.max_prompt));
        let core = match rng.gen_range(0..3) {
            0 => {
                let inner = self.ctx(rng, n, &sc, 0);
                let k = self.name("k", 0);
                let mut body_sc = sc.clone();
                body_sc.conts.push(k.clone());
                let body = self.go(rng, n, &body_sc, 1);
                let target = if rng.gen_bool(0.8) { p } else { Prompt(rng.gen_range(0..=self.max_prompt)) };
                Term::Reset(
                    Box::new(Term::Prompt(p)),
                    Box::new(inner.plug(Term::Grab(Box::new(Term::Prompt(target)), k, Box::new(body)))),
                )
            }
            1 => Term::Throw(Box::new(Term::Cont(self.ctx(rng, n, &sc, 0))), Box::new(self.go(rng, n, &sc, 0))),
            _ => Term::Reset(Box::new(Term::Prompt(p)), Box::new(self.value(rng, n, &sc, 0))),
        };
        self.ctx(rng, n, &sc, 0).plug(core)
    }

    pub fn eval_ctx(&self, rng: &mut impl Rng, size: usize) -> EvalCtx {
        self.ctx(rng, size, &Scope::default(), 0)
    }

    fn name(&self, prefix: &str, n: usize) -> Name {
        format!("{prefix}{n}")
    }

    fn prompt_val(&self, rng: &mut impl Rng, sc: &Scope, n: usize) -> Term {
        if !sc.prompts.is_empty() && rng.gen_bool(0.7) {
            Term::Var(sc.prompts.choose(rng).unwrap().clone())
        } else if rng.gen_bool(0.9) {
            Term::Prompt(Prompt(rng.gen_range(0..=self.max_prompt)))
        } else {
            self.value(rng, 2, sc, n)
        }
    }

    fn value(&self, rng: &mut impl Rng, size: usize, sc: &Scope, n: usize) -> Term {
        let all: Vec<&Name> = sc.vars.iter().chain(&sc.prompts).chain(&sc.conts).collect();
        match rng.gen_range(0..10) {
            0..=2 if !all.is_empty() => Term::Var((*all.choose(rng).unwrap()).clone()),
            3 => Term::Prompt(Prompt(rng.gen_range(0..=self.max_prompt))),
            4 if size > 2 => Term::Cont(self.ctx(rng, size - 1, sc, n)),
            _ => {
                let x = self.name("x", n);
                let mut inner = sc.clone();
                inner.vars.push(x.clone());
                Term::Lam(x, Box::new(self.go(rng, size.saturating_sub(1), &inner, n + 1)))
            }
        }
    }

    fn go(&self, rng: &mut impl Rng, size: usize, sc: &Scope, n: usize) -> Term {
        if size <= 1 {
            return self.value(rng, 1, sc, n);
        }
        let half = |rng: &mut dyn rand::RngCore| rng.gen_range(1..size.max(2));
        match rng.gen_range(0..9) {
            0 | 1 => self.value(rng, size, sc, n),
            2 | 3 => {
                let a = half(rng);
                Term::app(self.go(rng, a, sc, n), self.go(rng, size - a, sc, n))
            }
            4 => {
                let x = self.name("p", n);
                let mut inner = sc.clone();
                inner.prompts.push(x.clone());
                Term::New(x, Box::new(self.go(rng, size - 1, &inner, n + 1)))
            }
            5 => Term::Reset(
                Box::new(self.prompt_val(rng, sc, n)),
                Box::new(self.go(rng, size - 1, sc, n)),
            ),
            6 => {
                let k = self.name("k", n);
                let mut inner = sc.clone();
                inner.conts.push(k.clone());
                Term::Grab(
                    Box::new(self.prompt_val(rng, sc, n)),
                    k,
                    Box::new(self.go(rng, size - 1, &inner, n + 1)),
                )
            }
            7 => {
                let k = if !sc.conts.is_empty() && rng.gen_bool(0.8) {
                    Term::Var(sc.conts.choose(rng).unwrap().clone())
                } else {
                    self.value(rng, 2, sc, n)
                };
                Term::Throw(Box::new(k), Box::new(self.go(rng, size - 1, sc, n)))
            }
            _ => Term::Cont(self.ctx(rng, size - 1, sc, n)),
        }
    }

    fn ctx(&self, rng: &mut impl Rng, size: usize, sc: &Scope, n: usize) -> EvalCtx {
        if size <= 1 {
            return EvalCtx::Hole;
        }
        match rng.gen_range(0..4) {
            0 => EvalCtx::app_l(self.ctx(rng, size - 1, sc, n), self.go(rng, 2, sc, n)),
            1 => EvalCtx::app_r(self.value(rng, 2, sc, n), self.ctx(rng, size - 1, sc, n)),
            2 => EvalCtx::delim(Prompt(rng.gen_range(0..=self.max_prompt)), self.ctx(rng, size - 1, sc, n)),
            _ => EvalCtx::Hole,
        }
    }
}

// ---------------------------------------------------------------------------
// Exception-handling programs

/// Programs over `handle`: try blocks, raises, lets and a few constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HProg {
    Const(usize),
    Var(Name),
    /// `handle (λr.body) (λz.handler)`
    Try {
        r: Name,
        body: Box<HProg>,
        z: Name,
        handler: Box<HProg>,
    },
    /// `f a`, where `f` is usually a raise function
    Call(Name, Box<HProg>),
    Let(Name, Box<HProg>, Box<HProg>),
}

const CONSTS: [&str; 3] = ["(lam a a)", "(lam a (lam b a))", "(lam a (lam b b))"];

impl HProg {
    /// Surface syntax using the `handle` keyword.
    pub fn to_source(&self) -> String {
        match self {
            HProg::Const(i) => CONSTS[*i].to_string(),
            HProg::Var(x) => x.clone(),
            HProg::Try { r, body, z, handler } => format!(
                "((handle) (lam {r} {}) (lam {z} {}))",
                body.to_source(),
                handler.to_source()
            ),
            HProg::Call(f, a) => format!("({f} {})", a.to_source()),
            HProg::Let(x, a, b) => format!("(let {x} {} {})", a.to_source(), b.to_source()),
        }
    }

    /// The same program with every `handle` replaced by `handleP` at
    /// prompt 0.
    pub fn to_source_p(&self) -> String {
        let s = crate::parse::read_one(&self.to_source()).expect("generated source reads");
        show(&replace_handle(&s))
    }

    pub fn size(&self) -> usize {
        match self {
            HProg::Const(_) | HProg::Var(_) => 1,
            HProg::Try { body, handler, .. } => 1 + body.size() + handler.size(),
            HProg::Call(_, a) => 1 + a.size(),
            HProg::Let(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Replaces the `handle` keyword, as an atom, by `(handleP (prompt 0))`.
pub fn replace_handle(s: &SExp) -> SExp {
    match s {
        SExp::Atom(a, p) if a == "handle" => SExp::List(
            vec![
                SExp::Atom("handleP".into(), *p),
                SExp::List(vec![SExp::Atom("prompt".into(), *p), SExp::Atom("0".into(), *p)], *p),
            ],
            *p,
        ),
        SExp::List(items, p) if items.len() == 1 && items[0].atom() == Some("handle") => replace_handle(&items[0]).with_pos(*p),
        SExp::List(items, p) => SExp::List(items.iter().map(replace_handle).collect(), *p),
        a => a.clone(),
    }
}

trait WithPos {
    fn with_pos(self, p: crate::parse::Pos) -> SExp;
}

impl WithPos for SExp {
    fn with_pos(self, p: crate::parse::Pos) -> SExp {
        match self {
            SExp::Atom(a, _) => SExp::Atom(a, p),
            SExp::List(i, _) => SExp::List(i, p),
        }
    }
}

pub fn show(s: &SExp) -> String {
    match s {
        SExp::Atom(a, _) => a.clone(),
        SExp::List(items, _) => format!("({})", items.iter().map(show).collect::<Vec<_>>().join(" ")),
    }
}

/// Outcome of running one program under both encodings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffResult {
    pub source: String,
    pub plain: ObsClass,
    pub prompted: ObsClass,
}

impl DiffResult {
    /// Agreement: equal decided observables, and Unknown on one side only
    /// if it is Unknown on both.
    pub fn agrees(&self) -> bool {
        match (&self.plain, &self.prompted) {
            (ObsClass::Unknown(_), ObsClass::Unknown(_)) => true,
            (ObsClass::Unknown(_), _) | (_, ObsClass::Unknown(_)) => false,
            (a, b) => a == b,
        }
    }
}

pub fn difftest_source(src: &str, fuel: usize) -> Result<DiffResult, SyntaxError> {
    let s = crate::parse::read_one(src)?;
    let plain = term_of_sexp(&s)?;
    let prompted = term_of_sexp(&replace_handle(&s))?;
    Ok(DiffResult {
        source: src.to_string(),
        plain: observable(&plain, fuel),
        prompted: observable(&prompted, fuel),
    })
}

pub fn random_handler_program(rng: &mut impl Rng, depth: usize) -> HProg {
    fn go(rng: &mut impl Rng, depth: usize, vars: &mut Vec<Name>, raises: &mut Vec<Name>, n: &mut usize) -> HProg {
        let leaf = |rng: &mut dyn rand::RngCore, vars: &Vec<Name>, raises: &Vec<Name>| {
            let all: Vec<&Name> = vars.iter().chain(raises.iter()).collect();
            if !all.is_empty() && rng.gen_bool(0.4) {
                HProg::Var(all[rng.gen_range(0..all.len())].clone())
            } else {
                HProg::Const(rng.gen_range(0..CONSTS.len()))
            }
        };
        if depth == 0 {
            return leaf(rng, vars, raises);
        }
        *n += 1;
        let id = *n;
        match rng.gen_range(0..8) {
            0 => leaf(rng, vars, raises),
            1..=3 => {
                let r = format!("r{id}");
                let z = format!("z{id}");
                raises.push(r.clone());
                let body = go(rng, depth - 1, vars, raises, n);
                raises.pop();
                vars.push(z.clone());
                let handler = go(rng, depth - 1, vars, raises, n);
                vars.pop();
                HProg::Try {
                    r,
                    body: Box::new(body),
                    z,
                    handler: Box::new(handler),
                }
            }
            4 | 5 if !raises.is_empty() || !vars.is_empty() => {
                let pool: Vec<Name> = if !raises.is_empty() && rng.gen_bool(0.8) {
                    raises.clone()
                } else {
                    vars.iter().chain(raises.iter()).cloned().collect()
                };
                let f = pool[rng.gen_range(0..pool.len())].clone();
                HProg::Call(f, Box::new(go(rng, depth - 1, vars, raises, n)))
            }
            _ => {
                let x = format!("v{id}");
                let a = go(rng, depth - 1, vars, raises, n);
                vars.push(x.clone());
                let b = go(rng, depth - 1, vars, raises, n);
                vars.pop();
                HProg::Let(x, Box::new(a), Box::new(b))
            }
        }
    }
    go(rng, depth, &mut Vec::new(), &mut Vec::new(), &mut 0)
}

/// `n` distinct handler programs with at least one try block.
pub fn handler_corpus(seed: u64, n: usize, depth: usize) -> Vec<HProg> {
    let mut r = rng(seed);
    let mut out: Vec<HProg> = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < n * 100 {
        attempts += 1;
        let p = random_handler_program(&mut r, depth);
        if p.to_source().contains("handle") && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    #[test]
    fn seeded_generation_is_reproducible() {
        let g = TermGen::new(2);
        let a: Vec<Term> = (0..20).map(|_| g.term(&mut rng(7), 8)).collect();
        let b: Vec<Term> = (0..20).map(|_| g.term(&mut rng(7), 8)).collect();
        assert_eq!(a, b);
        assert_eq!(handler_corpus(3, 10, 4), handler_corpus(3, 10, 4));
    }

    #[test]
    fn generated_terms_are_closed() {
        let g = TermGen::new(2);
        let mut r = rng(11);
        for _ in 0..200 {
            let t = g.term(&mut r, 10);
            assert!(t.is_closed(), "{t}");
        }
    }

    #[test]
    fn handler_programs_parse_and_are_closed() {
        for p in handler_corpus(5, 50, 4) {
            let t = parse_term(&p.to_source()).unwrap();
            assert!(t.is_closed(), "{}", p.to_source());
            let t = parse_term(&p.to_source_p()).unwrap();
            assert!(t.is_closed(), "{}", p.to_source_p());
        }
    }

    #[test]
    fn handle_is_swapped_for_the_prompted_version() {
        let p = HProg::Try {
            r: "r".into(),
            body: Box::new(HProg::Call("r".into(), Box::new(HProg::Const(0)))),
            z: "z".into(),
            handler: Box::new(HProg::Var("z".into())),
        };
        assert_eq!(p.to_source(), "((handle) (lam r (r (lam a a))) (lam z z))");
        assert_eq!(p.to_source_p(), "((handleP (prompt 0)) (lam r (r (lam a a))) (lam z z))");
        let d = difftest_source(&p.to_source(), 10_000).unwrap();
        assert!(d.agrees());
        assert_eq!(d.plain, ObsClass::Value);
    }

    #[test]
    fn small_differential_corpus_agrees() {
        for p in handler_corpus(DEFAULT_SEED, 40, 4) {
            let d = difftest_source(&p.to_source(), 10_000).unwrap();
            assert!(d.agrees(), "{d:?}");
        }
    }
}
