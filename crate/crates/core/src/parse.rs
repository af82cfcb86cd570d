//! S-expression reader and the concrete syntax of terms.
//!
//! ```text
//! x  (lam x e)  (e1 e2 ...)  (new x e)  (reset v e)  (grab v x e)
//! (throw v e)  (prompt n)  (cont E)
//! ```
//! Inside `(cont E)` the symbol `_` marks the hole. Derived forms from
//! [`crate::stdlib`] are expanded while reading.

use std::fmt;

use crate::error::SyntaxError;
use crate::stdlib;
use crate::syntax::{EvalCtx, Prompt, Term};

pub type Pos = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExp {
    Atom(String, Pos),
    List(Vec<SExp>, Pos),
}

impl SExp {
    pub fn pos(&self) -> Pos {
        match self {
            SExp::Atom(_, p) | SExp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExp::Atom(a, _) => Some(a),
            SExp::List(..) => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExp>, SyntaxError> {
        self.skip_ws();
        let pos = (self.line, self.col);
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(SyntaxError::at(pos, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(SyntaxError::at(pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExp::List(items, pos)));
                        }
                        Some(_) => {
                            items.push(self.read()?.expect("input remains"));
                        }
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(SExp::Atom(s, pos)))
            }
        }
    }
}

pub fn read_all(src: &str) -> Result<Vec<SExp>, SyntaxError> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    while let Some(s) = r.read()? {
        out.push(s);
    }
    Ok(out)
}

/// Reads exactly one S-expression.
pub fn read_one(src: &str) -> Result<SExp, SyntaxError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(SyntaxError::at((1, 1), "empty input")),
        _ => Err(SyntaxError::at(all[1].pos(), "expected a single expression")),
    }
}

const HOLE: &str = "\u{0}hole";

const CORE_FORMS: &[&str] = &["lam", "new", "reset", "grab", "throw", "prompt", "cont"];

pub(crate) fn ident(s: &SExp) -> Result<String, SyntaxError> {
    match s {
        SExp::Atom(a, p) => {
            if a.starts_with('#') || a.starts_with('%') || a.parse::<i64>().is_ok() {
                Err(SyntaxError::at(*p, format!("`{a}` is not a variable name")))
            } else if CORE_FORMS.contains(&a.as_str()) || stdlib::KEYWORDS.contains(&a.as_str()) {
                Err(SyntaxError::at(*p, format!("`{a}` is a keyword")))
            } else {
                Ok(a.clone())
            }
        }
        SExp::List(_, p) => Err(SyntaxError::at(*p, "expected a name")),
    }
}

pub(crate) fn number(s: &SExp) -> Result<u32, SyntaxError> {
    s.atom()
        .and_then(|a| a.parse::<u32>().ok())
        .ok_or_else(|| SyntaxError::at(s.pos(), "expected a natural number"))
}

fn expect_len(items: &[SExp], n: usize, pos: Pos, form: &str) -> Result<(), SyntaxError> {
    if items.len() == n {
        Ok(())
    } else {
        Err(SyntaxError::at(
            pos,
            format!("`{form}` expects {} argument(s)", n - 1),
        ))
    }
}

fn value_at(t: Term, pos: Pos) -> Result<Term, SyntaxError> {
    if t.is_value() {
        Ok(t)
    } else {
        Err(SyntaxError::at(pos, format!("expected a value, found {t}")))
    }
}

fn term_of(s: &SExp, in_cont: bool) -> Result<Term, SyntaxError> {
    match s {
        SExp::Atom(a, p) => {
            if a == "_" && in_cont {
                return Ok(Term::var(HOLE));
            }
            if stdlib::KEYWORDS.contains(&a.as_str()) {
                return stdlib::expand(a, &[]).map_err(|e| SyntaxError::at(*p, e.to_string()));
            }
            Ok(Term::Var(ident(s)?))
        }
        SExp::List(items, pos) => {
            let pos = *pos;
            let head = match items.first() {
                None => return Err(SyntaxError::at(pos, "empty application")),
                Some(h) => h,
            };
            match head.atom() {
                Some("lam") => {
                    if items.len() < 3 {
                        return Err(SyntaxError::at(pos, "`lam` expects binders and a body"));
                    }
                    let mut body = term_of(items.last().unwrap(), in_cont)?;
                    for b in items[1..items.len() - 1].iter().rev() {
                        body = Term::Lam(ident(b)?, Box::new(body));
                    }
                    Ok(body)
                }
                Some("new") => {
                    expect_len(items, 3, pos, "new")?;
                    Ok(Term::New(ident(&items[1])?, Box::new(term_of(&items[2], in_cont)?)))
                }
                Some("reset") => {
                    expect_len(items, 3, pos, "reset")?;
                    let d = value_at(term_of(&items[1], in_cont)?, items[1].pos())?;
                    Ok(Term::Reset(Box::new(d), Box::new(term_of(&items[2], in_cont)?)))
                }
                Some("grab") => {
                    expect_len(items, 4, pos, "grab")?;
                    let d = value_at(term_of(&items[1], in_cont)?, items[1].pos())?;
                    Ok(Term::Grab(
                        Box::new(d),
                        ident(&items[2])?,
                        Box::new(term_of(&items[3], in_cont)?),
                    ))
                }
                Some("throw") => {
                    expect_len(items, 3, pos, "throw")?;
                    let k = value_at(term_of(&items[1], in_cont)?, items[1].pos())?;
                    Ok(Term::Throw(Box::new(k), Box::new(term_of(&items[2], in_cont)?)))
                }
                Some("prompt") => {
                    expect_len(items, 2, pos, "prompt")?;
                    Ok(Term::Prompt(Prompt(number(&items[1])?)))
                }
                Some("cont") => {
                    expect_len(items, 2, pos, "cont")?;
                    let body = term_of(&items[1], true)?;
                    Ok(Term::Cont(ctx_of_holed(&body, items[1].pos())?))
                }
                Some(kw) if stdlib::KEYWORDS.contains(&kw) => {
                    let args = items[1..]
                        .iter()
                        .enumerate()
                        .map(|(i, a)| {
                            let is_binder = matches!((kw, i), ("let", 0) | ("fix", 0) | ("fix", 1));
                            if is_binder {
                                ident(a).map(Term::Var)
                            } else {
                                term_of(a, in_cont)
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    stdlib::expand(kw, &args).map_err(|e| SyntaxError::at(pos, e.to_string()))
                }
                _ => {
                    let mut it = items.iter();
                    let mut acc = term_of(it.next().unwrap(), in_cont)?;
                    for a in it {
                        acc = Term::app(acc, term_of(a, in_cont)?);
                    }
                    Ok(acc)
                }
            }
        }
    }
}

fn hole_count(t: &Term) -> usize {
    match t {
        Term::Var(x) => usize::from(x == HOLE),
        Term::Prompt(_) | Term::Cont(_) => 0,
        Term::Lam(_, b) | Term::New(_, b) => hole_count(b),
        Term::App(a, b) | Term::Reset(a, b) | Term::Throw(a, b) | Term::Grab(a, _, b) => {
            hole_count(a) + hole_count(b)
        }
    }
}

fn ctx_of_holed(t: &Term, pos: Pos) -> Result<EvalCtx, SyntaxError> {
    if hole_count(t) != 1 {
        return Err(SyntaxError::at(pos, "a context needs exactly one hole `_`"));
    }
    fn go(t: &Term, pos: Pos) -> Result<EvalCtx, SyntaxError> {
        let bad = || SyntaxError::at(pos, "the hole `_` is not in evaluation position");
        match t {
            Term::Var(x) if x == HOLE => Ok(EvalCtx::Hole),
            Term::App(f, a) => {
                if hole_count(f) == 1 {
                    Ok(EvalCtx::AppL(Box::new(go(f, pos)?), a.clone()))
                } else if f.is_value() {
                    Ok(EvalCtx::AppR(f.clone(), Box::new(go(a, pos)?)))
                } else {
                    Err(bad())
                }
            }
            Term::Reset(d, b) if hole_count(b) == 1 => match **d {
                Term::Prompt(p) => Ok(EvalCtx::Delim(p, Box::new(go(b, pos)?))),
                _ => Err(SyntaxError::at(pos, "a context delimiter must be a prompt literal")),
            },
            _ => Err(bad()),
        }
    }
    go(t, pos)
}

pub fn term_of_sexp(s: &SExp) -> Result<Term, SyntaxError> {
    term_of(s, false)
}

pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    term_of_sexp(&read_one(src)?)
}

/// Parses an evaluation context written with `_` as its hole.
pub fn parse_eval_ctx(src: &str) -> Result<EvalCtx, SyntaxError> {
    let s = read_one(src)?;
    let t = term_of(&s, true)?;
    ctx_of_holed(&t, s.pos())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Lam(x, b) => write!(f, "(lam {x} {b})"),
            Term::App(a, b) => write!(f, "({a} {b})"),
            Term::New(x, b) => write!(f, "(new {x} {b})"),
            Term::Reset(d, b) => write!(f, "(reset {d} {b})"),
            Term::Grab(d, x, b) => write!(f, "(grab {d} {x} {b})"),
            Term::Throw(k, b) => write!(f, "(throw {k} {b})"),
            Term::Prompt(p) => write!(f, "(prompt {})", p.0),
            Term::Cont(e) => write!(f, "(cont {e})"),
        }
    }
}

impl fmt::Display for EvalCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalCtx::Hole => write!(f, "_"),
            EvalCtx::AppL(e, t) => write!(f, "({e} {t})"),
            EvalCtx::AppR(v, e) => write!(f, "({v} {e})"),
            EvalCtx::Delim(p, e) => write!(f, "(reset (prompt {}) {e})", p.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_core_forms() {
        let t = parse_term("(lam x (x y))").unwrap();
        assert_eq!(t, Term::lam("x", Term::app(Term::var("x"), Term::var("y"))));
        let t = parse_term("(grab (prompt 3) k k) ; trailing comment").unwrap();
        assert_eq!(
            t,
            Term::grab(Term::prompt(3), "k", Term::var("k")).unwrap()
        );
        assert_eq!(
            parse_term("(f a b)").unwrap(),
            Term::apps(Term::var("f"), [Term::var("a"), Term::var("b")])
        );
        assert_eq!(
            parse_term("(lam x y x)").unwrap(),
            Term::lam("x", Term::lam("y", Term::var("x")))
        );
    }

    #[test]
    fn reads_contexts() {
        let t = parse_term("(cont ((lam u u) (reset (prompt 0) (_ v))))").unwrap();
        let expected = EvalCtx::app_r(
            Term::lam("u", Term::var("u")),
            EvalCtx::delim(Prompt(0), EvalCtx::app_l(EvalCtx::Hole, Term::var("v"))),
        );
        assert_eq!(t, Term::Cont(expected));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_term("(reset (f x) y)").is_err());
        assert!(parse_term("(cont (lam x _))").is_err());
        assert!(parse_term("(cont (_ _))").is_err());
        assert!(parse_term("((e1 e2) (cont ((f x) _)))").is_err());
        assert!(parse_term("(lam x").is_err());
        assert!(parse_term("x y").is_err());
        match parse_term("\n  (prompt q)") {
            Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn macros_expand_while_reading() {
        assert_eq!(parse_term("omega").unwrap(), stdlib::omega());
        assert_eq!(
            parse_term("(peq (prompt 0) (prompt 1))").unwrap(),
            stdlib::peq(Term::prompt(0), Term::prompt(1))
        );
        assert_eq!(
            parse_term("(let x true x)").unwrap(),
            stdlib::let_("x", stdlib::tru(), Term::var("x"))
        );
        assert!(parse_term("(shiftP (prompt 0))").unwrap().is_closed());
    }

    #[test]
    fn print_then_read_is_identity() {
        for src in [
            "(lam x (x y))",
            "(new x (reset x ((lam u u) (grab x k (throw k (lam z z))))))",
            "(cont ((lam u u) (reset (prompt 2) (_ (lam w w)))))",
            "(throw (cont _) (prompt 7))",
        ] {
            let t = parse_term(src).unwrap();
            let printed = t.to_string();
            assert_eq!(printed, src);
            assert_eq!(parse_term(&printed).unwrap(), t);
        }
    }
}
