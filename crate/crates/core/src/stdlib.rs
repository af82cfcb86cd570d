//! Derived forms and control-operator encodings, expanded to core terms.
//!
//! Booleans are Church-encoded and the branches of `if` are thunked, so
//! only the selected branch runs: `if c a b = c (λ_.a) (λ_.b) unit`.

use std::collections::BTreeSet;

use crate::error::SyntaxError;
use crate::syntax::{fresh_name, EvalCtx, Name, Prompt, Term};

fn v(x: &str) -> Term {
    Term::var(x)
}

fn lam(x: &str, b: Term) -> Term {
    Term::lam(x, b)
}

fn app(f: Term, a: Term) -> Term {
    Term::app(f, a)
}

fn avoid_of(ts: &[&Term]) -> BTreeSet<Name> {
    ts.iter().flat_map(|t| t.free_vars()).collect()
}

fn require_value(t: &Term) -> Result<(), SyntaxError> {
    if t.is_value() {
        Ok(())
    } else {
        Err(SyntaxError::NotAValue(t.to_string()))
    }
}

// The constructors below are only called with value delimiters.
fn reset(d: Term, b: Term) -> Term {
    Term::Reset(Box::new(d), Box::new(b))
}

fn grab(d: Term, x: &str, b: Term) -> Term {
    Term::Grab(Box::new(d), x.to_string(), Box::new(b))
}

fn throw(k: Term, b: Term) -> Term {
    Term::Throw(Box::new(k), Box::new(b))
}

/// `λx.x`, used as the unit value.
pub fn unit() -> Term {
    lam("u", v("u"))
}

/// `(λx.x x) (λx.x x)`
pub fn omega() -> Term {
    let d = lam("x", app(v("x"), v("x")));
    app(d.clone(), d)
}

pub fn tru() -> Term {
    lam("t", lam("f", v("t")))
}

pub fn fls() -> Term {
    lam("t", lam("f", v("f")))
}

pub fn if_(c: Term, a: Term, b: Term) -> Term {
    let d = fresh_name("d", &avoid_of(&[&a, &b]));
    Term::apps(c, [lam(&d, a), lam(&d, b), unit()])
}

pub fn let_(x: &str, e1: Term, e2: Term) -> Term {
    app(lam(x, e2), e1)
}

/// `e1; e2`, evaluating `e1` first and discarding its value.
pub fn seq(e1: Term, e2: Term) -> Term {
    let d = fresh_name("d", &e2.free_vars());
    app(lam(&d, e2), e1)
}

/// Call-by-value fixed-point combinator.
pub fn z_combinator() -> Term {
    let inner = lam(
        "y",
        app(v("f"), lam("z", app(app(v("y"), v("y")), v("z")))),
    );
    lam("f", app(inner.clone(), inner))
}

/// `fix f x. body`: the recursive function `λx.body` where `f` names itself.
pub fn fix(f: &str, x: &str, body: Term) -> Term {
    app(z_combinator(), lam(f, lam(x, body)))
}

/// Prompt equality: `let x = e1 in let y = e2 in <(<grab x _.false>_y); true>_x`.
pub fn peq(e1: Term, e2: Term) -> Term {
    let avoid = e2.free_vars();
    let x = fresh_name("x", &avoid);
    let mut avoid2 = avoid.clone();
    avoid2.insert(x.clone());
    let y = fresh_name("y", &avoid2);
    let body = reset(
        v(&x),
        seq(reset(v(&y), grab(v(&x), "_", fls())), tru()),
    );
    let_(&x, e1, let_(&y, e2, body))
}

fn prompt_names(p: &Term, extra: &[&str]) -> BTreeSet<Name> {
    let mut s = p.free_vars();
    s.extend(extra.iter().map(|x| x.to_string()));
    s
}

pub fn shift_p(p: &Term) -> Result<Term, SyntaxError> {
    require_value(p)?;
    let a = p.free_vars();
    let (f, k, y) = (fresh_name("f", &a), fresh_name("k", &a), fresh_name("y", &a));
    Ok(lam(
        &f,
        grab(
            p.clone(),
            &k,
            reset(
                p.clone(),
                app(v(&f), lam(&y, reset(p.clone(), throw(v(&k), v(&y))))),
            ),
        ),
    ))
}

pub fn control_p(p: &Term) -> Result<Term, SyntaxError> {
    require_value(p)?;
    let a = p.free_vars();
    let (f, k, y) = (fresh_name("f", &a), fresh_name("k", &a), fresh_name("y", &a));
    Ok(lam(
        &f,
        grab(
            p.clone(),
            &k,
            reset(p.clone(), app(v(&f), lam(&y, throw(v(&k), v(&y))))),
        ),
    ))
}

/// `⌈<·>_p⌉`; the delimiter must be a prompt literal since captured
/// contexts only mention prompts.
pub fn reset_p(p: &Term) -> Result<Term, SyntaxError> {
    match p {
        Term::Prompt(q) => Ok(Term::Cont(EvalCtx::delim(*q, EvalCtx::Hole))),
        _ => Err(SyntaxError::NotAValue(format!(
            "prompt literal expected, found {p}"
        ))),
    }
}

pub fn prompt_p(p: &Term) -> Result<Term, SyntaxError> {
    reset_p(p)
}

/// `λf. control_p (λl. f (λz. prompt_p ◁ l z))`
pub fn shift_prime_p(p: &Term) -> Result<Term, SyntaxError> {
    let ctl = control_p(p)?;
    let pr = prompt_p(p)?;
    Ok(lam(
        "f",
        app(
            ctl,
            lam(
                "l",
                app(v("f"), lam("z", throw(pr, app(v("l"), v("z"))))),
            ),
        ),
    ))
}

/// `λf.λh.νx.<f (λz. grab x _. h z)>_x`
pub fn handle() -> Term {
    lam(
        "f",
        lam(
            "h",
            Term::new_prompt(
                "x",
                reset(
                    v("x"),
                    app(
                        v("f"),
                        lam("z", grab(v("x"), "_", app(v("h"), v("z")))),
                    ),
                ),
            ),
        ),
    )
}

/// `fix r z. grab p _. λy.λh. if (x == y) (h z) (r z)`
pub fn raise_p(p: &Term, x: &Term) -> Result<Term, SyntaxError> {
    require_value(p)?;
    require_value(x)?;
    let mut a = prompt_names(p, &[]);
    a.extend(x.free_vars());
    let r = fresh_name("r", &a);
    let z = fresh_name("z", &a);
    let y = fresh_name("y", &a);
    let h = fresh_name("h", &a);
    let body = grab(
        p.clone(),
        "_",
        lam(
            &y,
            lam(
                &h,
                if_(
                    peq(x.clone(), v(&y)),
                    app(v(&h), v(&z)),
                    app(v(&r), v(&z)),
                ),
            ),
        ),
    );
    Ok(fix(&r, &z, body))
}

/// `λf.λh.νx. (<let r = f raise_{p,x} in λ_.λ_.r>_p) x h`
pub fn handle_p(p: &Term) -> Result<Term, SyntaxError> {
    require_value(p)?;
    let a = p.free_vars();
    let f = fresh_name("f", &a);
    let h = fresh_name("h", &a);
    let x = fresh_name("x", &prompt_names(p, &[&f, &h]));
    let r = fresh_name("r", &prompt_names(p, &[&f, &h, &x]));
    let raise = raise_p(p, &v(&x))?;
    let inner = reset(
        p.clone(),
        let_(
            &r,
            app(v(&f), raise),
            lam("_", lam("_", v(&r))),
        ),
    );
    Ok(lam(
        &f,
        lam(&h, Term::new_prompt(&x, Term::apps(inner, [v(&x), v(&h)]))),
    ))
}

/// The surface keywords understood by the reader.
pub const KEYWORDS: &[&str] = &[
    "let", "if", "true", "false", "seq", "fix", "omega", "peq", "shiftP", "resetP",
    "controlP", "promptP", "shiftP'", "handle", "handleP", "raiseP", "unit",
];

/// Expands a named macro applied to already parsed arguments. Binder
/// arguments (of `let` and `fix`) are passed as variables.
pub fn expand(name: &str, args: &[Term]) -> Result<Term, SyntaxError> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(SyntaxError::Arity {
                name: name.to_string(),
                expected: n,
                got: args.len(),
            })
        }
    };
    let binder = |t: &Term| match t {
        Term::Var(x) => Ok(x.clone()),
        other => Err(SyntaxError::NotAValue(format!(
            "binder expected, found {other}"
        ))),
    };
    match name {
        "true" => arity(0).map(|_| tru()),
        "false" => arity(0).map(|_| fls()),
        "unit" => arity(0).map(|_| unit()),
        "omega" => arity(0).map(|_| omega()),
        "handle" => arity(0).map(|_| handle()),
        "if" => {
            arity(3)?;
            Ok(if_(args[0].clone(), args[1].clone(), args[2].clone()))
        }
        "let" => {
            arity(3)?;
            Ok(let_(&binder(&args[0])?, args[1].clone(), args[2].clone()))
        }
        "seq" => {
            arity(2)?;
            Ok(seq(args[0].clone(), args[1].clone()))
        }
        "fix" => {
            arity(3)?;
            Ok(fix(&binder(&args[0])?, &binder(&args[1])?, args[2].clone()))
        }
        "peq" => {
            arity(2)?;
            Ok(peq(args[0].clone(), args[1].clone()))
        }
        "shiftP" => arity(1).and_then(|_| shift_p(&args[0])),
        "controlP" => arity(1).and_then(|_| control_p(&args[0])),
        "resetP" => arity(1).and_then(|_| reset_p(&args[0])),
        "promptP" => arity(1).and_then(|_| prompt_p(&args[0])),
        "shiftP'" => arity(1).and_then(|_| shift_prime_p(&args[0])),
        "handleP" => arity(1).and_then(|_| handle_p(&args[0])),
        "raiseP" => {
            arity(2)?;
            raise_p(&args[0], &args[1])
        }
        other => Err(SyntaxError::UnknownMacro(other.to_string())),
    }
}

/// The prompt used by examples that need one fixed, public prompt.
pub const P0: Prompt = Prompt(0);
