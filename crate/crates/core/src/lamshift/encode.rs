use super::syntax::STerm;
use crate::stdlib;
use crate::syntax::{Prompt, Term};

/// Homomorphic translation into the multi-prompt calculus with a single
/// prompt `p`: `⟨e⟩` becomes `throw reset_p [e]` and `shift k e` becomes
/// `shift_p (λk.[e])`.
pub fn encode_to_lambdabla(e: &STerm, p: Prompt) -> Term {
    let pt = Term::Prompt(p);
    match e {
        STerm::Var(x) => Term::var(x),
        STerm::Lam(x, b) => Term::lam(x, encode_to_lambdabla(b, p)),
        STerm::App(a, b) => Term::app(encode_to_lambdabla(a, p), encode_to_lambdabla(b, p)),
        STerm::Reset(b) => Term::Throw(
            Box::new(stdlib::reset_p(&pt).expect("prompt literal")),
            Box::new(encode_to_lambdabla(b, p)),
        ),
        STerm::Shift(k, b) => Term::app(
            stdlib::shift_p(&pt).expect("prompt literal"),
            Term::lam(k, encode_to_lambdabla(b, p)),
        ),
    }
}
