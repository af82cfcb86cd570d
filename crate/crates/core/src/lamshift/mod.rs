//! The shift/reset calculus: syntax, the original and relaxed semantics,
//! the transition system with evaluation-context environments, and the
//! translation into the multi-prompt calculus.

pub mod contexts;
pub mod ctxeq;
pub mod encode;
pub mod game;
pub mod lts;
pub mod reduction;
pub mod syntax;

pub use contexts::{SMCtx, SMECtx};
pub use ctxeq::ctx_equiv_check_s;
pub use encode::encode_to_lambdabla;
pub use game::{ShiftGame, ShiftIndex, ShiftJust};
pub use lts::{apply_label_s, enumerate_labels_s, SLabel, SState};
pub use reduction::{eval_s, observable_s, step_s, SOutcome, SStep, Semantics};
pub use syntax::{parse_sctx, parse_sterm, SCtx, STerm};
