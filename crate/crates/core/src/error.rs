use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("expected a value, found {0}")]
    NotAValue(String),
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown macro `{0}`")]
    UnknownMacro(String),
    #[error("macro `{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

impl SyntaxError {
    pub(crate) fn at(pos: (usize, usize), msg: impl Into<String>) -> Self {
        SyntaxError::Parse {
            line: pos.0,
            col: pos.1,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlugError {
    #[error("hole index {index} out of range for an environment of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("hole {index} requires a {expected}, found {found}")]
    KindMismatch {
        index: usize,
        expected: &'static str,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: {msg}")]
    IllFormedRule { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("term has free variables: {0:?}")]
    OpenTerm(Vec<String>),
}
