use std::fmt;

/// Source position of a syntax problem, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("element out of range: {0}")]
    OutOfRange(String),

    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("substitution: free variable x{var} is outside the domain {{1..{domain}}}")]
    Substitution { var: u32, domain: usize },

    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(u32, u32),

    #[error("closure mode mismatch: {0} vs {1}")]
    ModeMismatch(String, String),

    #[error("generator list is empty")]
    EmptyGenerators,

    #[error("resource guard `{guard}` exceeded: {detail}")]
    Guard { guard: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos: Pos { line, col },
            msg: msg.into(),
        }
    }

    pub(crate) fn guard(guard: &'static str, detail: impl Into<String>) -> Self {
        Error::Guard {
            guard,
            detail: detail.into(),
        }
    }
}
