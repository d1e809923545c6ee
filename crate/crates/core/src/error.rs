use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("target is not in the span")]
    NotInSpan,
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("rewrite budget exhausted")]
    RewriteFuelExhausted,
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("cell set is not closed under the action: {0}")]
    NotActionClosed(String),
    #[error("module is not of projective type")]
    NotPType,
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("zero chain has no leading term")]
    ZeroChain,
    #[error("residual of leading term is not a cycle")]
    ResidualNotACycle,
    #[error("basis of size {size} exceeds cap {cap}")]
    WindowTooLarge { size: usize, cap: usize },
    #[error("spectral sequence not converged at (i={i}, s={s}, stem={stem})")]
    NotConverged { i: u32, s: u32, stem: u32 },
    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),
    #[error("chains live in different modules: {0}")]
    ModuleMismatch(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("registry corrupt: {0}")]
    RegistryCorrupt(String),
    #[error("script line {line}: {msg}")]
    ScriptParse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}
