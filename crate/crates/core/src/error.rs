use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: cannot compose [{g_dom}]->[{g_cod}] after [{f_dom}]->[{f_cod}]")]
    DomainMismatch {
        f_dom: usize,
        f_cod: usize,
        g_dom: usize,
        g_cod: usize,
    },

    #[error("no function [{dom}]->[0] exists when dom > 0")]
    EmptyCodomain { dom: usize },

    #[error("value {value} out of range for codomain [{cod}]")]
    ValueOutOfRange { value: usize, cod: usize },

    #[error("functor bound {actual} is too small: this computation needs at least {needed}")]
    BoundTooSmall { needed: usize, actual: usize },

    #[error("search too large: {what} has size {size}, cap is {cap}")]
    SearchTooLarge { what: String, size: u128, cap: u128 },

    #[error("functor data invalid: {0}")]
    InvalidFunctor(String),

    #[error("structure data invalid: {0}")]
    InvalidStructure(String),

    #[error("relational language mismatch: {0}")]
    LanguageMismatch(String),

    #[error("language contains nullary symbol {symbol:?}")]
    NullarySymbol { symbol: String },

    #[error("formula has no free variables and nullary symbols are not allowed here")]
    NullaryFormula,

    #[error("unbound variable {name:?} in formula evaluation")]
    UnboundVariable { name: String },

    #[error("unknown relation symbol {name:?}")]
    UnknownSymbol { name: String },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("pairing overflow: intermediate value exceeds u64")]
    PairingOverflow,

    #[error("pairing system does not provide arity {arity}")]
    MissingArity { arity: usize },

    #[error("constants must be pairwise distinct (duplicate {value})")]
    DuplicateConstants { value: u64 },

    #[error("relation {symbol:?} is empty")]
    EmptyRelation { symbol: String },

    #[error("invalid code {code} for vertex carrier: {reason}")]
    InvalidCode { code: u64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("black-box oracle failed: {0}")]
    Oracle(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
