use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An arithmetic atom that is trivially true or false after normalization.
    #[error("degenerate atom `{0}`: constant constraint is T-valid or T-inconsistent")]
    DegenerateAtom(String),

    #[error("atom `{0}` is not in the atom set")]
    AtomNotInAlpha(String),

    #[error("propositional variable {0} is not mapped to an atom")]
    UnmappedVariable(u32),

    #[error("formula is not in negation normal form")]
    NotNnf,

    #[error("operation requires a non-constant formula")]
    ConstantFormula,

    #[error("{0}")]
    Theory(String),

    #[error("conflict is not T-unsatisfiable")]
    ConflictNotUnsat,

    #[error("assignment is not total over the atom set")]
    PartialAssignment,

    #[error("query requires a {required} artifact, got {actual}")]
    ModeViolation {
        required: &'static str,
        actual: &'static str,
    },

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("operands belong to different BDD managers or orders")]
    MixedManagers,

    #[error("variable {0} does not occur in the variable order")]
    UnorderedVariable(u32),

    #[error("oracle bound exceeded: {atoms} atoms, bound is {bound}")]
    OracleBound { atoms: usize, bound: usize },

    #[error("time budget exhausted during {0}")]
    Timeout(&'static str),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("malformed file, line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
