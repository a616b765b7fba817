use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed rational {0:?}")]
    Rational(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("unknown player {0:?}")]
    UnknownPlayer(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration bound exceeded: {what} ({size} > {bound})")]
    BoundExceeded {
        what: &'static str,
        size: u128,
        bound: u128,
    },
    #[error("invalid formula: {0}")]
    Formula(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("unknown {kind} {name:?}")]
    UnknownStrategy { kind: &'static str, name: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
