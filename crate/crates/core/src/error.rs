use thiserror::Error;

use crate::group::GroupModel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("model mismatch: {left} vs {right}")]
    ModelMismatch { left: GroupModel, right: GroupModel },

    #[error("element of {model} needs {expected} coordinates, got {got}")]
    Arity {
        model: GroupModel,
        expected: usize,
        got: usize,
    },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("not in canonical family: {0}")]
    NotCanonical(String),

    #[error("index too large or infinite: more than {cap} cosets")]
    IndexTooLarge { cap: usize },

    #[error("level {level} out of range 0..={max_depth}")]
    DepthOutOfRange { level: usize, max_depth: usize },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("growth series too short: {got} entries, need {need}")]
    SeriesTooShort { got: usize, need: usize },

    #[error("memory cap exceeded: more than {cap} elements")]
    MemoryCap { cap: usize },

    #[error("element {0} is not in the truncated isotropy group")]
    NotInIsotropy(String),
}
