use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("payload has {got} bits, frame needs {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("unsupported modulation order {0} (expected 4 or 16)")]
    Modulation(usize),

    #[error("invalid frame spec: {0}")]
    FrameSpec(String),

    #[error("invalid channel profile: {0}")]
    Profile(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("channel has zero energy")]
    ZeroEnergy,

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("dataset format: {0}")]
    Format(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
