use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    Input(String),

    /// A linear solve hit a (numerically) singular matrix.
    #[error("singular {what} at t = {t} (reciprocal condition {rcond:e})")]
    Singular {
        what: &'static str,
        t: f64,
        rcond: f64,
    },

    #[error("pade2 map singular for step h = {h} (reciprocal condition {rcond:e})")]
    PadeSingular { h: f64, rcond: f64 },

    #[error("misuse: {0}")]
    Misuse(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("player {player}: {source}")]
    Player {
        player: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("extrapolation diagnostics: {0}")]
    Extrapolation(String),
}

impl Error {
    pub(crate) fn dims(op: &'static str, expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::Dimension {
            op,
            expected: alloc::format!("{}x{}", expected.0, expected.1),
            got: alloc::format!("{}x{}", got.0, got.1),
        }
    }

    pub(crate) fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }

    /// Tag an error with a one-based player index.
    pub(crate) fn for_player(self, player: usize) -> Self {
        Error::Player {
            player,
            source: alloc::boxed::Box::new(self),
        }
    }

    /// Attach a time to a singularity error raised without one.
    pub(crate) fn at_time(self, t: f64) -> Self {
        match self {
            Error::Singular { what, rcond, .. } => Error::Singular { what, t, rcond },
            other => other,
        }
    }
}
