use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("start position {n0} lies outside the window [{n_min}, {n_max}]")]
    PositionOutsideWindow { n0: i64, n_min: i64, n_max: i64 },

    #[error("invalid window [{n_min}, {n_max}]")]
    InvalidWindow { n_min: i64, n_max: i64 },

    #[error("spinor has zero norm")]
    ZeroSpinor,

    #[error("state has zero norm")]
    ZeroState,

    #[error("coin is not unitary (max |C†C - I| entry = {deviation:e})")]
    NonUnitaryCoin { deviation: f64 },

    #[error("invalid phase profile: {0}")]
    InvalidPhase(String),

    #[error("phase table covers [{table_min}, {table_max}] but the window needs [{n_min}, {n_max}]")]
    PhaseTableTooShort {
        table_min: i64,
        table_max: i64,
        n_min: i64,
        n_max: i64,
    },

    #[error("step {m}: nonzero amplitude at n = {n} would leave the window")]
    BoundaryCrossing { m: usize, n: i64 },

    #[error("states live on different windows")]
    WindowMismatch,

    #[error("packet amplitude at the window boundary is {amplitude:e}, above 1e-12")]
    WindowTooSmall { amplitude: f64 },

    #[error("invalid packet width {0} (need width >= 1)")]
    InvalidWidth(f64),

    #[error("momentum-space propagation only supports a zero phase profile")]
    NonzeroPhase,

    #[error("window length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("trajectory too short: need {needed} recorded steps, have {got}")]
    TrajectoryTooShort { needed: usize, got: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("trajectory is not recorded at every step")]
    SparseTrajectory,

    #[error("initial state is not a single-site start")]
    NotSingleSite,

    #[error("initial state is not band-resolved (dominant band holds {dominant:.4} < 0.95)")]
    NotBandResolved { dominant: f64 },

    #[error("selected region is empty")]
    EmptyRegion,

    #[error("series is constant, no oscillation to measure")]
    ConstantSeries,

    #[error("series too short: need at least {needed} samples, have {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("point (n = {n}, m = {m}) is outside the ballistic cone")]
    OutsideCone { n: i64, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config value `{path}`: {message}")]
    ConfigValue { path: String, message: String },

    #[error("malformed grid file: {0}")]
    MalformedGrid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigValue {
            path: path.into(),
            message: message.into(),
        }
    }
}
