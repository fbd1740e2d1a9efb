use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs} vs {rhs}")]
    DimensionMismatch {
        op: &'static str,
        lhs: usize,
        rhs: usize,
    },

    #[error("operator is not Hermitian: max|A - A^H| = {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("eigensolver failed to converge: {detail}")]
    EigensolverFailure { detail: String },

    #[error("state vector is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("site index {site} out of range 1..={l}")]
    SiteOutOfRange { site: usize, l: usize },

    #[error("invalid bipartition: L_S = {l_s} must satisfy 1 <= L_S < L = {l}")]
    InvalidBipartition { l: usize, l_s: usize },

    #[error(
        "energy gaps degenerate at tolerance {tol:.3e} \
         (min level spacing {min_spacing:.3e}, min gap collision {min_collision:.3e}); \
         analytic infinite-time average refused, use a finite-T numeric average instead"
    )]
    DegenerateGaps {
        tol: f64,
        min_spacing: f64,
        min_collision: f64,
    },

    #[error("spectrum too large for the O(d^2) gap scan: dim {dim} > 4096")]
    SpectrumTooLarge { dim: usize },

    #[error("time grid too coarse: dt * spectral width = {product:.3e} > 0.25 (need n_points >= {needed})")]
    GridTooCoarse { product: f64, needed: usize },

    #[error("time {tau} outside grid range (0, {t_max}]")]
    TauOutOfRange { tau: f64, t_max: f64 },

    #[error("Hamiltonian term locality not registered; S/B/SB split unavailable")]
    SplitUnavailable,

    #[error("trace deviates from 1 by {deviation:.3e}")]
    NotUnitTrace { deviation: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit-code class: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::Json { .. } => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
