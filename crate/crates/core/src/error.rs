use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("unsupported dimension d = {0} (supported: 2, 3)")]
    UnsupportedDimension(u32),

    #[error("grid must have at least {min} nodes, got {got}")]
    GridTooSmall { got: usize, min: usize },

    #[error("profile has {heights} heights for {nodes} grid nodes")]
    ProfileGridMismatch { heights: usize, nodes: usize },

    #[error("operation requires a finite container radius")]
    InfiniteRadius,

    #[error("newton solve did not converge after {iters} iterations (residual {residual:.3e})")]
    NewtonDiverged { iters: usize, residual: f64 },

    #[error("profile height exceeded ceiling {ceiling:.3e} (max |h - F| = {max_dev:.3e})")]
    HeightCeiling { max_dev: f64, ceiling: f64 },

    #[error("shooting bracket not found on [{lo:.6e}, {hi:.6e}] for {target}")]
    ShootingBracket { lo: f64, hi: f64, target: String },

    #[error("secant iteration on lambda failed to reach volume tolerance (last |volume| = {volume:.3e})")]
    VolumeSecant { volume: f64 },

    #[error("cutoff radius r0 = {r0} outside (1, {outer})")]
    CutoffOutOfRange { r0: f64, outer: f64 },

    #[error("time {t} outside trace range [{t0}, {t1}]")]
    TimeOutsideTrace { t: f64, t0: f64, t1: f64 },

    #[error("evolution step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
