use thiserror::Error;

/// Which root of the time-of-flight relation was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    /// `sin θ_k = 0`: the relation is linear in the time-of-flight.
    Linear,
    /// Negative square root, used when `θ_k mod 2π ∈ (0, π)`.
    Minus,
    /// Positive square root, used when `θ_k mod 2π ∈ (π, 2π)`.
    Plus,
}

impl std::fmt::Display for RootBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RootBranch::Linear => "linear",
            RootBranch::Minus => "minus",
            RootBranch::Plus => "plus",
        })
    }
}

/// Errors raised by the models. Payloads are reported in `f64` regardless of the
/// scalar type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angular velocity must be positive (omega = {omega})")]
    NonPositiveOmega { omega: f64 },

    #[error("time-of-flight quadratic has complex roots: {a} d^2 + {b} d + {c}, discriminant {discriminant}")]
    ComplexRoots {
        a: f64,
        b: f64,
        c: f64,
        discriminant: f64,
    },

    #[error("selected time-of-flight root is not positive (delta = {delta}, branch {branch}, other root {other:?})")]
    NonPositiveDelta {
        delta: f64,
        branch: RootBranch,
        other: Option<f64>,
    },

    #[error("linear time-of-flight relation is degenerate (denominator {denominator})")]
    DegenerateLinear { denominator: f64 },

    #[error("impulse is zero; the point of application is undefined")]
    ZeroImpulse,

    #[error("point of application r = {offset} lies off the stick (|r| must be < {half_length})")]
    OffsetOffStick { offset: f64, half_length: f64 },

    #[error("zero dynamics has no real solution at theta = {theta}, omega = {omega} (discriminant {discriminant})")]
    NoRealSolution {
        theta: f64,
        omega: f64,
        discriminant: f64,
    },

    #[error("phase offset {phase} makes the continuous invariant singular (sin(phase) = 0)")]
    SingularPhase { phase: f64 },

    #[error("dtheta / 2pi = {ratio} is not a rational number with a small denominator")]
    NotRationalMultiple { ratio: f64 },

    #[error("trajectory has {len} points, at least {required} are needed")]
    TrajectoryTooShort { len: usize, required: usize },

    #[error("reference phase visited {found} time(s); at least two visits are needed")]
    InsufficientRecurrences { found: usize },

    #[error("pair is not stabilizable: {reason} (controllability rank {rank} of {dim})")]
    NotStabilizable {
        reason: String,
        rank: usize,
        dim: usize,
    },

    #[error("singular matrix in {context}")]
    Singular { context: &'static str },

    #[error("infeasible at step k = {step} (theta = {theta}, omega = {omega}, h = {h:?}, v = {v:?}): {source}")]
    Infeasible {
        step: usize,
        theta: f64,
        omega: f64,
        h: [f64; 2],
        v: [f64; 2],
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
