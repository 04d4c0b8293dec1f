use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("inner series of a composition must have zero constant term (got {0})")]
    NonZeroConstant(f64),
    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstant,
    #[error("potential has no nondegenerate minimum at the origin: {0}")]
    DegenerateMinimum(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("not a Bogdanov-Takens point: {0}")]
    NotABtPoint(String),
    #[error("interior equilibrium E_alpha does not exist in the positive cone")]
    NoInteriorEquilibrium,
    #[error("internal consistency check failed: {what} (discrepancy {discrepancy:e})")]
    Consistency { what: String, discrepancy: f64 },
    #[error("sign certification failed: {0}")]
    Certification(String),
    #[error("step size underflow at t = {t} (state {state:?})")]
    StepSizeUnderflow { t: f64, state: [f64; 2] },
    #[error("step limit reached at t = {t} (state {state:?})")]
    StepLimit { t: f64, state: [f64; 2] },
    #[error("equilibrium {0} is not a saddle")]
    NotASaddle(String),
    #[error("manifold does not intersect the test segment: {0}")]
    NoIntersection(String),
    #[error("out of domain: {0}")]
    Domain(String),
}
