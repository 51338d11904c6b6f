use thiserror::Error;

/// Errors raised by the geometric and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart `{chart}` requires c = {expected}, got c = {got}")]
    ChartMismatch {
        chart: &'static str,
        expected: i32,
        got: i32,
    },
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("point ({x}, {y}, {z}) outside the {chart} domain")]
    Domain {
        chart: &'static str,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("curvature {value} is not positive at ({x}, {y}, {z})")]
    NonpositiveCurvature { value: f64, x: f64, y: f64, z: f64 },
    #[error("ellipticity lost: D = {value}")]
    Ellipticity { value: f64 },
    #[error("expression: {0}")]
    Expr(String),
    #[error("curve is not regular: min |γ'| = {min_speed:e} (threshold {threshold:e})")]
    Irregular { min_speed: f64, threshold: f64 },
    #[error("curve is not strictly convex")]
    NotStrictlyConvex,
    #[error("curve must have negative curvature for the construction")]
    WrongOrientation,
    #[error("frame is not orthonormal (Gram deviation {0:e})")]
    FrameNotOrthonormal(f64),
    #[error("jet does not satisfy the equation: residual {residual:e} > {tolerance:e}")]
    NotASolution { residual: f64, tolerance: f64 },
    #[error("no sign makes the conformal metric positive definite")]
    IndefiniteMetric,
    #[error("convexifier verification failed: {0}")]
    Convexifier(String),
    #[error("coefficient blow-up: growth ratio {growth:.4} times R = {r} exceeds 1")]
    BlowUp { growth: f64, r: f64 },
    #[error("degenerate first fundamental form at {0}")]
    DegenerateMetric(String),
    #[error("Q vanishes at an interior point (u = {u}, v = {v}); reduce R")]
    QVanishes { u: f64, v: f64 },
    #[error("μ < |Q| beyond tolerance at (u = {u}, v = {v})")]
    MuBelowQ { u: f64, v: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("inconclusive classification: {0}")]
    Inconclusive(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
