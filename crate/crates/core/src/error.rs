use thiserror::Error;

/// Errors produced by the geometry and parsing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("root finder failed on [{lo}, {hi}]: {reason}")]
    RootFinder { lo: f64, hi: f64, reason: String },

    #[error("zero of h_c on the range boundary near z = {z}")]
    ZeroOnBoundary { z: f64 },

    #[error("chart breakdown: |{coord}| = {value:e} is below the chart tolerance")]
    ChartBreakdown { coord: char, value: f64 },

    #[error("point is on a red line (|f_S| = {f:e}); tau_DB is undefined there")]
    RedLine { f: f64 },

    #[error("point is not on a red line (|f_S| = {f:e})")]
    NotOnRedLine { f: f64 },

    #[error("Newton solve for the dependent chart coordinate did not converge")]
    DependentCoordinate,

    #[error("projection onto the leaf did not converge (|C - c| = {residual:e})")]
    ProjectionFailed { residual: f64 },

    #[error("Casimir gradient vanishes near ({x}, {y}, {z}); cannot project")]
    VanishingGradient { x: f64, y: f64, z: f64 },

    #[error("start point off leaf: |C - c| = {residual:e} exceeds tolerance {tol:e}")]
    StartOffLeaf { residual: f64, tol: f64 },

    #[error("start point in the red zone: |f| = {f:e}")]
    StartInRedZone { f: f64 },

    #[error("no chart is valid near the point (point-leaf proximity)")]
    PointLeafProximity,
}

pub type Result<T> = std::result::Result<T, Error>;
