use thiserror::Error;

/// Failures raised while evaluating geometry at a chart point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("field evaluation produced a non-finite value near {point:?}")]
    EvaluationDomain { point: Vec<f64> },

    #[error("metric is degenerate at {point:?} (pivot {pivot:e})")]
    DegenerateMetric { point: Vec<f64>, pivot: f64 },

    #[error("scaling function is not positive at {point:?} (f = {value})")]
    NonPositiveScaling { point: Vec<f64>, value: f64 },

    #[error("matrix is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("invalid differentiation scheme: {0}")]
    InvalidScheme(String),

    #[error("derivative order {0} is outside 1..=3")]
    UnsupportedOrder(usize),

    #[error("chart box for {0} is empty")]
    EmptyChartBox(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
