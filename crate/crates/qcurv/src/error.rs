use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcurvError {
    #[error("elementary symmetric function of order {0} is not supported (max 2)")]
    UnsupportedOrder(usize),
    #[error("dimension {n} is below the minimum {min}")]
    DimensionTooLow { n: usize, min: usize },
    #[error("product of Einstein factors needs at least one factor")]
    EmptyProduct,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("conformal factor is not positive (min {min:e})")]
    NonPositiveConformalFactor { min: f64 },
    #[error("{nodes} quadrature nodes cannot resolve degree {lmax}")]
    UnderResolved { nodes: usize, lmax: usize },
    #[error("linearized eigenvalue {value:e} at degree {degree} is below the invertibility threshold")]
    DegenerateOperator { degree: usize, value: f64 },
    #[error("operator -Δ + c is not positive for c = {0}")]
    NonPositiveOperator(f64),
    #[error("two-sided shooting failed: {0}")]
    ShootingFailure(String),
    #[error("fit window [{lo}, {hi}] holds {count} samples; at least 10 are needed")]
    EmptyWindow { lo: f64, hi: f64, count: usize },
    #[error("point lies outside the chart of the weight")]
    PointOutsideChart,
    #[error("no admissible sample pairs for the Hölder quotient")]
    NoAdmissiblePairs,
    #[error("inverted chart point |z| = {0} lies inside the unit ball")]
    InsideUnitBall(f64),
    #[error("finite-difference stencil leaves the smooth region")]
    StencilOutOfRegion,
    #[error("iteration is not contracting (ratios {0:?})")]
    NotContracting(Vec<f64>),
    #[error("iterate left the ball: norm {norm:e} > radius {radius:e}")]
    BallExit { norm: f64, radius: f64 },
}

pub type Result<T> = std::result::Result<T, QcurvError>;
