use thiserror::Error;

/// Every failure mode of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("warping function must be positive, got {0}")]
    NonPositivePhi(f64),
    #[error("dimension n = {0} is not supported (need n >= 4)")]
    BadDimension(usize),
    #[error("parameter {value} outside the admissible domain: {what}")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("initial data inconsistent with first integral: residual {residual:e} exceeds {tol:e}")]
    Inconsistent { residual: f64, tol: f64 },
    #[error("first-integral drift {drift:e} exceeds {tol:e}; reduce the step")]
    StepTooLarge { drift: f64, tol: f64 },
    #[error("warping function reached the floor {floor:e} at t = {t}")]
    DomainExhausted { t: f64, floor: f64 },
    #[error("parameters are not of the Schwarzschild family: {0}")]
    WrongFamily(String),
    #[error("operation requires rho = 0 and eps = 1")]
    WrongRegime,
    #[error("chart point is singular: {0}")]
    SingularChartPoint(String),
    #[error("coordinate {index} = {value} outside chart domain [{lo}, {hi}]")]
    OutsideDomain { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("profile embeddability margin {margin:e} violated at t = {t}")]
    MarginViolated { t: f64, margin: f64 },
    #[error("warping coordinate <h1, e> = {0} is not positive")]
    NonPositiveWarp(f64),
    #[error("tangent vectors are rank deficient")]
    RankDeficient,
    #[error("profile normal degenerates: 1 - phi'^2 = {0:e}")]
    DegenerateDelta(f64),
    #[error("shape operators do not commute: {0:e}")]
    NotFlatNormal(f64),
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("no normal rotation brings the shape operators into normal form")]
    NotNormalForm,
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
