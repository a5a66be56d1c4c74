use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("knot index {name} = {value} must be a positive integer")]
    NonPositive { name: &'static str, value: i64 },
    #[error("indices ({0}, {1}) are not coprime")]
    NotCoprime(i64, i64),
    #[error("invalid physical scales: {0}")]
    InvalidScales(String),
    #[error("initial-field formula requires T = 0, got T = {0}")]
    NotInitialTime(f64),
    #[error("field denominator not representable at R² = {r2}, T = {t}")]
    NumericOverflow { r2: f64, t: f64 },
    #[error("finite-difference step {h} below the round-off floor {floor}")]
    StepTooSmall { h: f64, floor: f64 },
    #[error("wave vector has zero magnitude")]
    ZeroWaveVector,
    #[error("grid Nyquist wavenumber {nyquist} below the required {required}")]
    GridTooCoarse { nyquist: f64, required: f64 },
    #[error("grid half-width {half_width} too small: boundary field fraction {estimate:e} exceeds {tolerance:e}")]
    DomainTooSmall {
        half_width: f64,
        estimate: f64,
        tolerance: f64,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("quadrature did not converge: error estimate {estimate:e} at radial order {radial_order}, angular order {angular_order}")]
    NoConvergence {
        estimate: f64,
        radial_order: usize,
        angular_order: usize,
    },
    #[error("monomial degree {0} exceeds the supported maximum of 8")]
    UnsupportedDegree(u32),
    #[error("field magnitude {magnitude:e} below null threshold {threshold:e} at ({x}, {y}, {z})")]
    NullFieldRegion {
        magnitude: f64,
        threshold: f64,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("field line did not close within arc length {0}")]
    NoClosure(f64),
    #[error("curve is not closed")]
    NotClosed,
    #[error("winding count not integral: residual {0}")]
    AmbiguousWinding(f64),
    #[error("linking integral not integral: raw value {raw}, residual {residual}")]
    AmbiguousLinking { raw: f64, residual: f64 },
    #[error("curves too close: minimum distance {0:e}")]
    CurvesTooClose(f64),
    #[error("zero field intensity at a correlation point")]
    ZeroIntensity,
    #[error("mode index {index} out of range for a set of {len} modes")]
    ModeOutOfRange { index: usize, len: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
