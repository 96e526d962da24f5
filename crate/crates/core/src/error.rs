use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("division by a non-constant expression at byte {pos}")]
    NonConstantDivision { pos: usize },
    #[error("division by zero at byte {pos}")]
    DivisionByZero { pos: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("polynomial is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: u32 },
    #[error("expected a homogeneous quartic in 4 variables")]
    NotQuartic,
    #[error("zero polynomial not allowed here")]
    ZeroPolynomial,
    #[error("both polynomials are constant in variable {var}")]
    ConstantInVariable { var: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("all coordinates of a projective point are zero")]
    ZeroPoint,
    #[error("point is not in chart {chart}")]
    NotInChart { chart: usize },
    #[error("chart index {0} out of range")]
    BadChart(usize),

    #[error("point is too close to the singular locus (all partials below {threshold:e})")]
    NearSingular { threshold: f64 },
    #[error("vector is not tangent (residual {residual:e})")]
    NotTangent { residual: f64 },
    #[error("fewer than two admissible pivots at this point")]
    TooFewPivots,
    #[error("point is off the surface (residual {residual:e})")]
    OffSurface { residual: f64 },
    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("hyperkähler constraint violated: λμ − |τ|² − 1 = {defect:e}")]
    ConstraintViolated { defect: f64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("curves share a common component")]
    CommonComponent,
    #[error("no generic coordinate change found after {attempts} attempts")]
    NonGeneric { attempts: usize },
    #[error("numeric root recovery residual {residual:e} exceeds tolerance")]
    RootRecovery { residual: f64 },
    #[error("slice polynomial vanishes identically")]
    DegenerateSlice,

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
