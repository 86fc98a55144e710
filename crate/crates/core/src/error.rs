use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("empty input")]
    EmptyInput,
    #[error("system has no variables")]
    NoVariables,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("{polys} polynomials in {vars} variables: codimension cannot exceed the number of variables")]
    Overdetermined { polys: usize, vars: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("system is not square: {equations} equations in {unknowns} unknowns")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("path budget exceeded: {required} paths required, limit {limit}")]
    PathBudgetExceeded { required: u64, limit: u64 },
    #[error("start point {index} has residual {residual:.3e}, too large to track from")]
    BadStartPoint { index: usize, residual: f64 },
    #[error("parameter dimension mismatch: expected {expected}, got {got}")]
    ParameterMismatch { expected: usize, got: usize },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

/// Errors raised by the geometric, sampling, reach and homology layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("all {paths} paths ended singular or diverged; the base point is not generic")]
    DegenerateBasePoint { paths: u64 },
    #[error("normal locus has no real points: the real variety is empty or every path failed")]
    EmptyNormalLocus,
    #[error("variety dimension {0} is not positive")]
    BadDimension(i64),
    #[error("bottleneck locus appears infinite; supply a b2 override")]
    InfiniteBottlenecks,
    #[error("no real bottleneck pairs were found")]
    NoBottlenecks,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error("singular point: Jacobian is rank deficient (smallest singular value {0:.3e})")]
    SingularPoint(f64),
    #[error("point is off the unit sphere by {0:.3e}")]
    OffSphere(f64),
    #[error("reach iteration cap reached after {halvings} halvings (last m = {m:.4e}, epsilon = {epsilon:.4e})")]
    ReachIterationCap { halvings: usize, m: f64, epsilon: f64 },
    #[error("top dimension {requested} exceeds what the complex supports ({cap})")]
    TopDimension { requested: usize, cap: usize },
    #[error("missing input for certification: {0}")]
    MissingCertificateInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
