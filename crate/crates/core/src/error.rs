use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("invalid process definition: {0}")]
    Invalid(String),
    #[error("transition row {row} sums to {sum} (expected 1)")]
    RowSum { row: usize, sum: f64 },
    #[error("transition matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("initial distribution sums to {0} (expected 1)")]
    InitialSum(f64),
    #[error("initial distribution is not stationary (max |rho P - rho| = {0:e})")]
    NotStationary(f64),
    #[error("second moment under the stationary law is {0} (expected 1)")]
    NotUnitVariance(f64),
    #[error("no unique stationary distribution (singular system)")]
    NoStationary,
    #[error("indices must be sorted ascending")]
    UnsortedIndices,
    #[error("path length must be at least 1")]
    EmptyPath,
    #[error("Dobrushin sum {0} is not below 2")]
    Dobrushin(f64),
    #[error("potential is not invariant under global spin flip")]
    NotFlipSymmetric,
    #[error("transfer matrix is not primitive")]
    NonPrimitive,
    #[error("chain is not ergodic: no beta < 1 exists")]
    NonErgodic,
    #[error("no beta < 1 on the grid certifies the decay bounds ({0})")]
    DecayNotCertified(String),
    #[error("process has no exact moment oracle")]
    NoOracle,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FillingError {
    #[error("process index {m} out of range 1..={max}")]
    IndexOutOfRange { m: u64, max: u64 },
    #[error("cell ({i}, {j}) out of range for N = {n}")]
    CellOutOfRange { i: usize, j: usize, n: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("custom filling line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("custom filling is not a bijection: {0}")]
    NotBijective(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("path length {got} does not match N(N+1)/2 = {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("eigenvalue iteration did not converge for index {index} after {iterations} sweeps (off-diagonal {residual:e})")]
    NoConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },
    #[error("Catalan number C_{0} exceeds the supported range (k <= 30)")]
    CatalanOverflow(u32),
    #[error("invalid histogram: {0}")]
    Histogram(String),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("enumeration budget exceeded: n^k = {0} > 1e8")]
    BudgetExceeded(f64),
    #[error("exhaustive fiber check supports N <= 400 (got {0})")]
    TooLarge(usize),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Filling(#[from] FillingError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Top-level error for experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Filling(#[from] FillingError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
