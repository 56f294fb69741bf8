use thiserror::Error;

/// Errors surfaced by the library's contract checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("composite modulus {0}")]
    CompositeModulus(u64),
    #[error("even prime unsupported")]
    EvenPrime,
    #[error("value {value} has no inverse mod {modulus}")]
    NotInvertible { value: u64, modulus: u64 },
    #[error("modulus {0} exceeds 2^63")]
    ModulusTooLarge(u64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix not in SL(2, Z/{0}Z)")]
    NotSpecialLinear(u64),
    #[error("triangular matrix has no big-cell Bruhat form")]
    TriangularMatrix,
    #[error("torus not split-cyclic at {0}")]
    NotSplit(u64),
    #[error("map is triangular mod {0}")]
    Triangular(u64),
    #[error("not a valid cat map: {0}")]
    InvalidMap(String),
    #[error("use psi_zero/psi_infinity for the trivial character")]
    TrivialCharacter,
    #[error("nontrivial character required")]
    NontrivialRequired,
    #[error("twist must be nonzero mod {0}")]
    ZeroTwist(u64),
    #[error("prime {0} above configured limit {1}")]
    AboveLimit(u64, u64),
    #[error("empty sample set")]
    EmptySamples,
    #[error("sample {0} outside [0,1]")]
    SampleOutOfRange(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("oracle diagonalization failed after {0} attempts (eigenvalue collisions)")]
    OracleDegenerate(u32),
    #[error("unknown kernel '{0}' (expected one of: direct, fft, auto)")]
    UnknownKernel(String),
    #[error("unknown counting strategy '{0}' (expected one of: convolution, brute-force)")]
    UnknownStrategy(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
