use std::fmt;

/// Crate-wide error type. Variants map onto the CLI exit-code contract:
/// input/grammar problems exit 2, PrecisionExhausted exits 3, violated
/// mathematical hypotheses exit 4 (see the cli crate).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grammar or file-format violation. `what` names the grammar.
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },
    /// A number used as a prime base is not prime.
    NotPrime(u64),
    /// A rational whose factorization leaves a cofactor too large to certify prime.
    FactorOverflow { value: String },
    /// Zero magnitude where a positive one is required (division, roots, cosets).
    ZeroMagnitude { context: &'static str },
    DivisionByZero,
    /// Hahn-backend arithmetic consumed every known coefficient of a truncated
    /// series; the result is indistinguishable from zero at the carried order.
    PrecisionExhausted { context: String },
    /// Requested an exact scalar of a given absolute value outside the field's value group.
    NotInValueGroup { magnitude: String },
    /// No value-group point of the requested coset lies in the interval.
    EmptyIntersection { lo: String, hi: String },
    /// Discrete-group representative search over an interval shorter than one period.
    IntervalTooShort { lo: String, hi: String },
    /// Mixed p-adic and Hahn values, or mismatched primes/tail orders.
    FieldMismatch { expected: String, got: String },
    DimensionMismatch { expected: usize, got: usize },
    /// Zero vector where a nonzero one is required.
    ZeroVector { context: &'static str },
    /// A vector lies outside the span a map is defined on.
    NotInDomain,
    /// Dependent spanning vectors were assigned images that disagree on the dependency.
    InconsistentImages { index: usize },
    /// A base extension was requested at level t but the given base only
    /// certifies a smaller orthogonality defect.
    DefectBelowThreshold { defect: String, needed: String },
    /// Operation requires a densely valued field.
    NotDenselyValued,
    /// Epsilon outside (0, 1).
    EpsilonOutOfRange { eps: String },
    /// Registry parameter r outside (1/2, 1).
    RadiusOutOfRange { r: String },
    /// patch: the two isometries differ by an operator of norm >= 1 on the
    /// subspace; carries the printed base vector witnessing it.
    OperatorNormNotBelowOne { norm: String, witness: String },
    /// Immediate extension impossible; carries a printed witness vector from the
    /// orthocomplement (parseable in the ambient field's scalar grammar).
    NotImmediate { witness: String },
    /// Structural fallback for immediate extension requests outside the supported shape.
    Unsupported { context: String },
    /// Ambient allocator was constructed with a capacity and ran out of coordinates.
    AllocatorExhausted,
    /// An approximation hypothesis failed; `index` is 1-based like the
    /// perturbation checker's verdict.
    HypothesisFailed { index: usize, detail: String },
    /// Ball stream violates the required shape (not strictly decreasing in (1/2, 1]).
    InvalidStream { index: usize, detail: String },
    Io(String),
    Json(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { what, input, reason } => {
                write!(f, "cannot parse {what} from {input:?}: {reason}")
            }
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::FactorOverflow { value } => {
                write!(f, "cannot factor {value}: prime cofactor exceeds 64 bits")
            }
            Error::ZeroMagnitude { context } => write!(f, "zero magnitude in {context}"),
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::PrecisionExhausted { context } => {
                write!(f, "precision exhausted (Hahn backend cancellation) in {context}")
            }
            Error::NotInValueGroup { magnitude } => {
                write!(f, "{magnitude} is not in the field's value group")
            }
            Error::EmptyIntersection { lo, hi } => {
                write!(f, "no group point with the requested coset in ({lo}, {hi}]")
            }
            Error::IntervalTooShort { lo, hi } => {
                write!(f, "interval ({lo}, {hi}] is shorter than one discrete group period")
            }
            Error::FieldMismatch { expected, got } => {
                write!(f, "field mismatch: expected {expected}, got {got}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::ZeroVector { context } => write!(f, "zero vector in {context}"),
            Error::NotInDomain => write!(f, "vector lies outside the map's domain span"),
            Error::InconsistentImages { index } => {
                write!(f, "spanning vector {index} is dependent and its image disagrees")
            }
            Error::DefectBelowThreshold { defect, needed } => {
                write!(f, "orthogonality defect {defect} is below the required {needed}")
            }
            Error::NotDenselyValued => write!(f, "field is not densely valued"),
            Error::EpsilonOutOfRange { eps } => write!(f, "epsilon {eps} outside (0, 1)"),
            Error::RadiusOutOfRange { r } => write!(f, "registry radius {r} outside (1/2, 1)"),
            Error::OperatorNormNotBelowOne { norm, witness } => {
                write!(f, "operator norm {norm} of the difference is not below 1 (witness {witness})")
            }
            Error::NotImmediate { witness } => {
                write!(f, "extension is not immediate: orthocomplement witness {witness}")
            }
            Error::Unsupported { context } => write!(f, "unsupported: {context}"),
            Error::AllocatorExhausted => write!(f, "ambient coordinate allocator exhausted"),
            Error::HypothesisFailed { index, detail } => {
                write!(f, "hypothesis failed at vector {index}: {detail}")
            }
            Error::InvalidStream { index, detail } => {
                write!(f, "invalid ball stream at position {index}: {detail}")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
