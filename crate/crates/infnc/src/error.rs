use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("enumeration cap exceeded: n = {n} > {cap} (set INFNC_MAX_N to override)")]
    CapExceeded { n: usize, cap: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("not a symmetric annular permutation: {0}")]
    NotAnnular(String),
    #[error("sigma*delta is not a pairing")]
    NotPairing,
    #[error("missing moment value for word \"{0}\" (pass --sparse to default absent moments to 0)")]
    MissingMoment(String),
    #[error("non-canonical word key \"{0}\": canonical form is \"{1}\"")]
    NonCanonicalKey(String, String),
    #[error("distribution must be tracial and transpose-symmetric for {0}")]
    NeedsSymmetry(&'static str),
    #[error("degree {degree} exceeds distribution degree bound {bound}")]
    DegreeExceeded { degree: usize, bound: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
