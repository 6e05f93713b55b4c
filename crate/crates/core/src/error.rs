use std::path::PathBuf;

use crate::category::BugCategory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("category {0} has no training records")]
    EmptyCategory(BugCategory),
    #[error("unknown feature/modification `{0}`")]
    UnknownFeature(String),
    #[error("malformed catalog at line {line}: {message}")]
    MalformedCatalog { line: usize, message: String },
    #[error("cannot read repository {path}: {message}")]
    RepoUnreadable { path: String, message: String },
    #[error("branch `{0}` not found")]
    BranchMissing(String),
    #[error("malformed diff at line {line}: {message}")]
    MalformedDiff { line: usize, message: String },
    #[error("malformed review file at line {line}: {message}")]
    MalformedReviewFile { line: usize, message: String },
    #[error("unknown triple id `{0}`")]
    UnknownTripleId(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no source pair parses on both sides ({0})")]
    Unparseable(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("catalog mismatch: expected {expected}, found {found}")]
    CatalogMismatch { expected: String, found: String },
    #[error("unsupported version: {0}")]
    VersionMismatch(String),
    #[error("checksum mismatch: header says {expected}, content hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("not enough {category} records: requested {requested}, available {available}")]
    InsufficientRecords { category: BugCategory, requested: usize, available: usize },
    #[error("patch set is empty")]
    EmptyPatchSet,
    #[error("candidates belong to different bugs ({0} and {1})")]
    MixedBugIds(String, String),
    #[error("model has no non-empty category")]
    EmptyModel,
    #[error("no outcomes to summarize")]
    EmptyOutcomes,
    #[error("seed list is empty")]
    EmptySeeds,
    #[error("malformed record {path}: {message}")]
    MalformedRecord { path: String, message: String },
    #[error("malformed manifest at line {line}: {message}")]
    MalformedManifest { line: usize, message: String },
    #[error("git: {0}")]
    Git(#[from] git2::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status for this error class. Zero is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Io { .. } => 3,
            Error::RepoUnreadable { .. } | Error::BranchMissing(_) | Error::Git(_) => 4,
            Error::MalformedDiff { .. }
            | Error::MalformedReviewFile { .. }
            | Error::MalformedRecord { .. }
            | Error::MalformedManifest { .. }
            | Error::MalformedCatalog { .. } => 5,
            Error::UnknownFeature(_) | Error::UnknownTripleId(_) => 6,
            Error::Unparseable(_) => 7,
            Error::CatalogMismatch { .. } | Error::VersionMismatch(_) | Error::ChecksumMismatch { .. } => 8,
            Error::EmptyCorpus | Error::InsufficientRecords { .. } | Error::EmptySeeds => 9,
            Error::EmptyCategory(_) | Error::EmptyModel => 10,
            Error::EmptyPatchSet | Error::MixedBugIds(..) | Error::EmptyOutcomes => 11,
        }
    }
}
