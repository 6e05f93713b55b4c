//! Frequency-based re-ranking of automated repair candidates.
//!
//! Bug-fixing commits mined from version control are classified twice: the
//! commit message gives a [`BugCategory`], the syntactic change gives a
//! [`PatchKind`]. Counting kinds per category yields a [`FrequencyModel`].
//! Candidate patches for a new bug are then classified the same way, the
//! bug's category is estimated from them, and candidates are re-ranked by
//! how often their kind fixed bugs of that category.

pub mod bugclass;
pub mod catalog;
pub mod category;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod kind;
pub mod miner;
pub mod model;
pub mod patchclass;
pub mod ranker;
pub mod review;
pub mod scalar;
pub mod synth;
pub mod trainer;
pub mod unidiff;

pub use catalog::{Catalog, Feature, FeatureModification, Modification, Qualifier};
pub use category::BugCategory;
pub use error::{Error, Result};
pub use kind::PatchKind;
pub use model::FrequencyModel;
pub use scalar::Scalar;

/// Default floating frequency type.
pub type Frequency = f64;
/// Exact frequency type.
pub type ExactFrequency = num_rational::Ratio<u64>;
