//! Realizability, shattering and sample-complexity tools for contrastive
//! comparison queries (triplets, quadruplets and k-negative tuples).

pub mod bounds;
pub mod class;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod query;
pub mod realize;
pub mod seed;
pub mod shatter;
pub mod sim;
pub mod verdict;

pub use class::HypothesisClass;
pub use error::{Error, Result};
pub use model::{
    Coordinates, DistanceMatrix, DistanceModel, Embedding, Geometry, Partition, Rational,
    WeightedTree,
};
pub use query::{Comparison, Label, LabelVector, Pair, Query, QueryKind, QuerySet};
pub use verdict::{Certificate, FeasibilityVerdict, Status};
