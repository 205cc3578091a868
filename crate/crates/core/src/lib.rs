//! Degeneracy, spread and threshold tooling for uniform hypergraphs.

pub mod bounds;
pub mod degeneracy;
pub mod embed;
pub mod error;
pub mod hypercore;
pub mod rational;
pub mod spread;
pub mod structgen;
pub mod threshold;

pub type Rational = num_rational::Ratio<i64>;

pub use error::{BestSoFar, Budget, Error, Result};
pub use hypercore::{Hypergraph, VertexSet};
