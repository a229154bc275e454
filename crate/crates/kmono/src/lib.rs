//! Sample-based testing and learning of k-monotone functions on the
//! hypercube and hypergrid.

pub mod chains;
pub mod error;
pub mod downsample;
pub mod fourier;
pub mod function;
pub mod learners;
pub mod oracle;
pub mod talagrand;
pub mod testers;

pub use error::{Error, Result};
pub use function::{DomainKind, FunctionTable, Point};
