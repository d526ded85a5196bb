//! Full-record encoding and conditional frequency and mean queries.

mod index;
mod ioh;
mod query;

pub use index::*;
pub use ioh::*;
pub use query::*;
