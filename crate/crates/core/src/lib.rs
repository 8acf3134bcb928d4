//! Exact computations in Lipschitz-free spaces over finite pointed metric
//! spaces.

pub mod c0_embed;
pub mod dendrogram;
pub mod error;
pub mod flow;
pub mod free_norm;
pub mod generate;
pub mod lipschitz;
pub mod metric;
pub mod separator;
pub mod ultra_ops;

pub use error::{Error, Result};
