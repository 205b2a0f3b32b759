pub mod cli;
pub mod error;
pub mod generator;
pub mod ranking;
pub mod stats;
pub mod theory;
pub mod weights;

pub use error::{Error, Result};
pub use ranking::{RankingState, SchemeSpec};
pub use weights::WeightTable;
