//! Scaling-law analysis for contrastive image-text models.

pub mod cli;
pub mod contrastive;
pub mod dedup;
pub mod embedding;
pub mod error;
pub mod evalproto;
pub mod records;
pub mod scaling;
pub mod util;

pub use error::{Error, Result};
