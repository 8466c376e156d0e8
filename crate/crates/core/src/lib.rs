pub mod audit;
pub mod corpus;
pub mod error;
pub mod insights;
pub mod lexical_bias;
pub mod lexicons;
pub mod persuasion;
pub mod stats;
pub mod style_bias;

pub use error::{Error, Result};
