pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod matching;
pub mod model;
pub mod optim;

pub use error::{Error, Result};
