//! Adam, the training loop, evaluation and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod train;

pub use adam::AdamState;
pub use checkpoint::{format_checkpoint, load_checkpoint, parse_checkpoint, save_checkpoint};
pub use train::{evaluate, train, EpochRecord, Evaluation, TrainConfig};
