//! A small feedforward network with a graph-convolution front layer.

mod data;
mod layers;
mod model;
mod train;

pub use data::{make_translated_dataset, Centers, Dataset, PatternConfig};
pub use layers::{ConvGradients, ConvLayer, Dense, DenseGradients};
pub use model::{Front, Model, ModelConfig};
pub use train::{metrics_csv, select_learning_rate, train, EpochMetrics, TrainConfig, LR_GRID};
