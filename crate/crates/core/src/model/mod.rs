//! The CNN-GRU network, its two ablations, and checkpoint persistence.

mod checkpoint;
mod config;
mod network;
mod params;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
};
pub use config::{ArchKind, ModelConfig};
pub use network::{argmax, build_model, count_params, ForwardCache, ForwardOutput, LossParts, Model};
pub use params::ModelParams;
