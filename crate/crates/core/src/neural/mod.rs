//! A small dense network engine: exactly what the Q-network needs.

mod loss;
mod mlp;
mod rmsprop;

use serde::{Deserialize, Serialize};

pub use loss::{smooth_l1, LossReport};
pub use mlp::{
    init_mlp, Dense, ForwardCache, Gradients, Mlp, DEFAULT_HIDDEN_LAYERS, DEFAULT_HIDDEN_WIDTH,
};
pub use rmsprop::{
    rmsprop_update, RmsPropState, DEFAULT_DECAY, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE,
};

pub const NETWORK_CHECKPOINT_VERSION: u32 = 1;

/// Serialized network with its optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub version: u32,
    pub dims: Vec<usize>,
    pub network: Mlp,
    pub optimizer: RmsPropState,
    pub round: u64,
}
