use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};

pub const DEFAULT_DECAY: f64 = 0.99;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;

/// RMSprop optimizer state: one squared-gradient accumulator per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsPropState {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    /// `[w0, b0, w1, b1, ...]`, shaped like the network's parameters.
    pub accumulators: Vec<Vec<f64>>,
}

/// `acc = rho acc + (1 - rho) g^2; theta -= lr g / (sqrt(acc) + eps)`.
pub fn rmsprop_update(params: &mut [f64], grads: &[f64], acc: &mut [f64], lr: f64, decay: f64, eps: f64) {
    debug_assert!(params.len() == grads.len() && grads.len() == acc.len());
    for ((p, g), a) in params.iter_mut().zip(grads).zip(acc.iter_mut()) {
        *a = decay * *a + (1.0 - decay) * g * g;
        *p -= lr * g / (a.sqrt() + eps);
    }
}

impl RmsPropState {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        RmsPropState {
            learning_rate,
            decay: DEFAULT_DECAY,
            epsilon: DEFAULT_EPSILON,
            accumulators: net
                .layers
                .iter()
                .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
                .collect(),
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        let (lr, decay, eps) = (self.learning_rate, self.decay, self.epsilon);
        let mut accs = self.accumulators.iter_mut();
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(&grads.layers) {
            let aw = accs.next().expect("accumulator shape");
            rmsprop_update(&mut layer.weights, gw, aw, lr, decay, eps);
            let ab = accs.next().expect("accumulator shape");
            rmsprop_update(&mut layer.bias, gb, ab, lr, decay, eps);
        }
    }
}
