use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of hidden layers in the Q-network.
pub const DEFAULT_HIDDEN_LAYERS: usize = 6;
pub const DEFAULT_HIDDEN_WIDTH: usize = 128;

/// Affine layer `y = W x + b` with `W` stored row-major as `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().copied());
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.inputs)) {
            *o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Rectified hidden layers followed by an identity output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Intermediates of one forward pass, needed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    /// Output of every layer after its activation; the last entry is the network output.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Parameter gradients laid out like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().chain(b.iter_mut()).for_each(|g| *g *= factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|(w, b)| w.iter().chain(b).all(|g| *g == 0.0))
    }
}

fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_width: usize,
        hidden_layers: usize,
        output_dim: usize,
        rng: &mut R,
    ) -> Self {
        assert!(input_dim >= 1 && hidden_width >= 1 && output_dim >= 1, "dimensions must be >= 1");
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(hidden_width, hidden_layers));
        dims.push(output_dim);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = glorot_bound(inputs, outputs);
                Dense {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs)
                        .map(|_| rng.random_range(-bound..bound))
                        .collect(),
                    bias: vec![0.0; outputs],
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&current, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = activations.last().map(Vec::as_slice).unwrap_or(x);
            let mut out = Vec::with_capacity(layer.outputs);
            layer.apply(input, &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(out);
        }
        Ok(ForwardCache {
            input: x.to_vec(),
            activations,
        })
    }

    /// Reverse-mode gradients of `upstream . output` with respect to every
    /// parameter, added into `grads`. The rectifier's derivative at 0 is 0.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        x: &[f64],
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        if cache.input.as_slice() != x {
            return Err(Error::StaleCache);
        }
        if upstream.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: upstream.len(),
            });
        }
        let mut delta = upstream.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = if i == 0 { x } else { &cache.activations[i - 1] };
            let (gw, gb) = &mut grads.layers[i];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                gb[o] += d;
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.inputs];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            for (p, a) in prev.iter_mut().zip(&cache.activations[i - 1]) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        Ok(())
    }

    pub fn backward(&self, cache: &ForwardCache, x: &[f64], upstream: &[f64]) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(cache, x, upstream, &mut grads)?;
        Ok(grads)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// The Q-network layout: six rectified hidden layers of equal width.
pub fn init_mlp<R: Rng + ?Sized>(input_dim: usize, hidden_width: usize, output_dim: usize, rng: &mut R) -> Mlp {
    Mlp::new(input_dim, hidden_width, DEFAULT_HIDDEN_LAYERS, output_dim, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn hand_net() -> Mlp {
        Mlp {
            layers: vec![
                Dense {
                    inputs: 1,
                    outputs: 1,
                    weights: vec![2.0],
                    bias: vec![-1.0],
                },
                Dense {
                    inputs: 1,
                    outputs: 1,
                    weights: vec![3.0],
                    bias: vec![0.0],
                },
            ],
        }
    }

    #[test]
    fn shapes_chain() {
        let net = init_mlp(40, 128, 108, &mut stream(1, Purpose::Init, 0));
        assert_eq!(net.layers.len(), 7);
        assert_eq!(net.dims(), vec![40, 128, 128, 128, 128, 128, 128, 108]);
        for l in &net.layers {
            assert_eq!(l.weights.len(), l.inputs * l.outputs);
            assert!(l.bias.iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = init_mlp(5, 8, 3, &mut stream(9, Purpose::Init, 0));
        let b = init_mlp(5, 8, 3, &mut stream(9, Purpose::Init, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn hand_forward_and_backward() {
        let net = hand_net();
        assert_eq!(net.forward(&[1.0]).unwrap(), vec![3.0]);
        let cache = net.forward_cached(&[1.0]).unwrap();
        let g = net.backward(&cache, &[1.0], &[1.0]).unwrap();
        // d out / d w_hidden = w_out * x
        assert_eq!(g.layers[0].0, vec![3.0]);
        assert_eq!(g.layers[0].1, vec![3.0]);
        assert_eq!(g.layers[1].0, vec![1.0]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = init_mlp(4, 6, 3, &mut stream(2, Purpose::Init, 0));
        for l in &mut net.layers {
            l.weights.fill(0.0);
        }
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let net = init_mlp(4, 6, 3, &mut stream(2, Purpose::Init, 0));
        let x = [0.3, -0.2, 1.0, 2.0];
        let cache = net.forward_cached(&x).unwrap();
        assert!(net.backward(&cache, &x, &[0.0; 3]).unwrap().is_zero());
    }

    #[test]
    fn stale_cache_and_bad_dims() {
        let net = init_mlp(2, 4, 2, &mut stream(2, Purpose::Init, 0));
        let cache = net.forward_cached(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            net.backward(&cache, &[1.0, 2.5], &[1.0, 0.0]),
            Err(Error::StaleCache)
        ));
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn initial_weight_mean_is_centred() {
        // 10^5 draws of U(-a, a): sd of the mean is a / sqrt(3 n)
        let net = Mlp::new(300, 300, 1, 34, &mut stream(5, Purpose::Init, 0));
        let w = &net.layers[0].weights;
        assert!(w.len() >= 90_000);
        let bound = glorot_bound(300, 300);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd_mean = bound / (3.0 * w.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sd_mean, "mean {mean} vs 3 sd {}", 3.0 * sd_mean);
        assert!(w.iter().all(|v| v.abs() <= bound));
    }
}
