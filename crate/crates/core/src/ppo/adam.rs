//! Adaptive-moment gradient descent.

use super::net::{DenseNetwork, Gradients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam optimizer state mirroring one network's parameters.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    step: u64,
    first: Vec<(Vec<f64>, Vec<f64>)>,
    second: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Adam {
    pub fn new(net: &DenseNetwork) -> Self {
        let zeros = |net: &DenseNetwork| {
            net.layers()
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect()
        };
        Adam {
            config: AdamConfig::default(),
            step: 0,
            first: zeros(net),
            second: zeros(net),
        }
    }

    /// One bias-corrected update of every parameter.
    pub fn apply(&mut self, net: &mut DenseNetwork, grads: &Gradients, learning_rate: f64) {
        self.step += 1;
        let c1 = 1.0 - self.config.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.config.beta2.powi(self.step as i32);
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = self.config;

        for (l, layer) in net.layers_mut().iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[l];
            let (mw, mb) = &mut self.first[l];
            let (vw, vb) = &mut self.second[l];
            let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..theta.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    theta[i] -= learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + epsilon);
                }
            };
            update(&mut layer.weights, gw, mw, vw);
            update(&mut layer.biases, gb, mb, vb);
        }
    }
}
