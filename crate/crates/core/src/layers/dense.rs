use rand::Rng;

use crate::error::{Error, Result};

pub fn relu_forward(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Gradient of ReLU given its input; the subgradient at 0 is taken as 0.
pub fn relu_backward(input: &[f64], upstream: &[f64]) -> Vec<f64> {
    input
        .iter()
        .zip(upstream)
        .map(|(&x, &u)| if x > 0.0 { u } else { 0.0 })
        .collect()
}

/// Affine map `y = W x + b`, `W` stored row-major (`out × in`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut d = Self::zeros(dim, dim);
        for i in 0..dim {
            d.weights[i * dim + i] = 1.0;
        }
        d
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init_glorot(&mut self, rng: &mut impl Rng) {
        let limit = (6.0 / (self.in_dim + self.out_dim) as f64).sqrt();
        for w in &mut self.weights {
            *w = rng.gen_range(-limit..=limit);
        }
        self.bias.fill(0.0);
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim {
            return Err(Error::domain(format!(
                "dense layer expects {} inputs, got {}",
                self.in_dim,
                x.len()
            )));
        }
        Ok((0..self.out_dim)
            .map(|o| {
                let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                row.iter().zip(x).fold(self.bias[o], |acc, (w, v)| acc + w * v)
            })
            .collect())
    }

    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<DenseGradients> {
        if x.len() != self.in_dim || upstream.len() != self.out_dim {
            return Err(Error::domain("dense backward shape mismatch"));
        }
        let mut weights = vec![0.0; self.weights.len()];
        let mut input = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let u = upstream[o];
            for i in 0..self.in_dim {
                weights[o * self.in_dim + i] = u * x[i];
                input[i] += u * self.weights[o * self.in_dim + i];
            }
        }
        Ok(DenseGradients {
            weights,
            bias: upstream.to_vec(),
            input,
        })
    }
}

/// Categorical cross-entropy after softmax, stabilised by log-sum-exp.
/// Returns the loss and its gradient with respect to the logits.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(Error::domain(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    let log_z = max + sum.ln();
    let loss = log_z - logits[label];
    let grad = logits
        .iter()
        .enumerate()
        .map(|(c, &z)| (z - log_z).exp() - if c == label { 1.0 } else { 0.0 })
        .collect();
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(relu_forward(&[-1.0, 2.0]), vec![0.0, 2.0]);
        assert_eq!(relu_backward(&[-1.0, 2.0], &[5.0, 5.0]), vec![0.0, 5.0]);
    }

    #[test]
    fn uniform_logits_cost_ln2() {
        let (loss, grad) = softmax_cross_entropy(&[0.0, 0.0], 0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(grad, vec![-0.5, 0.5]);
    }

    #[test]
    fn huge_logits_stay_finite() {
        let (loss, grad) = softmax_cross_entropy(&[1000.0, -1000.0], 1).unwrap();
        assert!(loss.is_finite() && (loss - 2000.0).abs() < 1e-9);
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn identity_dense_is_identity() {
        let d = Dense::identity(3);
        assert_eq!(d.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
        assert!(d.forward(&[1.0]).is_err());
    }

    #[test]
    fn label_out_of_range() {
        assert!(softmax_cross_entropy(&[0.0, 1.0], 2).is_err());
    }
}
