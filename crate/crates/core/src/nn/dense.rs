use super::tensor::Tensor;
use super::{outer_acc, vecmat_acc, vecmat_t_acc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Fully-connected layer `y = act(x W + b)`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
    pub activation: Activation,
}

/// Activations retained for the backward pass of one forward call.
#[derive(Debug, Clone)]
pub struct DenseCache {
    x: Vec<f64>,
    y: Vec<f64>,
    batch: usize,
}

impl DenseCache {
    pub fn output(&self) -> &[f64] {
        &self.y
    }
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseGrads {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            w: Tensor::zeros(layer.w.shape()),
            b: Tensor::zeros(layer.b.shape()),
        }
    }

    pub fn zero(&mut self) {
        self.w.fill(0.0);
        self.b.fill(0.0);
    }
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        Self {
            w: Tensor::zeros(&[n_in, n_out]),
            b: Tensor::zeros(&[n_out]),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.w.shape()[1]
    }

    fn batch_of(&self, x: &[f64]) -> Result<usize> {
        let n_in = self.in_dim();
        if n_in == 0 || x.len() % n_in != 0 || x.is_empty() {
            return Err(Error::shape(
                "dense forward",
                format!("multiple of {n_in} inputs"),
                format!("{}", x.len()),
            ));
        }
        Ok(x.len() / n_in)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = self.batch_of(x)?;
        let (n_in, n_out) = (self.in_dim(), self.out_dim());
        let mut y = vec![0.0; batch * n_out];
        for b in 0..batch {
            let row = &mut y[b * n_out..(b + 1) * n_out];
            row.copy_from_slice(self.b.as_slice());
            vecmat_acc(row, &x[b * n_in..(b + 1) * n_in], self.w.as_slice(), n_in, n_out);
            for v in row.iter_mut() {
                *v = self.activation.apply(*v);
            }
        }
        Ok(y)
    }

    pub fn forward_cached(&self, x: Vec<f64>) -> Result<DenseCache> {
        let batch = self.batch_of(&x)?;
        let y = self.forward(&x)?;
        Ok(DenseCache { x, y, batch })
    }

    /// Accumulate parameter gradients and return the input gradient.
    pub fn backward(
        &self,
        cache: &DenseCache,
        dy: &[f64],
        grads: &mut DenseGrads,
    ) -> Result<Vec<f64>> {
        let (n_in, n_out) = (self.in_dim(), self.out_dim());
        if dy.len() != cache.y.len() {
            return Err(Error::shape(
                "dense backward",
                format!("{}", cache.y.len()),
                format!("{}", dy.len()),
            ));
        }
        let mut dx = vec![0.0; cache.batch * n_in];
        let mut dz = vec![0.0; n_out];
        let gb = grads.b.as_mut_slice();
        for b in 0..cache.batch {
            for (j, d) in dz.iter_mut().enumerate() {
                let y = cache.y[b * n_out + j];
                *d = dy[b * n_out + j] * self.activation.grad_from_output(y);
                gb[j] += *d;
            }
            outer_acc(
                grads.w.as_mut_slice(),
                &cache.x[b * n_in..(b + 1) * n_in],
                &dz,
            );
            vecmat_t_acc(
                &mut dx[b * n_in..(b + 1) * n_in],
                &dz,
                self.w.as_slice(),
                n_in,
                n_out,
            );
        }
        Ok(dx)
    }
}
