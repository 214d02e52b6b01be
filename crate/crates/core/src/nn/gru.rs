//! Gated recurrent unit with full backpropagation through time.
//!
//! Convention (fixed for checkpoints as tag `gru-v1`):
//!
//! ```text
//! z_t = sigmoid(x_t W_z + h_{t-1} U_z + b_z)
//! r_t = sigmoid(x_t W_r + h_{t-1} U_r + b_r)
//! hc_t = tanh(x_t W_h + (r_t . h_{t-1}) U_h + b_h)
//! h_t = (1 - z_t) . h_{t-1} + z_t . hc_t
//! ```
//!
//! One bias vector per gate; the reset gate acts inside the candidate's
//! recurrent term.

use super::tensor::Tensor;
use super::{outer_acc, sigmoid, vecmat_acc, vecmat_t_acc};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GruLayer {
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
    pub returns_sequence: bool,
}

/// Per-step activations of one forward call.
#[derive(Debug, Clone)]
pub struct GruCache {
    xs: Vec<f64>,
    /// h_{t-1} for each step; index 0 holds h0.
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    hc: Vec<f64>,
    hs: Vec<f64>,
    steps: usize,
}

impl GruCache {
    /// Full hidden sequence `[S x h]`.
    pub fn sequence(&self) -> &[f64] {
        &self.hs
    }
}

#[derive(Debug, Clone)]
pub struct GruGrads {
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
}

impl GruGrads {
    pub fn zeros_like(layer: &GruLayer) -> Self {
        Self {
            w_z: Tensor::zeros(layer.w_z.shape()),
            w_r: Tensor::zeros(layer.w_r.shape()),
            w_h: Tensor::zeros(layer.w_h.shape()),
            u_z: Tensor::zeros(layer.u_z.shape()),
            u_r: Tensor::zeros(layer.u_r.shape()),
            u_h: Tensor::zeros(layer.u_h.shape()),
            b_z: Tensor::zeros(layer.b_z.shape()),
            b_r: Tensor::zeros(layer.b_r.shape()),
            b_h: Tensor::zeros(layer.b_h.shape()),
        }
    }

    pub fn zero(&mut self) {
        for t in [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ] {
            t.fill(0.0);
        }
    }
}

impl GruLayer {
    pub fn zeros(n_in: usize, hidden: usize, returns_sequence: bool) -> Self {
        Self {
            w_z: Tensor::zeros(&[n_in, hidden]),
            w_r: Tensor::zeros(&[n_in, hidden]),
            w_h: Tensor::zeros(&[n_in, hidden]),
            u_z: Tensor::zeros(&[hidden, hidden]),
            u_r: Tensor::zeros(&[hidden, hidden]),
            u_h: Tensor::zeros(&[hidden, hidden]),
            b_z: Tensor::zeros(&[hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
            returns_sequence,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.shape()[0]
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.shape()[1]
    }

    fn steps_of(&self, xs: &[f64]) -> Result<usize> {
        let n_in = self.input_dim();
        if xs.is_empty() || xs.len() % n_in != 0 {
            return Err(Error::shape(
                "gru forward",
                format!("non-empty multiple of {n_in} inputs"),
                format!("{}", xs.len()),
            ));
        }
        Ok(xs.len() / n_in)
    }

    /// Run the recurrence; returns `[S x h]` when `returns_sequence`, the
    /// final `[h]` otherwise.
    pub fn forward(&self, xs: &[f64], h0: &[f64]) -> Result<Vec<f64>> {
        let cache = self.forward_cached(xs.to_vec(), h0)?;
        Ok(if self.returns_sequence {
            cache.hs
        } else {
            let h = self.hidden_dim();
            cache.hs[(cache.steps - 1) * h..].to_vec()
        })
    }

    pub fn forward_cached(&self, xs: Vec<f64>, h0: &[f64]) -> Result<GruCache> {
        let steps = self.steps_of(&xs)?;
        let (n_in, h) = (self.input_dim(), self.hidden_dim());
        if h0.len() != h {
            return Err(Error::shape("gru h0", format!("{h}"), format!("{}", h0.len())));
        }
        let mut cache = GruCache {
            xs,
            h_prev: vec![0.0; steps * h],
            z: vec![0.0; steps * h],
            r: vec![0.0; steps * h],
            hc: vec![0.0; steps * h],
            hs: vec![0.0; steps * h],
            steps,
        };
        let mut state = h0.to_vec();
        let mut rh = vec![0.0; h];
        for t in 0..steps {
            let x = &cache.xs[t * n_in..(t + 1) * n_in];
            cache.h_prev[t * h..(t + 1) * h].copy_from_slice(&state);
            let z = &mut cache.z[t * h..(t + 1) * h];
            z.copy_from_slice(self.b_z.as_slice());
            vecmat_acc(z, x, self.w_z.as_slice(), n_in, h);
            vecmat_acc(z, &state, self.u_z.as_slice(), h, h);
            z.iter_mut().for_each(|v| *v = sigmoid(*v));

            let r = &mut cache.r[t * h..(t + 1) * h];
            r.copy_from_slice(self.b_r.as_slice());
            vecmat_acc(r, x, self.w_r.as_slice(), n_in, h);
            vecmat_acc(r, &state, self.u_r.as_slice(), h, h);
            r.iter_mut().for_each(|v| *v = sigmoid(*v));

            for k in 0..h {
                rh[k] = cache.r[t * h + k] * state[k];
            }
            let hc = &mut cache.hc[t * h..(t + 1) * h];
            hc.copy_from_slice(self.b_h.as_slice());
            vecmat_acc(hc, x, self.w_h.as_slice(), n_in, h);
            vecmat_acc(hc, &rh, self.u_h.as_slice(), h, h);
            hc.iter_mut().for_each(|v| *v = v.tanh());

            for k in 0..h {
                let z_k = cache.z[t * h + k];
                state[k] = (1.0 - z_k) * state[k] + z_k * cache.hc[t * h + k];
            }
            cache.hs[t * h..(t + 1) * h].copy_from_slice(&state);
        }
        Ok(cache)
    }

    /// Backpropagation through time. `d_out` is `[S x h]` when the layer
    /// returns sequences, `[h]` against the final state otherwise. Parameter
    /// gradients accumulate into `grads`; returns the input-sequence
    /// gradient `[S x n_in]`.
    pub fn backward(&self, cache: &GruCache, d_out: &[f64], grads: &mut GruGrads) -> Result<Vec<f64>> {
        let (n_in, h) = (self.input_dim(), self.hidden_dim());
        let steps = cache.steps;
        let expected = if self.returns_sequence { steps * h } else { h };
        if d_out.len() != expected {
            return Err(Error::shape(
                "gru backward",
                format!("{expected}"),
                format!("{}", d_out.len()),
            ));
        }
        let mut dxs = vec![0.0; steps * n_in];
        let mut dh = vec![0.0; h];
        let mut dz = vec![0.0; h];
        let mut da_z = vec![0.0; h];
        let mut da_r = vec![0.0; h];
        let mut da_h = vec![0.0; h];
        let mut drh = vec![0.0; h];
        let mut rh = vec![0.0; h];
        let mut dh_prev = vec![0.0; h];

        for t in (0..steps).rev() {
            if self.returns_sequence {
                for k in 0..h {
                    dh[k] += d_out[t * h + k];
                }
            } else if t == steps - 1 {
                dh.copy_from_slice(d_out);
            }
            let z = &cache.z[t * h..(t + 1) * h];
            let r = &cache.r[t * h..(t + 1) * h];
            let hc = &cache.hc[t * h..(t + 1) * h];
            let h_prev = &cache.h_prev[t * h..(t + 1) * h];
            let x = &cache.xs[t * n_in..(t + 1) * n_in];

            for k in 0..h {
                dz[k] = dh[k] * (hc[k] - h_prev[k]);
                let dhc = dh[k] * z[k];
                da_h[k] = dhc * (1.0 - hc[k] * hc[k]);
                dh_prev[k] = dh[k] * (1.0 - z[k]);
                rh[k] = r[k] * h_prev[k];
            }

            outer_acc(grads.w_h.as_mut_slice(), x, &da_h);
            outer_acc(grads.u_h.as_mut_slice(), &rh, &da_h);
            for k in 0..h {
                grads.b_h.as_mut_slice()[k] += da_h[k];
            }

            drh.iter_mut().for_each(|v| *v = 0.0);
            vecmat_t_acc(&mut drh, &da_h, self.u_h.as_slice(), h, h);
            for k in 0..h {
                let dr = drh[k] * h_prev[k];
                dh_prev[k] += drh[k] * r[k];
                da_r[k] = dr * r[k] * (1.0 - r[k]);
                da_z[k] = dz[k] * z[k] * (1.0 - z[k]);
            }

            outer_acc(grads.w_r.as_mut_slice(), x, &da_r);
            outer_acc(grads.u_r.as_mut_slice(), h_prev, &da_r);
            outer_acc(grads.w_z.as_mut_slice(), x, &da_z);
            outer_acc(grads.u_z.as_mut_slice(), h_prev, &da_z);
            for k in 0..h {
                grads.b_r.as_mut_slice()[k] += da_r[k];
                grads.b_z.as_mut_slice()[k] += da_z[k];
            }

            vecmat_t_acc(&mut dh_prev, &da_r, self.u_r.as_slice(), h, h);
            vecmat_t_acc(&mut dh_prev, &da_z, self.u_z.as_slice(), h, h);

            let dx = &mut dxs[t * n_in..(t + 1) * n_in];
            vecmat_t_acc(dx, &da_z, self.w_z.as_slice(), n_in, h);
            vecmat_t_acc(dx, &da_r, self.w_r.as_slice(), n_in, h);
            vecmat_t_acc(dx, &da_h, self.w_h.as_slice(), n_in, h);

            dh.copy_from_slice(&dh_prev);
        }
        Ok(dxs)
    }

    pub fn param_tensors(&self) -> [(&'static str, &Tensor); 9] {
        [
            ("w_z", &self.w_z),
            ("w_r", &self.w_r),
            ("w_h", &self.w_h),
            ("u_z", &self.u_z),
            ("u_r", &self.u_r),
            ("u_h", &self.u_h),
            ("b_z", &self.b_z),
            ("b_r", &self.b_r),
            ("b_h", &self.b_h),
        ]
    }

    pub fn param_tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 9] {
        [
            ("w_z", &mut self.w_z),
            ("w_r", &mut self.w_r),
            ("w_h", &mut self.w_h),
            ("u_z", &mut self.u_z),
            ("u_r", &mut self.u_r),
            ("u_h", &mut self.u_h),
            ("b_z", &mut self.b_z),
            ("b_r", &mut self.b_r),
            ("b_h", &mut self.b_h),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn zero_parameters_keep_zero_state() {
        let layer = GruLayer::zeros(2, 3, true);
        let xs = vec![0.4, -0.3, 1.0, 0.5, 0.2, 0.1];
        let hs = layer.forward(&xs, &[0.0; 3]).unwrap();
        // z = r = 0.5, hc = 0, h stays 0 from h0 = 0
        assert!(hs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_update_gate_tracks_candidate() {
        // scalar case: z ~ 1 forces h ~ tanh(x w_h + b_h)
        let mut layer = GruLayer::zeros(1, 1, true);
        layer.b_z.as_mut_slice()[0] = 50.0;
        layer.w_h.as_mut_slice()[0] = 0.8;
        layer.b_h.as_mut_slice()[0] = -0.1;
        let x = 0.73;
        let hs = layer.forward(&[x], &[0.0]).unwrap();
        let expected = (x * 0.8 - 0.1).tanh();
        assert!((hs[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn constant_input_approaches_fixed_point() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let layer = super::super::init::gru_glorot(&mut rng, 2, 4, true, 0.1);
        let steps = 30;
        let xs: Vec<f64> = (0..steps).flat_map(|_| [0.3, -0.2]).collect();
        let hs = layer.forward(&xs, &[0.0; 4]).unwrap();
        let diff = |t: usize| -> f64 {
            (0..4)
                .map(|k| (hs[t * 4 + k] - hs[(t - 1) * 4 + k]).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        // after burn-in the step-to-step change shrinks monotonically-ish
        let early = diff(5);
        let late = diff(steps - 1);
        assert!(late < early, "no contraction: {early} -> {late}");
        assert!(late < 1e-3);
    }

    #[test]
    fn final_state_mode_matches_sequence_tail() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut layer = super::super::init::gru_glorot(&mut rng, 2, 3, true, 1.0);
        let xs = vec![0.1, 0.2, -0.4, 0.5, 0.9, -0.8];
        let seq = layer.forward(&xs, &[0.0; 3]).unwrap();
        layer.returns_sequence = false;
        let last = layer.forward(&xs, &[0.0; 3]).unwrap();
        assert_eq!(&seq[6..9], &last[..]);
    }

    #[test]
    fn shape_errors() {
        let layer = GruLayer::zeros(2, 3, true);
        assert!(layer.forward(&[1.0; 5], &[0.0; 3]).is_err());
        assert!(layer.forward(&[1.0; 4], &[0.0; 2]).is_err());
    }

    proptest! {
        // Convex gate mixing with a tanh candidate keeps every coordinate in
        // (-1, 1) whenever h0 does.
        #[test]
        fn hidden_state_stays_bounded(seed in 0u64..1000, x0 in -5.0f64..5.0, h0 in -0.99f64..0.99) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let layer = super::super::init::gru_glorot(&mut rng, 1, 3, true, 2.0);
            let xs: Vec<f64> = (0..12).map(|i| x0 * (i as f64 * 0.7).cos()).collect();
            let hs = layer.forward(&xs, &[h0; 3]).unwrap();
            for &v in &hs {
                prop_assert!(v > -1.0 && v < 1.0);
            }
        }
    }
}
