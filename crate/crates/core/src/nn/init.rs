//! Parameter initialization: Glorot-uniform dense kernels, orthogonal
//! recurrent kernels, zero biases.

use rand::Rng;

use super::dense::{Activation, DenseLayer};
use super::gru::GruLayer;
use super::tensor::Tensor;

pub fn glorot_uniform(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-limit..=limit))
        .collect();
    Tensor::from_vec(&[fan_in, fan_out], data).expect("shape matches data")
}

/// Square orthogonal matrix via modified Gram-Schmidt on a random matrix.
pub fn orthogonal(rng: &mut impl Rng, dim: usize) -> Tensor {
    loop {
        let mut cols = vec![vec![0.0f64; dim]; dim];
        for col in cols.iter_mut() {
            for v in col.iter_mut() {
                *v = rng.random_range(-1.0..=1.0);
            }
        }
        let mut ok = true;
        for j in 0..dim {
            for i in 0..j {
                let dot: f64 = (0..dim).map(|k| cols[j][k] * cols[i][k]).sum();
                for k in 0..dim {
                    cols[j][k] -= dot * cols[i][k];
                }
            }
            let norm: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for v in cols[j].iter_mut() {
                *v /= norm;
            }
        }
        if !ok {
            continue; // near-dependent draw, retry
        }
        let mut data = vec![0.0; dim * dim];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * dim + j] = *v;
            }
        }
        return Tensor::from_vec(&[dim, dim], data).expect("square shape");
    }
}

pub fn dense_glorot(
    rng: &mut impl Rng,
    n_in: usize,
    n_out: usize,
    activation: Activation,
) -> DenseLayer {
    DenseLayer {
        w: glorot_uniform(rng, n_in, n_out),
        b: Tensor::zeros(&[n_out]),
        activation,
    }
}

/// GRU with Glorot input kernels and orthogonal recurrent kernels, all
/// scaled by `gain`.
pub fn gru_glorot(
    rng: &mut impl Rng,
    n_in: usize,
    hidden: usize,
    returns_sequence: bool,
    gain: f64,
) -> GruLayer {
    let scaled = |t: Tensor| {
        let mut t = t;
        for v in t.as_mut_slice() {
            *v *= gain;
        }
        t
    };
    GruLayer {
        w_z: scaled(glorot_uniform(rng, n_in, hidden)),
        w_r: scaled(glorot_uniform(rng, n_in, hidden)),
        w_h: scaled(glorot_uniform(rng, n_in, hidden)),
        u_z: scaled(orthogonal(rng, hidden)),
        u_r: scaled(orthogonal(rng, hidden)),
        u_h: scaled(orthogonal(rng, hidden)),
        b_z: Tensor::zeros(&[hidden]),
        b_r: Tensor::zeros(&[hidden]),
        b_h: Tensor::zeros(&[hidden]),
        returns_sequence,
    }
}
