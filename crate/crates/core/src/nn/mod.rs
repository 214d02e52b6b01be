//! Minimal dense-tensor neural-network kernel: fully-connected and GRU
//! layers with analytic backpropagation (including backpropagation through
//! time), Adam, and finite-difference gradient verification.
//!
//! All arithmetic is f64. Layers are immutable during forward/backward;
//! activations needed by the backward pass travel in explicit cache values,
//! so concurrent forward evaluations of a shared layer are safe and a
//! backward call without a matching forward cannot be expressed.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod gru;
pub mod init;
pub mod tensor;

pub use adam::AdamState;
pub use dense::{Activation, DenseCache, DenseGrads, DenseLayer};
pub use gradcheck::{gradcheck, GradCheckable};
pub use gru::{GruCache, GruGrads, GruLayer};
pub use tensor::Tensor;

/// y[j] += sum_i x[i] * w[i, j]
#[inline]
pub(crate) fn vecmat_acc(y: &mut [f64], x: &[f64], w: &[f64], n_in: usize, n_out: usize) {
    debug_assert_eq!(x.len(), n_in);
    debug_assert_eq!(y.len(), n_out);
    debug_assert_eq!(w.len(), n_in * n_out);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &w[i * n_out..(i + 1) * n_out];
        for (yj, wj) in y.iter_mut().zip(row.iter()) {
            *yj += xi * wj;
        }
    }
}

/// y[i] += sum_j g[j] * w[i, j]
#[inline]
pub(crate) fn vecmat_t_acc(y: &mut [f64], g: &[f64], w: &[f64], n_in: usize, n_out: usize) {
    debug_assert_eq!(g.len(), n_out);
    debug_assert_eq!(y.len(), n_in);
    for i in 0..n_in {
        let row = &w[i * n_out..(i + 1) * n_out];
        let mut acc = 0.0;
        for (gj, wj) in g.iter().zip(row.iter()) {
            acc += gj * wj;
        }
        y[i] += acc;
    }
}

/// dw[i, j] += x[i] * g[j]
#[inline]
pub(crate) fn outer_acc(dw: &mut [f64], x: &[f64], g: &[f64]) {
    let n_out = g.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &mut dw[i * n_out..(i + 1) * n_out];
        for (dj, gj) in row.iter_mut().zip(g.iter()) {
            *dj += xi * gj;
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
