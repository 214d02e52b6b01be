//! Smooth load histories through randomly sampled control points.
//!
//! A load curve is pinned at six uniformly spaced control times; the first
//! value is always zero. Between control points the curve is the cubic
//! radial-basis interpolant `s(t) = sum_i w_i |t - t_i|^3 + a + b t` with the
//! side constraints `sum w_i = 0` and `sum w_i t_i = 0`, which make constants
//! and linears reproduce exactly.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const N_CONTROL: usize = 6;

/// Control values of one load history at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoints {
    pub times: [f64; N_CONTROL],
    pub values: [f64; N_CONTROL],
}

impl ControlPoints {
    /// Control points at `0, T/5, ..., T` with the given values.
    pub fn uniform(t_total: f64, values: [f64; N_CONTROL]) -> Result<Self> {
        if !(t_total > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_total must be positive, got {t_total}"
            )));
        }
        let mut times = [0.0; N_CONTROL];
        for (i, t) in times.iter_mut().enumerate() {
            *t = t_total * i as f64 / (N_CONTROL - 1) as f64;
        }
        Ok(Self { times, values })
    }
}

/// Fitted cubic interpolant with linear polynomial tail.
#[derive(Debug, Clone)]
pub struct RbiInterpolant {
    pub centers: [f64; N_CONTROL],
    pub rbf_weights: [f64; N_CONTROL],
    /// `[a, b]` of the tail `a + b t`.
    pub poly_coeffs: [f64; 2],
}

/// One sampled load history: the curve evaluated at `S` uniform output times
/// `k * t_total / S`, `k = 1..=S`, plus its generating control points.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub samples: Vec<f64>,
    pub control: ControlPoints,
}

impl LoadProfile {
    pub fn t_total(&self) -> f64 {
        self.control.times[N_CONTROL - 1]
    }
}

/// Output sample times `k * t_total / s`, `k = 1..=s` (the all-zero initial
/// state is not stored).
pub fn sample_times(t_total: f64, s: usize) -> Vec<f64> {
    (1..=s).map(|k| t_total * k as f64 / s as f64).collect()
}

/// Fit the augmented cubic-RBF system through the control points.
///
/// Solves the symmetric 8x8 system
/// `[A P; P^T 0] [w; c] = [v; 0]` with `A_ij = |t_i - t_j|^3` and
/// `P = [1, t_i]`.
pub fn fit_rbi(cp: &ControlPoints) -> Result<RbiInterpolant> {
    let n = N_CONTROL;
    for i in 1..n {
        if cp.times[i] <= cp.times[i - 1] {
            return Err(Error::SingularSystem(format!(
                "control times not strictly increasing at index {i}"
            )));
        }
    }

    let dim = n + 2;
    let mut a = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for i in 0..n {
        for j in 0..n {
            a[i * dim + j] = (cp.times[i] - cp.times[j]).abs().powi(3);
        }
        a[i * dim + n] = 1.0;
        a[i * dim + n + 1] = cp.times[i];
        a[n * dim + i] = 1.0;
        a[(n + 1) * dim + i] = cp.times[i];
        rhs[i] = cp.values[i];
    }

    let sol = solve_dense(&mut a, &mut rhs, dim)?;
    let mut rbf_weights = [0.0; N_CONTROL];
    rbf_weights.copy_from_slice(&sol[..n]);
    Ok(RbiInterpolant {
        centers: cp.times,
        rbf_weights,
        poly_coeffs: [sol[n], sol[n + 1]],
    })
}

impl RbiInterpolant {
    /// Evaluate at a single point inside the control-time range.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let lo = self.centers[0];
        let hi = self.centers[N_CONTROL - 1];
        // Tolerate roundoff at the interval ends, reject genuine extrapolation.
        let slack = 1e-12 * (hi - lo).max(1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let mut s = self.poly_coeffs[0] + self.poly_coeffs[1] * t;
        for (w, c) in self.rbf_weights.iter().zip(self.centers.iter()) {
            s += w * (t - c).abs().powi(3);
        }
        Ok(s)
    }

    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Draw `n_cases` load histories with `values[0] = 0` and the remaining five
/// control values i.i.d. uniform in `[lo, hi]`, each evaluated at `s` uniform
/// output times. Deterministic for a fixed seed.
pub fn sample_profiles(
    seed: u64,
    n_cases: usize,
    bounds: [f64; 2],
    s: usize,
    t_total: f64,
) -> Result<Vec<LoadProfile>> {
    let [lo, hi] = bounds;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n_cases == 0 {
        return Err(Error::InvalidArgument("n_cases must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts = sample_times(t_total, s);
    let mut profiles = Vec::with_capacity(n_cases);
    for _ in 0..n_cases {
        let mut values = [0.0; N_CONTROL];
        for v in values.iter_mut().skip(1) {
            *v = rng.random_range(lo..=hi);
        }
        let cp = ControlPoints::uniform(t_total, values)?;
        let interp = fit_rbi(&cp)?;
        profiles.push(LoadProfile {
            samples: interp.eval_many(&ts)?,
            control: cp,
        });
    }
    Ok(profiles)
}

/// Gaussian elimination with partial pivoting on a row-major `dim x dim`
/// matrix. Destroys `a` and `rhs`.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], dim: usize) -> Result<Vec<f64>> {
    for col in 0..dim {
        let mut pivot = col;
        let mut best = a[col * dim + col].abs();
        for row in col + 1..dim {
            let v = a[row * dim + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best < 1e-14 {
            return Err(Error::SingularSystem(format!(
                "pivot {best:.3e} at column {col}"
            )));
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot * dim + k);
            }
            rhs.swap(col, pivot);
        }
        let inv = 1.0 / a[col * dim + col];
        for row in col + 1..dim {
            let factor = a[row * dim + col] * inv;
            if factor == 0.0 {
                continue;
            }
            a[row * dim + col] = 0.0;
            for k in col + 1..dim {
                a[row * dim + k] -= factor * a[col * dim + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = rhs[row];
        for k in row + 1..dim {
            acc -= a[row * dim + k] * x[k];
        }
        x[row] = acc / a[row * dim + row];
    }
    Ok(x)
}
