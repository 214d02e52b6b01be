//! Central finite-difference verification of analytic gradients.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A model bound to a fixed sample batch whose parameters can be read and
/// written through a flat index.
pub trait GradCheckable {
    fn param_count(&self) -> usize;
    fn get_param(&self, idx: usize) -> f64;
    fn set_param(&mut self, idx: usize, value: f64);
    /// Scalar loss on the bound batch.
    fn loss(&mut self) -> f64;
    /// Loss plus analytic gradients (flat, same indexing as `get_param`).
    fn loss_and_grad(&mut self) -> (f64, Vec<f64>);
}

/// Compare analytic gradients against central differences over a random
/// subset of `n_coords` parameter coordinates; returns the maximum relative
/// error. The denominator is floored at 1e-4 so coordinates with negligible
/// gradient do not amplify finite-difference noise.
pub fn gradcheck(
    model: &mut impl GradCheckable,
    eps: f64,
    n_coords: usize,
    seed: u64,
) -> f64 {
    let (_, analytic) = model.loss_and_grad();
    let count = model.param_count();
    let mut indices: Vec<usize> = (0..count).collect();
    if count > n_coords {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        indices.truncate(n_coords);
    }
    let mut max_rel = 0.0f64;
    for idx in indices {
        let original = model.get_param(idx);
        model.set_param(idx, original + eps);
        let plus = model.loss();
        model.set_param(idx, original - eps);
        let minus = model.loss();
        model.set_param(idx, original);
        let fd = (plus - minus) / (2.0 * eps);
        let a = analytic[idx];
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-4);
        max_rel = max_rel.max(rel);
    }
    max_rel
}
