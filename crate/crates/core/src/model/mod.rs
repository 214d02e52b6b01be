//! Vector sequential deep operator network.
//!
//! A GRU branch encodes the load history into step-wise latent weights
//! `B: [HD x S]`; an FNN trunk encodes query coordinates into per-node basis
//! values `T: [N x HD x C]`; the two combine through the tensor contraction
//!
//! ```text
//! G[n, s, c] = sum_h B[h, s] * T[n, h, c] + beta
//! ```
//!
//! with a single scalar bias `beta`. The trunk's final layer emits `HD * C`
//! values per node, reshaped component-major: output slot `h * C + c` maps
//! to `(h, c)`.

pub mod scaler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dense::{Activation, DenseCache, DenseGrads, DenseLayer};
use crate::nn::gru::{GruCache, GruGrads, GruLayer};
use crate::nn::init::{dense_glorot, gru_glorot};
use crate::nn::tensor::Tensor;

pub use scaler::{CoordNorm, Scaler, ScalerKind};

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Latent dimension shared by branch and trunk.
    pub hd: usize,
    /// Output time steps.
    pub s: usize,
    /// Output vector components.
    pub c: usize,
    /// Hidden sizes of the four branch GRU layers (encoder, encoder,
    /// decoder, decoder).
    pub branch_hidden: Vec<usize>,
    /// Full trunk layer widths, `[2, ..., hd * c]`.
    pub trunk_widths: Vec<usize>,
}

impl ModelConfig {
    /// Default layout: HD 32, trunk `[2, 101 x5, HD*C]`, branch
    /// `[64, 32, 32, 64]`.
    pub fn new(s: usize, c: usize) -> Self {
        Self::with_hd(32, s, c)
    }

    pub fn with_hd(hd: usize, s: usize, c: usize) -> Self {
        Self {
            hd,
            s,
            c,
            branch_hidden: vec![64, 32, 32, 64],
            trunk_widths: vec![2, 101, 101, 101, 101, 101, hd * c],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hd == 0 || self.s == 0 || self.c == 0 {
            return Err(Error::InvalidArgument("hd, s, c must be >= 1".into()));
        }
        if self.branch_hidden.len() != 4 || self.branch_hidden.iter().any(|&h| h == 0) {
            return Err(Error::InvalidArgument(
                "branch_hidden must list four positive GRU widths".into(),
            ));
        }
        if self.trunk_widths.len() < 2 {
            return Err(Error::InvalidArgument("trunk needs at least two widths".into()));
        }
        if self.trunk_widths[0] != 2 {
            return Err(Error::InvalidArgument("trunk input width must be 2".into()));
        }
        if *self.trunk_widths.last().unwrap() != self.hd * self.c {
            return Err(Error::InvalidArgument(format!(
                "trunk output width must be hd * c = {}",
                self.hd * self.c
            )));
        }
        Ok(())
    }
}

/// Trainable parameter count of a dense stack with the given widths.
pub fn count_dense_stack(widths: &[usize]) -> usize {
    widths
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

fn count_gru(n_in: usize, hidden: usize) -> usize {
    3 * (n_in * hidden + hidden * hidden + hidden)
}

/// Closed-form parameter count for a configuration (single bias per GRU
/// gate, one scalar combiner bias).
pub fn count_params(config: &ModelConfig) -> usize {
    let bh = &config.branch_hidden;
    let mut total = 0;
    let mut n_in = 1;
    for &h in bh {
        total += count_gru(n_in, h);
        n_in = h;
    }
    total += bh[3] * config.hd + config.hd; // time-distributed output layer
    total += count_dense_stack(&config.trunk_widths);
    total + 1 // beta
}

/// The model parameters: branch GRU stack, time-distributed output layer,
/// trunk FNN, and the scalar combiner bias.
#[derive(Debug, Clone)]
pub struct SDeepOnet {
    pub config: ModelConfig,
    pub branch_grus: Vec<GruLayer>,
    pub branch_out: DenseLayer,
    pub trunk: Vec<DenseLayer>,
    pub beta: Tensor,
}

/// Gradient buffers mirroring [`SDeepOnet`]'s parameters.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub branch_grus: Vec<GruGrads>,
    pub branch_out: DenseGrads,
    pub trunk: Vec<DenseGrads>,
    pub beta: Tensor,
}

impl ModelGrads {
    pub fn zeros_like(model: &SDeepOnet) -> Self {
        Self {
            branch_grus: model.branch_grus.iter().map(GruGrads::zeros_like).collect(),
            branch_out: DenseGrads::zeros_like(&model.branch_out),
            trunk: model.trunk.iter().map(DenseGrads::zeros_like).collect(),
            beta: Tensor::zeros(&[1]),
        }
    }

    pub fn zero(&mut self) {
        for g in &mut self.branch_grus {
            g.zero();
        }
        self.branch_out.zero();
        for g in &mut self.trunk {
            g.zero();
        }
        self.beta.fill(0.0);
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for g in &self.branch_grus {
            out.extend([&g.w_z, &g.w_r, &g.w_h, &g.u_z, &g.u_r, &g.u_h, &g.b_z, &g.b_r, &g.b_h]);
        }
        out.push(&self.branch_out.w);
        out.push(&self.branch_out.b);
        for g in &self.trunk {
            out.push(&g.w);
            out.push(&g.b);
        }
        out.push(&self.beta);
        out
    }
}

/// Branch activations retained for backward.
pub struct BranchCache {
    gru: Vec<GruCache>,
    out: DenseCache,
}

impl SDeepOnet {
    /// All-zero parameters (useful for contract tests).
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let bh = &config.branch_hidden;
        let mut branch_grus = Vec::with_capacity(4);
        let mut n_in = 1;
        for &h in bh {
            branch_grus.push(GruLayer::zeros(n_in, h, true));
            n_in = h;
        }
        let branch_out = DenseLayer::zeros(bh[3], config.hd, Activation::Linear);
        let trunk = trunk_layers_zeros(&config.trunk_widths);
        Ok(Self {
            config,
            branch_grus,
            branch_out,
            trunk,
            beta: Tensor::zeros(&[1]),
        })
    }

    /// Glorot/orthogonal initialization, deterministic in the seed.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bh = &config.branch_hidden;
        let mut branch_grus = Vec::with_capacity(4);
        let mut n_in = 1;
        for &h in bh {
            branch_grus.push(gru_glorot(&mut rng, n_in, h, true, 1.0));
            n_in = h;
        }
        let branch_out = dense_glorot(&mut rng, bh[3], config.hd, Activation::Linear);
        let widths = &config.trunk_widths;
        let mut trunk = Vec::with_capacity(widths.len() - 1);
        for (i, w) in widths.windows(2).enumerate() {
            let act = if i + 2 == widths.len() {
                Activation::Linear
            } else {
                Activation::Tanh
            };
            trunk.push(dense_glorot(&mut rng, w[0], w[1], act));
        }
        Ok(Self {
            config,
            branch_grus,
            branch_out,
            trunk,
            beta: Tensor::zeros(&[1]),
        })
    }

    pub fn beta_value(&self) -> f64 {
        self.beta.as_slice()[0]
    }

    /// Temporal encoding of one (already scaled) load sequence into
    /// `B: [HD x S]`.
    pub fn branch_forward(&self, load: &[f64]) -> Result<Tensor> {
        let (cache, b) = self.branch_forward_cached(load)?;
        drop(cache);
        Ok(b)
    }

    pub fn branch_forward_cached(&self, load: &[f64]) -> Result<(BranchCache, Tensor)> {
        let s = self.config.s;
        if load.len() != s {
            return Err(Error::shape("branch input", format!("{s}"), format!("{}", load.len())));
        }
        let mut gru_caches = Vec::with_capacity(self.branch_grus.len());
        let mut seq = load.to_vec();
        for gru in &self.branch_grus {
            let h0 = vec![0.0; gru.hidden_dim()];
            let cache = gru.forward_cached(seq, &h0)?;
            seq = cache.sequence().to_vec();
            gru_caches.push(cache);
        }
        let out = self.branch_out.forward_cached(seq)?;
        // transpose [S x HD] -> [HD x S]
        let hd = self.config.hd;
        let mut b = Tensor::zeros(&[hd, s]);
        {
            let bd = b.as_mut_slice();
            let y = out.output();
            for step in 0..s {
                for h in 0..hd {
                    bd[h * s + step] = y[step * hd + h];
                }
            }
        }
        Ok((BranchCache { gru: gru_caches, out }, b))
    }

    /// Accumulate branch gradients from `d_b: [HD x S]`.
    pub fn branch_backward(
        &self,
        cache: &BranchCache,
        d_b: &Tensor,
        grads: &mut ModelGrads,
    ) -> Result<()> {
        let (hd, s) = (self.config.hd, self.config.s);
        if d_b.shape() != [hd, s] {
            return Err(Error::shape(
                "branch backward",
                format!("[{hd}, {s}]"),
                format!("{:?}", d_b.shape()),
            ));
        }
        let mut d_out = vec![0.0; s * hd];
        let db = d_b.as_slice();
        for step in 0..s {
            for h in 0..hd {
                d_out[step * hd + h] = db[h * s + step];
            }
        }
        let mut d_seq = self
            .branch_out
            .backward(&cache.out, &d_out, &mut grads.branch_out)?;
        for (i, gru) in self.branch_grus.iter().enumerate().rev() {
            d_seq = gru.backward(&cache.gru[i], &d_seq, &mut grads.branch_grus[i])?;
        }
        Ok(())
    }

    /// Spatial encoding of unit-box coordinates into `T: [N x HD x C]`.
    pub fn trunk_forward(&self, coords: &[f64]) -> Result<Tensor> {
        let (_, t) = self.trunk_forward_cached(coords)?;
        Ok(t)
    }

    pub fn trunk_forward_cached(&self, coords: &[f64]) -> Result<(Vec<DenseCache>, Tensor)> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::shape(
                "trunk input",
                "non-empty [N x 2]",
                format!("{}", coords.len()),
            ));
        }
        let n = coords.len() / 2;
        let mut caches = Vec::with_capacity(self.trunk.len());
        let mut h = coords.to_vec();
        for layer in &self.trunk {
            let cache = layer.forward_cached(h)?;
            h = cache.output().to_vec();
            caches.push(cache);
        }
        // [N x (HD*C)] rows are already component-major (h * C + c), so the
        // buffer reinterprets directly as [N x HD x C].
        let t = Tensor::from_vec(&[n, self.config.hd, self.config.c], h)?;
        Ok((caches, t))
    }

    /// Accumulate trunk gradients from `d_t: [N x HD x C]`.
    pub fn trunk_backward(
        &self,
        caches: &[DenseCache],
        d_t: &Tensor,
        grads: &mut ModelGrads,
    ) -> Result<()> {
        let mut dy = d_t.as_slice().to_vec();
        for (i, layer) in self.trunk.iter().enumerate().rev() {
            dy = layer.backward(&caches[i], &dy, &mut grads.trunk[i])?;
        }
        Ok(())
    }

    /// Full operator evaluation in scaled space: `[N x S x C]`.
    pub fn forward(&self, load: &[f64], coords: &[f64]) -> Result<Tensor> {
        let b = self.branch_forward(load)?;
        let t = self.trunk_forward(coords)?;
        combine(&b, &t, self.beta_value())
    }

    /// Basis/weight view of the operator: per component, `HD` spatial basis
    /// fields from the trunk; per step, `HD` weights from the branch.
    pub fn extract_basis(&self, load: &[f64], coords: &[f64]) -> Result<BasisDecomposition> {
        Ok(BasisDecomposition {
            weights: self.branch_forward(load)?,
            basis: self.trunk_forward(coords)?,
            beta: self.beta_value(),
        })
    }

    /// Named parameter tensors in checkpoint order.
    pub fn named_params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, gru) in self.branch_grus.iter().enumerate() {
            for (name, t) in gru.param_tensors() {
                out.push((format!("branch.gru{i}.{name}"), t));
            }
        }
        out.push(("branch.out.w".to_string(), &self.branch_out.w));
        out.push(("branch.out.b".to_string(), &self.branch_out.b));
        for (j, layer) in self.trunk.iter().enumerate() {
            out.push((format!("trunk.{j}.w"), &layer.w));
            out.push((format!("trunk.{j}.b"), &layer.b));
        }
        out.push(("beta".to_string(), &self.beta));
        out
    }

    pub fn named_params_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out: Vec<(String, &mut Tensor)> = Vec::new();
        for (i, gru) in self.branch_grus.iter_mut().enumerate() {
            for (name, t) in gru.param_tensors_mut() {
                out.push((format!("branch.gru{i}.{name}"), t));
            }
        }
        out.push(("branch.out.w".to_string(), &mut self.branch_out.w));
        out.push(("branch.out.b".to_string(), &mut self.branch_out.b));
        for (j, layer) in self.trunk.iter_mut().enumerate() {
            out.push((format!("trunk.{j}.w"), &mut layer.w));
            out.push((format!("trunk.{j}.b"), &mut layer.b));
        }
        out.push(("beta".to_string(), &mut self.beta));
        out
    }

    /// Actual parameter element count; equals [`count_params`].
    pub fn num_params(&self) -> usize {
        self.named_params().iter().map(|(_, t)| t.len()).sum()
    }
}

fn trunk_layers_zeros(widths: &[usize]) -> Vec<DenseLayer> {
    widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let act = if i + 2 == widths.len() {
                Activation::Linear
            } else {
                Activation::Tanh
            };
            DenseLayer::zeros(w[0], w[1], act)
        })
        .collect()
}

/// The branch/trunk combination `G[n,s,c] = sum_h B[h,s] T[n,h,c] + beta`.
pub fn combine(b: &Tensor, t: &Tensor, beta: f64) -> Result<Tensor> {
    let (hd, s) = match b.shape() {
        [hd, s] => (*hd, *s),
        other => {
            return Err(Error::shape("combine B", "[HD x S]", format!("{other:?}")));
        }
    };
    let (n, c) = match t.shape() {
        [n, t_hd, c] if *t_hd == hd => (*n, *c),
        other => {
            return Err(Error::shape(
                "combine T",
                format!("[N x {hd} x C]"),
                format!("{other:?}"),
            ));
        }
    };
    let mut g = Tensor::zeros(&[n, s, c]);
    let gd = g.as_mut_slice();
    gd.iter_mut().for_each(|v| *v = beta);
    let (bd, td) = (b.as_slice(), t.as_slice());
    for node in 0..n {
        let tn = &td[node * hd * c..(node + 1) * hd * c];
        let gn = &mut gd[node * s * c..(node + 1) * s * c];
        for h in 0..hd {
            let th = &tn[h * c..(h + 1) * c];
            let bh = &bd[h * s..(h + 1) * s];
            for (step, &w) in bh.iter().enumerate() {
                let row = &mut gn[step * c..(step + 1) * c];
                for (gv, tv) in row.iter_mut().zip(th.iter()) {
                    *gv += w * tv;
                }
            }
        }
    }
    Ok(g)
}

/// Gradients of [`combine`]: returns `(dB, dT, dbeta)`.
pub fn combine_backward(d_g: &Tensor, b: &Tensor, t: &Tensor) -> Result<(Tensor, Tensor, f64)> {
    let (hd, s) = (b.shape()[0], b.shape()[1]);
    let (n, c) = (t.shape()[0], t.shape()[2]);
    if d_g.shape() != [n, s, c] {
        return Err(Error::shape(
            "combine backward",
            format!("[{n}, {s}, {c}]"),
            format!("{:?}", d_g.shape()),
        ));
    }
    let mut d_b = Tensor::zeros(&[hd, s]);
    let mut d_t = Tensor::zeros(&[n, hd, c]);
    let dg = d_g.as_slice();
    let (bd, td) = (b.as_slice(), t.as_slice());
    let (dbd, dtd) = (d_b.as_mut_slice(), d_t.as_mut_slice());
    let mut d_beta = 0.0;
    for &v in dg {
        d_beta += v;
    }
    for node in 0..n {
        let dgn = &dg[node * s * c..(node + 1) * s * c];
        let tn = &td[node * hd * c..(node + 1) * hd * c];
        let dtn = &mut dtd[node * hd * c..(node + 1) * hd * c];
        for h in 0..hd {
            let th = &tn[h * c..(h + 1) * c];
            let dth = &mut dtn[h * c..(h + 1) * c];
            let bh = &bd[h * s..(h + 1) * s];
            let dbh = &mut dbd[h * s..(h + 1) * s];
            for step in 0..s {
                let dg_row = &dgn[step * c..(step + 1) * c];
                let mut acc = 0.0;
                for comp in 0..c {
                    acc += dg_row[comp] * th[comp];
                    dth[comp] += bh[step] * dg_row[comp];
                }
                dbh[step] += acc;
            }
        }
    }
    Ok((d_b, d_t, d_beta))
}

/// Basis/weight decomposition of one forward evaluation.
pub struct BasisDecomposition {
    /// `[N x HD x C]`: `basis[:, h, c]` is basis field `h` of component `c`.
    pub basis: Tensor,
    /// `[HD x S]`: weight of each basis field at each output step.
    pub weights: Tensor,
    pub beta: f64,
}

impl BasisDecomposition {
    /// Number of basis fields per component.
    pub fn fields_per_component(&self) -> usize {
        self.basis.shape()[1]
    }

    pub fn reconstruct(&self) -> Result<Tensor> {
        combine(&self.weights, &self.basis, self.beta)
    }
}

/// A trained model bundled with everything needed for physical-unit
/// inference.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub model: SDeepOnet,
    pub field_scaler: Scaler,
    /// Max-abs scale dividing branch inputs.
    pub load_scale: f64,
    pub coord_norm: CoordNorm,
    pub problem: String,
    pub component_names: Vec<String>,
    pub t_total: f64,
}

impl Surrogate {
    /// Predict physical-unit fields `[N x S x C]` for a physical load
    /// history sampled at the model's `S` output times.
    pub fn predict(&self, load: &[f64], coords: &[f64]) -> Result<Tensor> {
        let scaled_load: Vec<f64> = load.iter().map(|v| v / self.load_scale).collect();
        let unit_coords = self.coord_norm.apply(coords);
        let mut g = self.model.forward(&scaled_load, &unit_coords)?;
        let (s, c) = (self.model.config.s, self.model.config.c);
        let n = g.shape()[0];
        let gd = g.as_mut_slice();
        for node in 0..n {
            for step in 0..s {
                for comp in 0..c {
                    let idx = (node * s + step) * c + comp;
                    gd[idx] = self.field_scaler.invert_value(gd[idx], step, comp)?;
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_config() -> ModelConfig {
        ModelConfig {
            hd: 4,
            s: 5,
            c: 2,
            branch_hidden: vec![8, 4, 4, 8],
            trunk_widths: vec![2, 6, 6, 8],
        }
    }

    #[test]
    fn zero_model_gives_beta_everywhere() {
        let mut model = SDeepOnet::zeros(toy_config()).unwrap();
        model.beta.as_mut_slice()[0] = 0.75;
        let coords = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let g = model.forward(&[0.5; 5], &coords).unwrap();
        assert_eq!(g.shape(), &[3, 5, 2]);
        assert!(g.as_slice().iter().all(|&v| v == 0.75));
    }

    #[test]
    fn branch_shape_contract() {
        let config = ModelConfig::new(25, 3);
        let model = SDeepOnet::init(config, 1).unwrap();
        let b = model.branch_forward(&vec![0.3; 25]).unwrap();
        assert_eq!(b.shape(), &[32, 25]);
    }

    #[test]
    fn branch_zero_params_zero_output() {
        let model = SDeepOnet::zeros(toy_config()).unwrap();
        let b = model.branch_forward(&[0.4; 5]).unwrap();
        assert!(b.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn branch_sequence_order_matters() {
        let model = SDeepOnet::init(toy_config(), 7).unwrap();
        let load = [0.9, -0.4, 0.2, 0.8, -0.6];
        let permuted = [0.8, 0.9, -0.6, 0.2, -0.4];
        let b1 = model.branch_forward(&load).unwrap();
        let b2 = model.branch_forward(&permuted).unwrap();
        assert_ne!(b1.as_slice(), b2.as_slice());
    }

    #[test]
    fn branch_rejects_wrong_length() {
        let model = SDeepOnet::zeros(toy_config()).unwrap();
        assert!(model.branch_forward(&[0.0; 4]).is_err());
    }

    #[test]
    fn trunk_shape_and_purity() {
        let model = SDeepOnet::init(toy_config(), 3).unwrap();
        let coords = vec![0.1, 0.9, 0.1, 0.9, 0.4, 0.2];
        let t = model.trunk_forward(&coords).unwrap();
        assert_eq!(t.shape(), &[3, 4, 2]);
        // duplicate input rows give duplicate output rows
        let row0 = &t.as_slice()[0..8];
        let row1 = &t.as_slice()[8..16];
        assert_eq!(row0, row1);
    }

    #[test]
    fn trunk_zero_final_layer_zero_output() {
        let mut model = SDeepOnet::init(toy_config(), 3).unwrap();
        let last = model.trunk.last_mut().unwrap();
        last.w.fill(0.0);
        last.b.fill(0.0);
        let t = model.trunk_forward(&[0.2, 0.3]).unwrap();
        assert!(t.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn paper_scale_trunk_shape() {
        let config = ModelConfig::new(25, 3);
        let model = SDeepOnet::init(config, 5).unwrap();
        let n = 4961;
        let coords: Vec<f64> = (0..n * 2).map(|i| (i as f64 * 0.37).fract()).collect();
        let t = model.trunk_forward(&coords).unwrap();
        assert_eq!(t.shape(), &[n, 32, 3]);
        assert!(t.all_finite());
    }

    #[test]
    fn combine_zero_branch_gives_beta() {
        let b = Tensor::zeros(&[4, 5]);
        let t = Tensor::from_vec(&[3, 4, 2], (0..24).map(|x| x as f64).collect()).unwrap();
        let g = combine(&b, &t, 0.5).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn combine_hand_value() {
        // HD=2, S=1, N=1, C=1: G = 1*3 + 2*4 + 0.5 = 11.5
        let b = Tensor::from_vec(&[2, 1], vec![1.0, 2.0]).unwrap();
        let t = Tensor::from_vec(&[1, 2, 1], vec![3.0, 4.0]).unwrap();
        let g = combine(&b, &t, 0.5).unwrap();
        assert_eq!(g.as_slice(), &[11.5]);
    }

    /// Index-by-index contraction used as the oracle for `combine`.
    pub(crate) fn combine_naive(b: &Tensor, t: &Tensor, beta: f64) -> Tensor {
        let (hd, s) = (b.shape()[0], b.shape()[1]);
        let (n, c) = (t.shape()[0], t.shape()[2]);
        let mut g = Tensor::zeros(&[n, s, c]);
        for node in 0..n {
            for step in 0..s {
                for comp in 0..c {
                    let mut acc = beta;
                    for h in 0..hd {
                        acc += b.as_slice()[h * s + step] * t.as_slice()[(node * hd + h) * c + comp];
                    }
                    g.as_mut_slice()[(node * s + step) * c + comp] = acc;
                }
            }
        }
        g
    }

    fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len: usize = shape.iter().product();
        Tensor::from_vec(shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn combine_matches_naive_loop() {
        let b = random_tensor(&[32, 25], 1);
        let t = random_tensor(&[100, 32, 3], 2);
        let g = combine(&b, &t, 0.3).unwrap();
        let oracle = combine_naive(&b, &t, 0.3);
        let max = g
            .as_slice()
            .iter()
            .zip(oracle.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max <= 1e-12, "max diff {max}");
    }

    #[test]
    fn combine_linear_in_trunk() {
        let b = random_tensor(&[4, 6], 3);
        let t1 = random_tensor(&[5, 4, 2], 4);
        let t2 = random_tensor(&[5, 4, 2], 5);
        let beta = 0.7;
        let (a_coef, b_coef) = (1.3, -0.6);
        let mut t_mix = Tensor::zeros(&[5, 4, 2]);
        for (i, v) in t_mix.as_mut_slice().iter_mut().enumerate() {
            *v = a_coef * t1.as_slice()[i] + b_coef * t2.as_slice()[i];
        }
        let g_mix = combine(&b, &t_mix, beta).unwrap();
        let g1 = combine(&b, &t1, beta).unwrap();
        let g2 = combine(&b, &t2, beta).unwrap();
        for i in 0..g_mix.len() {
            let expected =
                a_coef * g1.as_slice()[i] + b_coef * g2.as_slice()[i] - (a_coef + b_coef - 1.0) * beta;
            assert!((g_mix.as_slice()[i] - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn forward_smoke_and_repeatability() {
        let model = SDeepOnet::init(toy_config(), 11).unwrap();
        let load = [0.1, 0.5, -0.4, 0.9, 0.0];
        let coords = vec![0.0, 0.0, 1.0, 1.0];
        let g1 = model.forward(&load, &coords).unwrap();
        let g2 = model.forward(&load, &coords).unwrap();
        assert_eq!(g1.as_slice(), g2.as_slice());
        assert_eq!(g1.shape(), &[2, 5, 2]);
        assert!(g1.all_finite());
    }

    #[test]
    fn basis_reconstruction_identity() {
        let model = SDeepOnet::init(toy_config(), 13).unwrap();
        let load = [0.2, -0.1, 0.6, 0.4, -0.9];
        let coords = vec![0.3, 0.3, 0.8, 0.1, 0.5, 0.9];
        let basis = model.extract_basis(&load, &coords).unwrap();
        assert_eq!(basis.fields_per_component(), 4);
        let rebuilt = basis.reconstruct().unwrap();
        let direct = model.forward(&load, &coords).unwrap();
        for (a, b) in rebuilt.as_slice().iter().zip(direct.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn basis_count_at_reference_hd() {
        let config = ModelConfig::new(25, 3);
        let model = SDeepOnet::init(config, 17).unwrap();
        let basis = model
            .extract_basis(&vec![0.1; 25], &[0.5, 0.5, 0.25, 0.75])
            .unwrap();
        assert_eq!(basis.fields_per_component(), 32);
    }

    #[test]
    fn count_dense_stack_hand_sum() {
        assert_eq!(count_dense_stack(&[2, 3, 1]), 13);
    }

    #[test]
    fn count_params_matches_allocation() {
        for config in [toy_config(), ModelConfig::new(25, 3), ModelConfig::with_hd(16, 40, 2)] {
            let model = SDeepOnet::zeros(config.clone()).unwrap();
            assert_eq!(model.num_params(), count_params(&config), "config {config:?}");
        }
    }

    #[test]
    fn vector_scalar_param_delta() {
        let vector = ModelConfig::new(40, 2);
        let scalar = ModelConfig::new(40, 1);
        let delta = count_params(&vector) - count_params(&scalar);
        assert_eq!(delta, 101 * 32 + 32);
        assert_eq!(delta, 3264);
    }

    #[test]
    fn param_delta_general_form() {
        for (hd, c) in [(8usize, 2usize), (16, 3), (32, 4)] {
            let mut vector = ModelConfig::with_hd(hd, 10, c);
            let mut scalar = ModelConfig::with_hd(hd, 10, 1);
            vector.trunk_widths = vec![2, 20, 33, hd * c];
            scalar.trunk_widths = vec![2, 20, 33, hd];
            let delta = count_params(&vector) - count_params(&scalar);
            assert_eq!(delta, (c - 1) * (33 * hd + hd));
        }
    }

    #[test]
    fn combine_random_shape_sweep() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..10 {
            let hd = rng.random_range(1..20);
            let s = rng.random_range(1..30);
            let n = rng.random_range(1..40);
            let c = rng.random_range(1..5);
            let b = random_tensor(&[hd, s], 100 + trial);
            let t = random_tensor(&[n, hd, c], 200 + trial);
            let beta = rng.random_range(-1.0..1.0);
            let g = combine(&b, &t, beta).unwrap();
            let oracle = combine_naive(&b, &t, beta);
            for (a, o) in g.as_slice().iter().zip(oracle.as_slice()) {
                assert!((a - o).abs() <= 1e-12);
            }
        }
    }
}
