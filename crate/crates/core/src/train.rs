//! Mini-batch training and the evaluation suite.
//!
//! One "epoch" is one optimizer step on one mini-batch, matching how the
//! framework-reported epoch counts in this problem family are to be read;
//! a 300000-epoch budget means 300000 optimizer steps, not passes over the
//! dataset.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::DatasetContainer;
use crate::metrics::{linear_trend, mae, r2, rel_l2};
use crate::model::scaler::{CoordNorm, Scaler, ScalerKind};
use crate::model::{combine, combine_backward, ModelGrads, SDeepOnet, Surrogate};
use crate::nn::adam::AdamState;
use crate::nn::gradcheck::GradCheckable;
use crate::nn::tensor::Tensor;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub split_fraction: f64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 64,
            lr: 1e-3,
            seed: 0,
            split_fraction: 0.8,
            shuffle: true,
        }
    }
}

/// Seeded permutation split into disjoint, exhaustive train/test index sets.
pub fn split_dataset(n_cases: usize, seed: u64, fraction: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    if n_cases < 2 {
        return Err(Error::InvalidArgument("need at least two cases to split".into()));
    }
    let mut indices: Vec<usize> = (0..n_cases).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let k = ((n_cases as f64 * fraction).round() as usize).clamp(1, n_cases - 1);
    let test = indices.split_off(k);
    Ok((indices, test))
}

/// Dataset transformed into model space: unit-box coordinates, max-abs
/// scaled loads, scaler-transformed fields.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub coords_unit: Vec<f64>,
    pub coord_norm: CoordNorm,
    pub scaled_loads: Vec<f64>,
    pub load_scale: f64,
    pub scaled_fields: Vec<f64>,
    pub field_scaler: Scaler,
    pub n_cases: usize,
    pub s: usize,
    pub n: usize,
    pub c: usize,
}

/// Default scaler family for a problem tag: per-step max-abs for the cavity
/// fields, per-component min-max for the bar outputs.
pub fn default_scaler_kind(problem: &str) -> ScalerKind {
    match problem {
        "bar1d" => ScalerKind::MinMaxPerComponent,
        _ => ScalerKind::PerStepMaxAbs,
    }
}

/// Fit scalers over the whole dataset and transform it.
pub fn prepare(dataset: &DatasetContainer, kind: ScalerKind) -> Result<PreparedData> {
    let m = &dataset.manifest;
    let coord_norm = CoordNorm::fit(&dataset.coords)?;
    let coords_unit = coord_norm.apply(&dataset.coords);
    let load_scale = dataset
        .loads
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(crate::model::scaler::SCALE_EPS);
    let scaled_loads: Vec<f64> = dataset.loads.iter().map(|v| v / load_scale).collect();
    let mut field_scaler = Scaler::new(kind);
    field_scaler.fit(&dataset.fields, m.s, m.n, m.c)?;
    let mut scaled_fields = dataset.fields.clone();
    field_scaler.apply_fields(&mut scaled_fields, m.s, m.n, m.c)?;
    Ok(PreparedData {
        coords_unit,
        coord_norm,
        scaled_loads,
        load_scale,
        scaled_fields,
        field_scaler,
        n_cases: m.n_cases,
        s: m.s,
        n: m.n,
        c: m.c,
    })
}

impl PreparedData {
    fn case_load(&self, case: usize) -> &[f64] {
        &self.scaled_loads[case * self.s..(case + 1) * self.s]
    }

    fn case_fields(&self, case: usize) -> &[f64] {
        let len = self.s * self.n * self.c;
        &self.scaled_fields[case * len..(case + 1) * len]
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Mini-batch loss per optimizer step.
    pub loss_curve: Vec<f64>,
}

/// One forward/backward pass over a batch; returns the batch MSE with
/// gradients accumulated into `grads`.
fn batch_pass(
    model: &SDeepOnet,
    data: &PreparedData,
    batch: &[usize],
    grads: &mut ModelGrads,
) -> Result<f64> {
    let (s, n, c) = (data.s, data.n, data.c);
    let (trunk_caches, t_tensor) = model.trunk_forward_cached(&data.coords_unit)?;
    let mut d_t_accum = Tensor::zeros(t_tensor.shape());
    let total = (batch.len() * s * n * c) as f64;
    let mut loss_sum = 0.0;
    for &case in batch {
        let (branch_cache, b_tensor) = model.branch_forward_cached(data.case_load(case))?;
        let g = combine(&b_tensor, &t_tensor, model.beta_value())?;
        let target = data.case_fields(case);
        let mut d_g = Tensor::zeros(g.shape());
        {
            let gd = g.as_slice();
            let dgd = d_g.as_mut_slice();
            for node in 0..n {
                for step in 0..s {
                    for comp in 0..c {
                        let gi = (node * s + step) * c + comp;
                        let ti = (step * n + node) * c + comp;
                        let diff = gd[gi] - target[ti];
                        loss_sum += diff * diff;
                        dgd[gi] = 2.0 * diff / total;
                    }
                }
            }
        }
        let (d_b, d_t, d_beta) = combine_backward(&d_g, &b_tensor, &t_tensor)?;
        model.branch_backward(&branch_cache, &d_b, grads)?;
        for (acc, v) in d_t_accum.as_mut_slice().iter_mut().zip(d_t.as_slice()) {
            *acc += v;
        }
        grads.beta.as_mut_slice()[0] += d_beta;
    }
    model.trunk_backward(&trunk_caches, &d_t_accum, grads)?;
    Ok(loss_sum / total)
}

/// Mini-batch Adam descent on the scaled MSE. Deterministic for a fixed
/// seed: batches are drawn from a seeded permutation cycle and gradient
/// reduction order is fixed.
pub fn train(
    model: &mut SDeepOnet,
    data: &PreparedData,
    train_indices: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if train_indices.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = train_indices.to_vec();
    if cfg.shuffle {
        order.shuffle(&mut rng);
    }
    let mut cursor = 0usize;
    let mut grads = ModelGrads::zeros_like(model);
    let mut adam = {
        let named = model.named_params();
        let tensors: Vec<&Tensor> = named.iter().map(|(_, t)| *t).collect();
        AdamState::new(&tensors, cfg.lr)
    };
    let mut loss_curve = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cursor >= order.len() {
            cursor = 0;
            if cfg.shuffle {
                order.shuffle(&mut rng);
            }
        }
        let end = (cursor + cfg.batch_size).min(order.len());
        let batch = &order[cursor..end];
        cursor = end;

        grads.zero();
        let loss = batch_pass(model, data, batch, &mut grads)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        loss_curve.push(loss);

        let grad_tensors = grads.tensors();
        // clone keeps the borrow checker happy: grads are read-only here
        let grad_owned: Vec<Tensor> = grad_tensors.iter().map(|t| (*t).clone()).collect();
        let grad_refs: Vec<&Tensor> = grad_owned.iter().collect();
        let mut named = model.named_params_mut();
        let mut param_refs: Vec<&mut Tensor> = named.iter_mut().map(|(_, t)| &mut **t).collect();
        adam.step(&mut param_refs, &grad_refs)?;
    }
    Ok(TrainOutcome { loss_curve })
}

/// Full-model gradient check adapter: the model bound to a fixed batch of
/// scaled loads and targets under the training MSE.
pub struct ModelGradCheck {
    pub model: SDeepOnet,
    pub coords_unit: Vec<f64>,
    pub loads: Vec<Vec<f64>>,
    /// Scaled targets, `[S x N x C]` per case.
    pub targets: Vec<Vec<f64>>,
}

impl ModelGradCheck {
    fn locate(&self, idx: usize) -> (usize, usize) {
        let mut rest = idx;
        for (tensor_idx, (_, t)) in self.model.named_params().iter().enumerate() {
            if rest < t.len() {
                return (tensor_idx, rest);
            }
            rest -= t.len();
        }
        panic!("parameter index {idx} out of range");
    }
}

impl GradCheckable for ModelGradCheck {
    fn param_count(&self) -> usize {
        self.model.num_params()
    }

    fn get_param(&self, idx: usize) -> f64 {
        let (tensor_idx, off) = self.locate(idx);
        self.model.named_params()[tensor_idx].1.as_slice()[off]
    }

    fn set_param(&mut self, idx: usize, value: f64) {
        let (tensor_idx, off) = self.locate(idx);
        self.model.named_params_mut()[tensor_idx].1.as_mut_slice()[off] = value;
    }

    fn loss(&mut self) -> f64 {
        let (s, c) = (self.model.config.s, self.model.config.c);
        let n = self.coords_unit.len() / 2;
        let total = (self.loads.len() * s * n * c) as f64;
        let t_tensor = self.model.trunk_forward(&self.coords_unit).unwrap();
        let mut loss_sum = 0.0;
        for (load, target) in self.loads.iter().zip(self.targets.iter()) {
            let b = self.model.branch_forward(load).unwrap();
            let g = combine(&b, &t_tensor, self.model.beta_value()).unwrap();
            let gd = g.as_slice();
            for node in 0..n {
                for step in 0..s {
                    for comp in 0..c {
                        let diff = gd[(node * s + step) * c + comp]
                            - target[(step * n + node) * c + comp];
                        loss_sum += diff * diff;
                    }
                }
            }
        }
        loss_sum / total
    }

    fn loss_and_grad(&mut self) -> (f64, Vec<f64>) {
        let (s, c) = (self.model.config.s, self.model.config.c);
        let n = self.coords_unit.len() / 2;
        let mut grads = ModelGrads::zeros_like(&self.model);
        let data = PreparedData {
            coords_unit: self.coords_unit.clone(),
            coord_norm: CoordNorm {
                min: [0.0, 0.0],
                range: [1.0, 1.0],
            },
            scaled_loads: self.loads.concat(),
            load_scale: 1.0,
            scaled_fields: self.targets.concat(),
            field_scaler: Scaler::new(ScalerKind::PerStepMaxAbs),
            n_cases: self.loads.len(),
            s,
            n,
            c,
        };
        let batch: Vec<usize> = (0..self.loads.len()).collect();
        let loss = batch_pass(&self.model, &data, &batch, &mut grads).unwrap();
        let mut flat = Vec::with_capacity(self.param_count());
        for t in grads.tensors() {
            flat.extend_from_slice(t.as_slice());
        }
        (loss, flat)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentMetrics {
    pub name: String,
    pub rel_l2_pct: f64,
    pub mae: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendLine {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Evaluation report over a set of cases, all metrics in physical units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    /// Pooled per-component metrics over every entry of the evaluated cases.
    pub components: Vec<ComponentMetrics>,
    /// Evaluated dataset case indices, in report row order.
    pub case_indices: Vec<usize>,
    /// Per component: mean relative L2 over steps, one row per case.
    /// Ill-defined cells (zero-norm reference) are skipped in the mean.
    pub time_averaged: Vec<Vec<f64>>,
    /// Per component: mean relative L2 over cases, one entry per step.
    pub case_averaged: Vec<Vec<f64>>,
    /// Mean |load| over cases at each step (trend abscissa).
    pub mean_abs_load_per_step: Vec<f64>,
    /// Trend of case-averaged error against load magnitude, per component.
    pub trends: Vec<Option<TrendLine>>,
    /// Count of (case, step, component) cells with zero-norm reference,
    /// where relative L2 is ill-defined and flagged instead of reported.
    pub n_zero_norm_cells: usize,
}

/// Evaluate a trained surrogate against reference fields for the given
/// dataset cases.
pub fn evaluate(
    surrogate: &Surrogate,
    dataset: &DatasetContainer,
    indices: &[usize],
) -> Result<EvalReport> {
    let m = &dataset.manifest;
    let (s, n, c) = (m.s, m.n, m.c);
    if indices.is_empty() {
        return Err(Error::InvalidArgument("no cases to evaluate".into()));
    }
    if surrogate.model.config.s != s || surrogate.model.config.c != c {
        return Err(Error::shape(
            "evaluate",
            format!("model S={} C={}", surrogate.model.config.s, surrogate.model.config.c),
            format!("dataset S={s} C={c}"),
        ));
    }
    let mut pred_pool = vec![Vec::new(); c];
    let mut ref_pool = vec![Vec::new(); c];
    // rel-L2 matrix per component, NaN marks ill-defined cells
    let mut err_matrix = vec![vec![f64::NAN; indices.len() * s]; c];
    let mut n_zero_norm = 0usize;

    for (row, &case) in indices.iter().enumerate() {
        let pred = surrogate.predict(dataset.case_load(case), &dataset.coords)?;
        let pd = pred.as_slice();
        let reference = dataset.case_fields(case);
        for comp in 0..c {
            for step in 0..s {
                let mut p_step = Vec::with_capacity(n);
                let mut r_step = Vec::with_capacity(n);
                for node in 0..n {
                    let p = pd[(node * s + step) * c + comp];
                    let r = reference[(step * n + node) * c + comp];
                    p_step.push(p);
                    r_step.push(r);
                    pred_pool[comp].push(p);
                    ref_pool[comp].push(r);
                }
                match rel_l2(&p_step, &r_step) {
                    Ok(e) => err_matrix[comp][row * s + step] = e,
                    Err(Error::ZeroNormReference) => n_zero_norm += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let components = (0..c)
        .map(|comp| {
            Ok(ComponentMetrics {
                name: m
                    .component_names
                    .get(comp)
                    .cloned()
                    .unwrap_or_else(|| format!("component{comp}")),
                rel_l2_pct: rel_l2(&pred_pool[comp], &ref_pool[comp])?,
                mae: mae(&pred_pool[comp], &ref_pool[comp])?,
                r2: r2(&pred_pool[comp], &ref_pool[comp])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nan_mean = |values: &mut dyn Iterator<Item = f64>| -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for v in values {
            if v.is_finite() {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    };

    let mut time_averaged = Vec::with_capacity(c);
    let mut case_averaged = Vec::with_capacity(c);
    for comp in 0..c {
        let matrix = &err_matrix[comp];
        time_averaged.push(
            (0..indices.len())
                .map(|row| nan_mean(&mut (0..s).map(|step| matrix[row * s + step])))
                .collect::<Vec<f64>>(),
        );
        case_averaged.push(
            (0..s)
                .map(|step| nan_mean(&mut (0..indices.len()).map(|row| matrix[row * s + step])))
                .collect::<Vec<f64>>(),
        );
    }

    let mean_abs_load_per_step: Vec<f64> = (0..s)
        .map(|step| {
            indices
                .iter()
                .map(|&case| dataset.case_load(case)[step].abs())
                .sum::<f64>()
                / indices.len() as f64
        })
        .collect();

    let trends = case_averaged
        .iter()
        .map(|errors| {
            let pairs: (Vec<f64>, Vec<f64>) = mean_abs_load_per_step
                .iter()
                .zip(errors.iter())
                .filter(|(_, e)| e.is_finite())
                .map(|(x, e)| (*x, *e))
                .unzip();
            if pairs.0.len() < 2 {
                return None;
            }
            linear_trend(&pairs.0, &pairs.1)
                .ok()
                .map(|(slope, intercept, r2)| TrendLine {
                    slope,
                    intercept,
                    r2,
                })
        })
        .collect();

    Ok(EvalReport {
        components,
        case_indices: indices.to_vec(),
        time_averaged,
        case_averaged,
        mean_abs_load_per_step,
        trends,
        n_zero_norm_cells: n_zero_norm,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSVs for plotting: per-case time-averaged errors and per-step
    /// case-averaged errors with the load-magnitude abscissa.
    pub fn write_csvs(&self, dir: impl AsRef<std::path::Path>) -> Result<()> {
        use std::fmt::Write as _;
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let n_comp = self.components.len();

        let mut time_avg = String::from("case");
        for comp in &self.components {
            let _ = write!(time_avg, ",rel_l2_{}", comp.name);
        }
        time_avg.push('\n');
        for (row, case) in self.case_indices.iter().enumerate() {
            let _ = write!(time_avg, "{case}");
            for comp in 0..n_comp {
                let _ = write!(time_avg, ",{}", self.time_averaged[comp][row]);
            }
            time_avg.push('\n');
        }
        let path = dir.join("time_averaged.csv");
        std::fs::write(&path, time_avg)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;

        let mut case_avg = String::from("step,mean_abs_load");
        for comp in &self.components {
            let _ = write!(case_avg, ",rel_l2_{}", comp.name);
        }
        case_avg.push('\n');
        let steps = self.mean_abs_load_per_step.len();
        for step in 0..steps {
            let _ = write!(case_avg, "{},{}", step + 1, self.mean_abs_load_per_step[step]);
            for comp in 0..n_comp {
                let _ = write!(case_avg, ",{}", self.case_averaged[comp][step]);
            }
            case_avg.push('\n');
        }
        let path = dir.join("case_averaged.csv");
        std::fs::write(&path, case_avg)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(())
    }
}

/// Write the loss curve as `epoch,loss` rows.
pub fn write_loss_curve(curve: &[f64], path: impl AsRef<std::path::Path>) -> Result<()> {
    use std::fmt::Write as _;
    let mut text = String::from("epoch,loss\n");
    for (epoch, loss) in curve.iter().enumerate() {
        let _ = writeln!(text, "{epoch},{loss}");
    }
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
