//! Output-field scaling transforms.
//!
//! Two flavours: a per-step max-abs scale (one factor per output step and
//! component, fitted over all cases and nodes, mapping into [-1, 1]) and a
//! per-component min-max scale (one [min, max] per component over
//! everything, mapping into [0, 1]). Degenerate slabs clamp the scale at a
//! small epsilon instead of dividing by zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCALE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalerKind {
    PerStepMaxAbs,
    MinMaxPerComponent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum ScalerParams {
    PerStepMaxAbs {
        s: usize,
        c: usize,
        /// `[S x C]` row-major scales.
        scale: Vec<f64>,
    },
    MinMaxPerComponent {
        c: usize,
        min: Vec<f64>,
        max: Vec<f64>,
    },
}

/// A fittable/invertible field scaler.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    kind: ScalerKind,
    params: Option<ScalerParams>,
}

impl Scaler {
    pub fn new(kind: ScalerKind) -> Self {
        Self { kind, params: None }
    }

    pub fn kind(&self) -> ScalerKind {
        self.kind
    }

    pub fn is_fitted(&self) -> bool {
        self.params.is_some()
    }

    /// Fit over `fields` laid out `[cases x S x N x C]`.
    pub fn fit(&mut self, fields: &[f64], s: usize, n: usize, c: usize) -> Result<()> {
        let block = s * n * c;
        if block == 0 || fields.is_empty() || fields.len() % block != 0 {
            return Err(Error::shape(
                "scaler fit",
                format!("non-empty multiple of {block}"),
                format!("{}", fields.len()),
            ));
        }
        let n_cases = fields.len() / block;
        self.params = Some(match self.kind {
            ScalerKind::PerStepMaxAbs => {
                let mut scale = vec![0.0f64; s * c];
                for case in 0..n_cases {
                    for step in 0..s {
                        for node in 0..n {
                            let base = ((case * s + step) * n + node) * c;
                            for comp in 0..c {
                                let v = fields[base + comp].abs();
                                let slot = &mut scale[step * c + comp];
                                if v > *slot {
                                    *slot = v;
                                }
                            }
                        }
                    }
                }
                for v in scale.iter_mut() {
                    *v = v.max(SCALE_EPS);
                }
                ScalerParams::PerStepMaxAbs { s, c, scale }
            }
            ScalerKind::MinMaxPerComponent => {
                let mut min = vec![f64::INFINITY; c];
                let mut max = vec![f64::NEG_INFINITY; c];
                for (i, &v) in fields.iter().enumerate() {
                    let comp = i % c;
                    if v < min[comp] {
                        min[comp] = v;
                    }
                    if v > max[comp] {
                        max[comp] = v;
                    }
                }
                ScalerParams::MinMaxPerComponent { c, min, max }
            }
        });
        Ok(())
    }

    fn params(&self) -> Result<&ScalerParams> {
        self.params.as_ref().ok_or(Error::ScalerUnfitted)
    }

    /// Scale one value belonging to output step `step` and component `comp`.
    pub fn transform_value(&self, x: f64, step: usize, comp: usize) -> Result<f64> {
        Ok(match self.params()? {
            ScalerParams::PerStepMaxAbs { c, scale, .. } => x / scale[step * c + comp],
            ScalerParams::MinMaxPerComponent { min, max, .. } => {
                let range = (max[comp] - min[comp]).max(SCALE_EPS);
                (x - min[comp]) / range
            }
        })
    }

    pub fn invert_value(&self, x: f64, step: usize, comp: usize) -> Result<f64> {
        Ok(match self.params()? {
            ScalerParams::PerStepMaxAbs { c, scale, .. } => x * scale[step * c + comp],
            ScalerParams::MinMaxPerComponent { min, max, .. } => {
                let range = (max[comp] - min[comp]).max(SCALE_EPS);
                x * range + min[comp]
            }
        })
    }

    /// Scale fields laid out `[cases x S x N x C]` in place.
    pub fn apply_fields(&self, fields: &mut [f64], s: usize, n: usize, c: usize) -> Result<()> {
        let params = self.params()?;
        let block = s * n * c;
        if block == 0 || fields.len() % block != 0 {
            return Err(Error::shape(
                "scaler apply",
                format!("multiple of {block}"),
                format!("{}", fields.len()),
            ));
        }
        match params {
            ScalerParams::PerStepMaxAbs { scale, .. } => {
                let n_cases = fields.len() / block;
                for case in 0..n_cases {
                    for step in 0..s {
                        let slab = &mut fields[(case * s + step) * n * c..(case * s + step + 1) * n * c];
                        for (i, v) in slab.iter_mut().enumerate() {
                            *v /= scale[step * c + i % c];
                        }
                    }
                }
            }
            ScalerParams::MinMaxPerComponent { min, max, .. } => {
                for (i, v) in fields.iter_mut().enumerate() {
                    let comp = i % c;
                    let range = (max[comp] - min[comp]).max(SCALE_EPS);
                    *v = (*v - min[comp]) / range;
                }
            }
        }
        Ok(())
    }

    /// Undo `apply_fields` in place.
    pub fn invert_fields(&self, fields: &mut [f64], s: usize, n: usize, c: usize) -> Result<()> {
        let params = self.params()?;
        let block = s * n * c;
        if block == 0 || fields.len() % block != 0 {
            return Err(Error::shape(
                "scaler invert",
                format!("multiple of {block}"),
                format!("{}", fields.len()),
            ));
        }
        match params {
            ScalerParams::PerStepMaxAbs { scale, .. } => {
                let n_cases = fields.len() / block;
                for case in 0..n_cases {
                    for step in 0..s {
                        let slab = &mut fields[(case * s + step) * n * c..(case * s + step + 1) * n * c];
                        for (i, v) in slab.iter_mut().enumerate() {
                            *v *= scale[step * c + i % c];
                        }
                    }
                }
            }
            ScalerParams::MinMaxPerComponent { min, max, .. } => {
                for (i, v) in fields.iter_mut().enumerate() {
                    let comp = i % c;
                    let range = (max[comp] - min[comp]).max(SCALE_EPS);
                    *v = *v * range + min[comp];
                }
            }
        }
        Ok(())
    }
}

/// Per-column affine map taking physical coordinates into the unit box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoordNorm {
    pub min: [f64; 2],
    pub range: [f64; 2],
}

impl CoordNorm {
    pub fn fit(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(Error::shape(
                "coord norm fit",
                "non-empty [N x 2]",
                format!("{}", coords.len()),
            ));
        }
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for pair in coords.chunks_exact(2) {
            for k in 0..2 {
                min[k] = min[k].min(pair[k]);
                max[k] = max[k].max(pair[k]);
            }
        }
        Ok(Self {
            min,
            range: [
                (max[0] - min[0]).max(SCALE_EPS),
                (max[1] - min[1]).max(SCALE_EPS),
            ],
        })
    }

    pub fn apply(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .chunks_exact(2)
            .flat_map(|p| {
                [
                    (p[0] - self.min[0]) / self.range[0],
                    (p[1] - self.min[1]) / self.range[1],
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unfitted_scaler_errors() {
        let scaler = Scaler::new(ScalerKind::PerStepMaxAbs);
        assert!(matches!(
            scaler.invert_value(1.0, 0, 0),
            Err(Error::ScalerUnfitted)
        ));
        let mut data = vec![1.0];
        assert!(scaler.invert_fields(&mut data, 1, 1, 1).is_err());
    }

    #[test]
    fn zero_slab_clamps_and_stays_zero() {
        let mut scaler = Scaler::new(ScalerKind::PerStepMaxAbs);
        // step 0 all zero, step 1 nonzero
        let fields = vec![0.0, 0.0, 3.0, -6.0];
        scaler.fit(&fields, 2, 2, 1).unwrap();
        assert_eq!(scaler.transform_value(0.0, 0, 0).unwrap(), 0.0);
        // clamped scale means inverse of 0 is still 0
        assert_eq!(scaler.invert_value(0.0, 0, 0).unwrap(), 0.0);
        assert_eq!(scaler.transform_value(-6.0, 1, 0).unwrap(), -1.0);
    }

    #[test]
    fn maxabs_slab_peaks_at_one() {
        let mut scaler = Scaler::new(ScalerKind::PerStepMaxAbs);
        let fields: Vec<f64> = (0..2 * 3 * 4 * 2).map(|i| (i as f64 * 0.77).sin() * 3.0).collect();
        scaler.fit(&fields, 3, 4, 2).unwrap();
        let mut scaled = fields.clone();
        scaler.apply_fields(&mut scaled, 3, 4, 2).unwrap();
        for step in 0..3 {
            for comp in 0..2 {
                let mut max = 0.0f64;
                for case in 0..2 {
                    for node in 0..4 {
                        max = max.max(scaled[((case * 3 + step) * 4 + node) * 2 + comp].abs());
                    }
                }
                assert!((max - 1.0).abs() < 1e-12, "slab ({step},{comp}) max {max}");
            }
        }
    }

    #[test]
    fn minmax_maps_to_unit_interval() {
        let mut scaler = Scaler::new(ScalerKind::MinMaxPerComponent);
        let fields = vec![10.0, -1.0, 30.0, 3.0, 20.0, 1.0];
        scaler.fit(&fields, 3, 1, 2).unwrap();
        let mut scaled = fields.clone();
        scaler.apply_fields(&mut scaled, 3, 1, 2).unwrap();
        assert_eq!(scaled[0], 0.0);
        assert_eq!(scaled[2], 1.0);
        assert!(scaled.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn coord_norm_unit_box() {
        let coords = vec![0.0, 0.0, 3.0, 0.5, 1.5, 1.0];
        let norm = CoordNorm::fit(&coords).unwrap();
        let mapped = norm.apply(&coords);
        for pair in mapped.chunks_exact(2) {
            assert!((0.0..=1.0).contains(&pair[0]));
            assert!((0.0..=1.0).contains(&pair[1]));
        }
        assert_eq!(mapped[0], 0.0);
        assert_eq!(mapped[2], 1.0);
    }

    proptest! {
        #[test]
        fn round_trip_within_tolerance(
            values in proptest::collection::vec(-1e3f64..1e3, 24),
            kind in prop_oneof![Just(ScalerKind::PerStepMaxAbs), Just(ScalerKind::MinMaxPerComponent)],
        ) {
            let mut scaler = Scaler::new(kind);
            scaler.fit(&values, 2, 3, 2).unwrap();
            let mut data = values.clone();
            scaler.apply_fields(&mut data, 2, 3, 2).unwrap();
            scaler.invert_fields(&mut data, 2, 3, 2).unwrap();
            for (a, b) in values.iter().zip(data.iter()) {
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
            }
        }
    }
}
