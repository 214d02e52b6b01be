//! Model checkpoints: one `params.bin` holding every parameter tensor at a
//! recorded offset, plus a manifest carrying the architecture, scaler
//! parameters, and the layer-convention tags a loader must match.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{crc32, decode_array, encode_array, ArrayEntry, DType, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::model::scaler::{CoordNorm, Scaler};
use crate::model::{ModelConfig, SDeepOnet, Surrogate};

/// Update convention: single bias per gate, reset gate inside the
/// candidate's recurrent term, `h = (1-z) h + z hc`.
pub const GRU_CONVENTION: &str = "gru-v1:single-bias,reset-in-candidate";
/// Combiner convention: `G[n,s,c] = sum_h B[h,s] T[n,h,c] + beta`.
pub const COMBINE_CONVENTION: &str = "combine-v1:scalar-beta";
/// Trunk output slot `h * C + c` maps to `(h, c)`.
pub const TRUNK_RESHAPE_CONVENTION: &str = "trunk-reshape-v1:component-major";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalerBundle {
    pub field: Scaler,
    pub load_scale: f64,
    pub coord: CoordNorm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    pub kind: String,
    pub problem: String,
    pub component_names: Vec<String>,
    pub t_total: f64,
    pub dtype: DType,
    pub endianness: String,
    pub conventions: BTreeMap<String, String>,
    pub model: ModelConfig,
    pub scalers: ScalerBundle,
    pub arrays: BTreeMap<String, ArrayEntry>,
}

pub struct LoadedCheckpoint {
    pub surrogate: Surrogate,
    pub manifest: CheckpointManifest,
}

fn conventions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("gru".to_string(), GRU_CONVENTION.to_string()),
        ("combine".to_string(), COMBINE_CONVENTION.to_string()),
        ("trunk-reshape".to_string(), TRUNK_RESHAPE_CONVENTION.to_string()),
    ])
}

/// Write a checkpoint under `dir`, storing parameters in the given dtype.
pub fn write_checkpoint(surrogate: &Surrogate, dir: impl AsRef<Path>, dtype: DType) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

    let mut blob: Vec<u8> = Vec::new();
    let mut arrays = BTreeMap::new();
    for (name, tensor) in surrogate.model.named_params() {
        let bytes = encode_array(tensor.as_slice(), dtype);
        arrays.insert(
            name,
            ArrayEntry {
                file: "params.bin".into(),
                shape: tensor.shape().to_vec(),
                offset: blob.len() as u64,
                crc32: crc32(&bytes),
            },
        );
        blob.extend_from_slice(&bytes);
    }
    let path = dir.join("params.bin");
    fs::write(&path, &blob).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;

    let manifest = CheckpointManifest {
        format_version: FORMAT_VERSION,
        kind: "checkpoint".into(),
        problem: surrogate.problem.clone(),
        component_names: surrogate.component_names.clone(),
        t_total: surrogate.t_total,
        dtype,
        endianness: "little".into(),
        conventions: conventions(),
        model: surrogate.model.config.clone(),
        scalers: ScalerBundle {
            field: surrogate.field_scaler.clone(),
            load_scale: surrogate.load_scale,
            coord: surrogate.coord_norm.clone(),
        },
        arrays,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    let path = dir.join("manifest.json");
    fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Read and validate a checkpoint. Refuses manifests whose convention tags
/// differ from this build's layer conventions.
pub fn read_checkpoint(dir: impl AsRef<Path>) -> Result<LoadedCheckpoint> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(Error::MissingManifest(manifest_path.display().to_string()));
    }
    let text = fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(format!("reading {}", manifest_path.display()), e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            got: manifest.format_version,
            supported: FORMAT_VERSION,
        });
    }
    if manifest.kind != "checkpoint" {
        return Err(Error::InvalidArgument(format!(
            "expected a checkpoint container, found kind '{}'",
            manifest.kind
        )));
    }
    for (key, expected) in conventions() {
        match manifest.conventions.get(&key) {
            Some(tag) if *tag == expected => {}
            other => {
                return Err(Error::ConventionMismatch(format!(
                    "{key}: checkpoint has {other:?}, this build implements '{expected}'"
                )));
            }
        }
    }

    let params_path = dir.join("params.bin");
    let blob =
        fs::read(&params_path).map_err(|e| Error::io(format!("reading {}", params_path.display()), e))?;

    let mut model = SDeepOnet::zeros(manifest.model.clone())?;
    for (name, tensor) in model.named_params_mut() {
        let entry = manifest
            .arrays
            .get(&name)
            .ok_or_else(|| Error::InvalidArgument(format!("checkpoint missing tensor '{name}'")))?;
        if entry.shape != tensor.shape() {
            return Err(Error::shape(
                "checkpoint tensor",
                format!("{:?}", tensor.shape()),
                format!("{:?}", entry.shape),
            ));
        }
        let len = entry.shape.iter().product::<usize>() * manifest.dtype.size();
        let start = entry.offset as usize;
        let end = start + len;
        if end > blob.len() {
            return Err(Error::TruncatedArray {
                name,
                expected: end as u64,
                got: blob.len() as u64,
            });
        }
        let bytes = &blob[start..end];
        let computed = crc32(bytes);
        if computed != entry.crc32 {
            return Err(Error::ChecksumMismatch {
                name,
                stored: entry.crc32,
                computed,
            });
        }
        tensor
            .as_mut_slice()
            .copy_from_slice(&decode_array(bytes, manifest.dtype));
    }

    let surrogate = Surrogate {
        model,
        field_scaler: manifest.scalers.field.clone(),
        load_scale: manifest.scalers.load_scale,
        coord_norm: manifest.scalers.coord.clone(),
        problem: manifest.problem.clone(),
        component_names: manifest.component_names.clone(),
        t_total: manifest.t_total,
    };
    Ok(LoadedCheckpoint { surrogate, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scaler::ScalerKind;

    fn probe_surrogate(seed: u64) -> Surrogate {
        let config = ModelConfig {
            hd: 4,
            s: 6,
            c: 2,
            branch_hidden: vec![6, 4, 4, 6],
            trunk_widths: vec![2, 8, 8],
        };
        let model = SDeepOnet::init(config, seed).unwrap();
        let mut field_scaler = Scaler::new(ScalerKind::PerStepMaxAbs);
        let fields: Vec<f64> = (0..6 * 3 * 2).map(|i| (i as f64 * 0.31).sin() * 4.0).collect();
        field_scaler.fit(&fields, 6, 3, 2).unwrap();
        Surrogate {
            model,
            field_scaler,
            load_scale: 2.0,
            coord_norm: CoordNorm {
                min: [0.0, 0.0],
                range: [3.0, 1.0],
            },
            problem: "cavity".into(),
            component_names: vec!["P".into(), "u".into()],
            t_total: 2.0,
        }
    }

    fn probe_output(s: &Surrogate) -> Vec<f64> {
        let load = [0.4, -0.8, 1.2, 0.9, -0.2, 0.0];
        let coords = [0.0, 0.0, 1.5, 0.5, 3.0, 1.0];
        s.predict(&load, &coords).unwrap().as_slice().to_vec()
    }

    #[test]
    fn f64_roundtrip_forward_invariant() {
        let dir = tempfile::tempdir().unwrap();
        let surrogate = probe_surrogate(3);
        write_checkpoint(&surrogate, dir.path(), DType::F64).unwrap();
        let loaded = read_checkpoint(dir.path()).unwrap();
        let a = probe_output(&surrogate);
        let b = probe_output(&loaded.surrogate);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert_eq!(loaded.manifest.dtype, DType::F64);
        assert_eq!(loaded.surrogate.component_names, vec!["P", "u"]);
    }

    #[test]
    fn f32_downcast_within_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let surrogate = probe_surrogate(5);
        write_checkpoint(&surrogate, dir.path(), DType::F32).unwrap();
        let loaded = read_checkpoint(dir.path()).unwrap();
        assert_eq!(loaded.manifest.dtype, DType::F32);
        let a = probe_output(&surrogate);
        let b = probe_output(&loaded.surrogate);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn convention_mismatch_refused() {
        let dir = tempfile::tempdir().unwrap();
        write_checkpoint(&probe_surrogate(7), dir.path(), DType::F64).unwrap();
        let path = dir.path().join("manifest.json");
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace(GRU_CONVENTION, "gru-v0:dual-bias");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_checkpoint(dir.path()),
            Err(Error::ConventionMismatch(_))
        ));
    }

    #[test]
    fn corrupted_params_detected() {
        let dir = tempfile::tempdir().unwrap();
        write_checkpoint(&probe_surrogate(9), dir.path(), DType::F64).unwrap();
        let path = dir.path().join("params.bin");
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x01;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_checkpoint(dir.path()),
            Err(Error::ChecksumMismatch { .. })
        ));
    }
}
