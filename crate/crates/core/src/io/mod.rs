//! On-disk container for datasets and model checkpoints.
//!
//! A container is a directory holding `manifest.json` plus one or more raw
//! array files. Arrays are row-major little-endian IEEE-754; the manifest is
//! the single source of truth for shapes, dtypes and CRC-32 checksums, and
//! readers never infer shapes from file sizes.

pub mod checkpoint;
pub mod csv;

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Per-case solution fields, shape `[S x N x C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshots {
    pub s: usize,
    pub n: usize,
    pub c: usize,
    pub data: Vec<f64>,
}

impl FieldSnapshots {
    pub fn zeros(s: usize, n: usize, c: usize) -> Self {
        Self {
            s,
            n,
            c,
            data: vec![0.0; s * n * c],
        }
    }

    #[inline]
    pub fn at(&self, step: usize, node: usize, comp: usize) -> f64 {
        self.data[(step * self.n + node) * self.c + comp]
    }

    #[inline]
    pub fn at_mut(&mut self, step: usize, node: usize, comp: usize) -> &mut f64 {
        &mut self.data[(step * self.n + node) * self.c + comp]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DType {
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "f64")]
    F64,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub file: String,
    pub shape: Vec<usize>,
    pub offset: u64,
    pub crc32: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// "dataset" or "checkpoint".
    pub kind: String,
    /// "cavity", "bar1d", or "external".
    pub problem: String,
    pub n_cases: usize,
    pub s: usize,
    pub n: usize,
    pub c: usize,
    pub component_names: Vec<String>,
    pub dtype: DType,
    /// Always "little"; recorded for self-description.
    pub endianness: String,
    pub arrays: BTreeMap<String, ArrayEntry>,
    /// Fitted scaler parameters, when the producer has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalers: Option<serde_json::Value>,
    /// Generation seed and parameters, free-form.
    #[serde(default)]
    pub generation: serde_json::Value,
    /// Load-history horizon of the sample times.
    pub t_total: f64,
}

/// In-memory dataset: coordinates, load histories, and solution fields.
#[derive(Debug, Clone)]
pub struct DatasetContainer {
    /// `[N x 2]` node coordinates.
    pub coords: Vec<f64>,
    /// `[n_cases x S]` load samples.
    pub loads: Vec<f64>,
    /// `[n_cases x S x N x C]` solution fields.
    pub fields: Vec<f64>,
    pub manifest: Manifest,
}

impl DatasetContainer {
    pub fn assemble(
        problem: &str,
        coords: Vec<f64>,
        loads: Vec<f64>,
        cases: Vec<FieldSnapshots>,
        component_names: Vec<String>,
        t_total: f64,
        generation: serde_json::Value,
    ) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::InvalidArgument("no cases to assemble".into()));
        }
        let (s, n, c) = (cases[0].s, cases[0].n, cases[0].c);
        let n_cases = cases.len();
        if coords.len() != n * 2 {
            return Err(Error::shape(
                "assemble coords",
                format!("{} values", n * 2),
                format!("{}", coords.len()),
            ));
        }
        if loads.len() != n_cases * s {
            return Err(Error::shape(
                "assemble loads",
                format!("{} values", n_cases * s),
                format!("{}", loads.len()),
            ));
        }
        if component_names.len() != c {
            return Err(Error::shape(
                "assemble component names",
                format!("{c}"),
                format!("{}", component_names.len()),
            ));
        }
        let mut fields = Vec::with_capacity(n_cases * s * n * c);
        for case in &cases {
            if (case.s, case.n, case.c) != (s, n, c) {
                return Err(Error::shape(
                    "assemble cases",
                    format!("[{s} x {n} x {c}]"),
                    format!("[{} x {} x {}]", case.s, case.n, case.c),
                ));
            }
            fields.extend_from_slice(&case.data);
        }
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            kind: "dataset".into(),
            problem: problem.into(),
            n_cases,
            s,
            n,
            c,
            component_names,
            dtype: DType::F64,
            endianness: "little".into(),
            arrays: BTreeMap::new(),
            scalers: None,
            generation,
            t_total,
        };
        Ok(Self {
            coords,
            loads,
            fields,
            manifest,
        })
    }

    #[inline]
    pub fn field_at(&self, case: usize, step: usize, node: usize, comp: usize) -> f64 {
        let m = &self.manifest;
        self.fields[((case * m.s + step) * m.n + node) * m.c + comp]
    }

    /// Slice of one case's fields, `[S x N x C]`.
    pub fn case_fields(&self, case: usize) -> &[f64] {
        let m = &self.manifest;
        let len = m.s * m.n * m.c;
        &self.fields[case * len..(case + 1) * len]
    }

    /// Slice of one case's load samples, `[S]`.
    pub fn case_load(&self, case: usize) -> &[f64] {
        let s = self.manifest.s;
        &self.loads[case * s..(case + 1) * s]
    }

    fn check_shapes(&self) -> Result<()> {
        let m = &self.manifest;
        let checks = [
            ("coords", self.coords.len(), m.n * 2),
            ("loads", self.loads.len(), m.n_cases * m.s),
            ("fields", self.fields.len(), m.n_cases * m.s * m.n * m.c),
        ];
        for (name, got, expected) in checks {
            if got != expected {
                return Err(Error::shape(name, format!("{expected}"), format!("{got}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn encode_array(data: &[f64], dtype: DType) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(data.len() * dtype.size());
    match dtype {
        DType::F64 => {
            for x in data {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        DType::F32 => {
            for x in data {
                bytes.extend_from_slice(&(*x as f32).to_le_bytes());
            }
        }
    }
    bytes
}

pub(crate) fn decode_array(bytes: &[u8], dtype: DType) -> Vec<f64> {
    match dtype {
        DType::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        DType::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
    }
}

pub(crate) fn crc32(bytes: &[u8]) -> u32 {
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(bytes);
    hasher.finalize()
}

pub(crate) fn write_array_file(
    dir: &Path,
    name: &str,
    data: &[f64],
    shape: Vec<usize>,
    dtype: DType,
) -> Result<ArrayEntry> {
    let file = format!("{name}.bin");
    let bytes = encode_array(data, dtype);
    let path = dir.join(&file);
    fs::write(&path, &bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(ArrayEntry {
        file,
        shape,
        offset: 0,
        crc32: crc32(&bytes),
    })
}

pub(crate) fn read_array_entry(
    dir: &Path,
    name: &str,
    entry: &ArrayEntry,
    dtype: DType,
) -> Result<Vec<f64>> {
    let path = dir.join(&entry.file);
    let expected: usize = entry.shape.iter().product::<usize>() * dtype.size();
    let mut file =
        fs::File::open(&path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let meta = file
        .metadata()
        .map_err(|e| Error::io(format!("stat {}", path.display()), e))?;
    if meta.len() < entry.offset + expected as u64 {
        return Err(Error::TruncatedArray {
            name: name.into(),
            expected: entry.offset + expected as u64,
            got: meta.len(),
        });
    }
    if entry.offset > 0 {
        use std::io::Seek;
        file.seek(std::io::SeekFrom::Start(entry.offset))
            .map_err(|e| Error::io(format!("seeking {}", path.display()), e))?;
    }
    let mut bytes = vec![0u8; expected];
    file.read_exact(&mut bytes)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let computed = crc32(&bytes);
    if computed != entry.crc32 {
        return Err(Error::ChecksumMismatch {
            name: name.into(),
            stored: entry.crc32,
            computed,
        });
    }
    Ok(decode_array(&bytes, dtype))
}

pub(crate) fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub(crate) fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    if !path.exists() {
        return Err(Error::MissingManifest(path.display().to_string()));
    }
    let text =
        fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            got: manifest.format_version,
            supported: FORMAT_VERSION,
        });
    }
    Ok(manifest)
}

/// Write a dataset container under `dir` (created if needed).
pub fn write_dataset(container: &DatasetContainer, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    container.check_shapes()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let m = &container.manifest;
    let dtype = m.dtype;
    let mut manifest = m.clone();
    manifest.arrays.clear();
    manifest.arrays.insert(
        "coords".into(),
        write_array_file(dir, "coords", &container.coords, vec![m.n, 2], dtype)?,
    );
    manifest.arrays.insert(
        "loads".into(),
        write_array_file(dir, "loads", &container.loads, vec![m.n_cases, m.s], dtype)?,
    );
    manifest.arrays.insert(
        "fields".into(),
        write_array_file(
            dir,
            "fields",
            &container.fields,
            vec![m.n_cases, m.s, m.n, m.c],
            dtype,
        )?,
    );
    write_manifest(dir, &manifest)
}

/// Read and validate a dataset container; checksum verification is mandatory.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<DatasetContainer> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    if manifest.kind != "dataset" {
        return Err(Error::InvalidArgument(format!(
            "expected a dataset container, found kind '{}'",
            manifest.kind
        )));
    }
    let get = |name: &str, shape: Vec<usize>| -> Result<Vec<f64>> {
        let entry = manifest
            .arrays
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("manifest missing array '{name}'")))?;
        if entry.shape != shape {
            return Err(Error::shape(
                name,
                format!("{shape:?}"),
                format!("{:?}", entry.shape),
            ));
        }
        read_array_entry(dir, name, entry, manifest.dtype)
    };
    let coords = get("coords", vec![manifest.n, 2])?;
    let loads = get("loads", vec![manifest.n_cases, manifest.s])?;
    let fields = get(
        "fields",
        vec![manifest.n_cases, manifest.s, manifest.n, manifest.c],
    )?;
    let container = DatasetContainer {
        coords,
        loads,
        fields,
        manifest,
    };
    container.check_shapes()?;
    Ok(container)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_container() -> DatasetContainer {
        let cases = vec![
            FieldSnapshots {
                s: 3,
                n: 4,
                c: 2,
                data: (0..24).map(|x| x as f64 * 0.5 - 3.0).collect(),
            },
            FieldSnapshots {
                s: 3,
                n: 4,
                c: 2,
                data: (0..24).map(|x| (x as f64).sin()).collect(),
            },
        ];
        DatasetContainer::assemble(
            "external",
            (0..8).map(|x| x as f64 / 7.0).collect(),
            (0..6).map(|x| x as f64).collect(),
            cases,
            vec!["a".into(), "b".into()],
            1.0,
            serde_json::json!({"seed": 1}),
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let container = toy_container();
        write_dataset(&container, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(container.coords, back.coords);
        assert_eq!(container.loads, back.loads);
        assert_eq!(container.fields, back.fields);
        assert_eq!(back.manifest.n_cases, 2);
        assert_eq!(back.manifest.component_names, vec!["a", "b"]);
        assert_eq!(back.manifest.generation["seed"], 1);
    }

    #[test]
    fn fields_file_has_exact_size() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&toy_container(), dir.path()).unwrap();
        let len = std::fs::metadata(dir.path().join("fields.bin")).unwrap().len();
        assert_eq!(len, 2 * 3 * 4 * 2 * 8);
    }

    #[test]
    fn byte_flip_detected() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&toy_container(), dir.path()).unwrap();
        let path = dir.path().join("loads.bin");
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[9] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        match read_dataset(dir.path()) {
            Err(Error::ChecksumMismatch { name, .. }) => assert_eq!(name, "loads"),
            other => panic!("expected checksum error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_array_detected() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&toy_container(), dir.path()).unwrap();
        let path = dir.path().join("fields.bin");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            read_dataset(dir.path()),
            Err(Error::TruncatedArray { .. })
        ));
    }

    #[test]
    fn missing_manifest_detected() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&toy_container(), dir.path()).unwrap();
        std::fs::remove_file(dir.path().join("manifest.json")).unwrap();
        assert!(matches!(
            read_dataset(dir.path()),
            Err(Error::MissingManifest(_))
        ));
    }

    #[test]
    fn unknown_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&toy_container(), dir.path()).unwrap();
        let path = dir.path().join("manifest.json");
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 99");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_dataset(dir.path()),
            Err(Error::FormatVersion { got: 99, .. })
        ));
    }

    #[test]
    fn f32_storage_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut container = toy_container();
        container.manifest.dtype = DType::F32;
        write_dataset(&container, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back.manifest.dtype, DType::F32);
        for (a, b) in container.fields.iter().zip(back.fields.iter()) {
            assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        }
    }
}
