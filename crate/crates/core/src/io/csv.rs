//! CSV bridges: field export, external-dataset import, and small series
//! files for the CLI.
//!
//! Schemas:
//! - fields: `case,node,step,component,value`
//! - coords: `node,x,y`
//! - loads:  `case,step,value`
//! - series (load input / target stress): `t,value`

use std::fmt::Write as _;
use std::path::Path;

use super::{DatasetContainer, FieldSnapshots};
use crate::error::{Error, Result};

/// Export a dataset's fields in the flat `case,node,step,component,value`
/// schema.
pub fn export_fields_csv(container: &DatasetContainer, path: impl AsRef<Path>) -> Result<()> {
    let m = &container.manifest;
    let mut text = String::from("case,node,step,component,value\n");
    for case in 0..m.n_cases {
        for node in 0..m.n {
            for step in 0..m.s {
                for comp in 0..m.c {
                    let _ = writeln!(
                        text,
                        "{case},{node},{step},{comp},{}",
                        container.field_at(case, step, node, comp)
                    );
                }
            }
        }
    }
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn parse_fields_line(path: &str, lineno: usize, line: &str, n_cols: usize) -> Result<Vec<f64>> {
    let cells: Vec<&str> = line.split(',').map(str::trim).collect();
    if cells.len() != n_cols {
        return Err(Error::MalformedCsv {
            path: path.into(),
            line: lineno,
            reason: format!("expected {n_cols} columns, found {}", cells.len()),
        });
    }
    cells
        .iter()
        .map(|cell| {
            cell.parse::<f64>().map_err(|_| Error::MalformedCsv {
                path: path.into(),
                line: lineno,
                reason: format!("'{cell}' is not a number"),
            })
        })
        .collect()
}

fn read_numeric_rows(path: &Path, n_cols: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let name = path.display().to_string();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // tolerate a single header line
        if i == 0 && line.split(',').any(|c| c.trim().parse::<f64>().is_err()) {
            continue;
        }
        rows.push(parse_fields_line(&name, i + 1, line, n_cols)?);
    }
    Ok(rows)
}

/// Two-column `t,value` series.
pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let rows = read_numeric_rows(path.as_ref(), 2)?;
    if rows.is_empty() {
        return Err(Error::MalformedCsv {
            path: path.as_ref().display().to_string(),
            line: 0,
            reason: "no data rows".into(),
        });
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn write_series_csv(
    path: impl AsRef<Path>,
    header: &str,
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut text = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Import an external dataset from `fields.csv`, `coords.csv`, `loads.csv`
/// in `dir`. Every (case, node, step, component) cell must be present
/// exactly once.
pub fn import_dataset_csv(
    dir: impl AsRef<Path>,
    component_names: Vec<String>,
    t_total: f64,
) -> Result<DatasetContainer> {
    let dir = dir.as_ref();
    let coords_rows = read_numeric_rows(&dir.join("coords.csv"), 3)?;
    let loads_rows = read_numeric_rows(&dir.join("loads.csv"), 3)?;
    let field_rows = read_numeric_rows(&dir.join("fields.csv"), 5)?;
    if coords_rows.is_empty() || loads_rows.is_empty() || field_rows.is_empty() {
        return Err(Error::InvalidArgument("import files contain no rows".into()));
    }

    let as_index = |v: f64, what: &str| -> Result<usize> {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!("{what} index {v} is not a non-negative integer")));
        }
        Ok(v as usize)
    };

    let n = coords_rows.len();
    let mut coords = vec![f64::NAN; n * 2];
    for row in &coords_rows {
        let node = as_index(row[0], "node")?;
        if node >= n {
            return Err(Error::InvalidArgument(format!(
                "coords node index {node} out of range [0, {n})"
            )));
        }
        coords[node * 2] = row[1];
        coords[node * 2 + 1] = row[2];
    }

    let mut n_cases = 0usize;
    let mut s = 0usize;
    for row in &loads_rows {
        n_cases = n_cases.max(as_index(row[0], "case")? + 1);
        s = s.max(as_index(row[1], "step")? + 1);
    }
    if loads_rows.len() != n_cases * s {
        return Err(Error::InvalidArgument(format!(
            "loads.csv has {} rows, expected n_cases * S = {}",
            loads_rows.len(),
            n_cases * s
        )));
    }
    let mut loads = vec![f64::NAN; n_cases * s];
    for row in &loads_rows {
        loads[as_index(row[0], "case")? * s + as_index(row[1], "step")?] = row[2];
    }

    let c = component_names.len();
    let expected_rows = n_cases * s * n * c;
    if field_rows.len() != expected_rows {
        return Err(Error::InvalidArgument(format!(
            "fields.csv has {} rows, expected {expected_rows}",
            field_rows.len()
        )));
    }
    let mut cases = vec![FieldSnapshots::zeros(s, n, c); n_cases];
    let mut seen = vec![false; expected_rows];
    for row in &field_rows {
        let case = as_index(row[0], "case")?;
        let node = as_index(row[1], "node")?;
        let step = as_index(row[2], "step")?;
        let comp = as_index(row[3], "component")?;
        if case >= n_cases || node >= n || step >= s || comp >= c {
            return Err(Error::InvalidArgument(format!(
                "fields.csv index ({case},{node},{step},{comp}) out of range"
            )));
        }
        let flat = ((case * s + step) * n + node) * c + comp;
        if seen[flat] {
            return Err(Error::InvalidArgument(format!(
                "duplicate fields.csv cell ({case},{node},{step},{comp})"
            )));
        }
        seen[flat] = true;
        *cases[case].at_mut(step, node, comp) = row[4];
    }
    if coords.iter().any(|v| v.is_nan()) || loads.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument(
            "import left unfilled coordinate or load cells".into(),
        ));
    }

    DatasetContainer::assemble(
        "external",
        coords,
        loads,
        cases,
        component_names,
        t_total,
        serde_json::json!({"source": "csv-import"}),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_container() -> DatasetContainer {
        let cases = vec![
            FieldSnapshots {
                s: 2,
                n: 3,
                c: 2,
                data: (0..12).map(|x| x as f64 * 0.25).collect(),
            },
            FieldSnapshots {
                s: 2,
                n: 3,
                c: 2,
                data: (0..12).map(|x| -(x as f64)).collect(),
            },
        ];
        DatasetContainer::assemble(
            "external",
            vec![0.0, 0.0, 0.5, 0.5, 1.0, 1.0],
            vec![0.1, 0.2, 0.3, 0.4],
            cases,
            vec!["a".into(), "b".into()],
            1.0,
            serde_json::Value::Null,
        )
        .unwrap()
    }

    #[test]
    fn export_import_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let container = toy_container();
        export_fields_csv(&container, dir.path().join("fields.csv")).unwrap();

        let mut coords_csv = String::from("node,x,y\n");
        for node in 0..3 {
            coords_csv.push_str(&format!(
                "{node},{},{}\n",
                container.coords[node * 2],
                container.coords[node * 2 + 1]
            ));
        }
        std::fs::write(dir.path().join("coords.csv"), coords_csv).unwrap();
        let mut loads_csv = String::from("case,step,value\n");
        for case in 0..2 {
            for step in 0..2 {
                loads_csv.push_str(&format!("{case},{step},{}\n", container.loads[case * 2 + step]));
            }
        }
        std::fs::write(dir.path().join("loads.csv"), loads_csv).unwrap();

        let imported =
            import_dataset_csv(dir.path(), vec!["a".into(), "b".into()], 1.0).unwrap();
        assert_eq!(imported.coords, container.coords);
        assert_eq!(imported.loads, container.loads);
        assert_eq!(imported.fields, container.fields);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        std::fs::write(&path, "t,value\n0.0,1.0\n0.1,oops\n").unwrap();
        match read_series_csv(&path) {
            Err(Error::MalformedCsv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed csv, got {other:?}"),
        }
    }

    #[test]
    fn series_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        write_series_csv(&path, "t,value", &[vec![0.0, 1.5], vec![0.5, -2.0]]).unwrap();
        let series = read_series_csv(&path).unwrap();
        assert_eq!(series, vec![(0.0, 1.5), (0.5, -2.0)]);
    }
}
