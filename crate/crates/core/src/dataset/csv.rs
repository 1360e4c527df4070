//! CSV ingestion.
//!
//! Input files are headered, comma-separated, UTF-8. One column holds the
//! target; every other column is a feature, kept in header order.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use super::{Dataset, DatasetError, TargetKind};

/// Names the target column and the task it encodes.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub target_column: String,
    pub target_kind: TargetKind,
}

/// Loads a dataset from a headered CSV file.
///
/// For classification, distinct raw target values are mapped to class
/// indices `0..K-1` in ascending order of raw value, so ingestion does not
/// depend on row order. Blank or non-numeric cells abort the load with the
/// offending position.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let io_err = |source| DatasetError::Io {
        path: path_str.clone(),
        source,
    };

    let mut reader = csv::Reader::from_path(path).map_err(|e| {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(source) => io_err(source),
                _ => unreachable!("is_io_error guarantees an Io kind"),
            }
        } else {
            DatasetError::MalformedCsv {
                path: path_str.clone(),
                source: e,
            }
        }
    })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| DatasetError::MalformedCsv {
            path: path_str.clone(),
            source,
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let target_col = headers
        .iter()
        .position(|h| *h == schema.target_column)
        .ok_or_else(|| DatasetError::MissingColumn {
            path: path_str.clone(),
            column: schema.target_column.clone(),
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_targets: Vec<f64> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DatasetError::MalformedCsv {
            path: path_str.clone(),
            source,
        })?;
        let mut row = Vec::with_capacity(headers.len().saturating_sub(1));
        for (col_idx, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| DatasetError::NonNumericCell {
                    path: path_str.clone(),
                    row: row_idx,
                    column: headers
                        .get(col_idx)
                        .cloned()
                        .unwrap_or_else(|| col_idx.to_string()),
                })?;
            if col_idx == target_col {
                raw_targets.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DatasetError::EmptyFile { path: path_str });
    }

    let n = rows.len();
    let d = headers.len() - 1;
    let features = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_owned());

    match schema.target_kind {
        TargetKind::Regression => Dataset::regression(name, features, raw_targets),
        TargetKind::Classification => {
            // Ascending map raw value -> class index. Raw values are finite,
            // so total ordering via bit representation is sound.
            let mut classes: BTreeMap<u64, usize> = BTreeMap::new();
            let mut sorted: Vec<f64> = raw_targets.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite targets"));
            sorted.dedup();
            for (idx, value) in sorted.iter().enumerate() {
                classes.insert(value.to_bits(), idx);
            }
            let labels: Vec<usize> = raw_targets.iter().map(|v| classes[&v.to_bits()]).collect();
            Dataset::classification(name, features, labels, sorted.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Targets, TaskKind};
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn schema(target: &str, kind: TargetKind) -> CsvSchema {
        CsvSchema {
            target_column: target.to_owned(),
            target_kind: kind,
        }
    }

    #[test]
    fn loads_binary_classification() {
        let f = write_csv("a,b,y\n1.0,2.0,0\n3.0,4.0,1\n5.0,6.0,0\n");
        let ds = load_csv(f.path(), &schema("y", TargetKind::Classification)).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.task_kind(), TaskKind::Classification { n_classes: 2 });
    }

    #[test]
    fn target_column_position_does_not_matter() {
        let f = write_csv("y,a,b\n1,1.0,2.0\n0,3.0,4.0\n");
        let ds = load_csv(f.path(), &schema("y", TargetKind::Classification)).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.features()[(0, 0)], 1.0);
        assert_eq!(ds.features()[(1, 1)], 4.0);
    }

    #[test]
    fn raw_labels_map_ascending() {
        let f = write_csv("a,y\n1.0,7\n2.0,2\n3.0,7\n");
        let ds = load_csv(f.path(), &schema("y", TargetKind::Classification)).unwrap();
        let Targets::Class(labels) = ds.targets() else {
            panic!("expected class targets");
        };
        assert_eq!(labels, &vec![1, 0, 1]);
    }

    #[test]
    fn blank_cell_is_reported_with_position() {
        let f = write_csv("a,b,y\n1.0,,0\n");
        let err = load_csv(f.path(), &schema("y", TargetKind::Classification)).unwrap_err();
        match err {
            DatasetError::NonNumericCell { row, column, .. } => {
                assert_eq!(row, 0);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_column_and_empty_file() {
        let f = write_csv("a,b\n1.0,2.0\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y", TargetKind::Regression)),
            Err(DatasetError::MissingColumn { .. })
        ));
        let f = write_csv("a,b,y\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y", TargetKind::Regression)),
            Err(DatasetError::EmptyFile { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv", &schema("y", TargetKind::Regression)),
            Err(DatasetError::Io { .. })
        ));
    }

    #[test]
    fn non_finite_cell_rejected() {
        let f = write_csv("a,y\nNaN,0.5\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y", TargetKind::Regression)),
            Err(DatasetError::NonNumericCell { .. })
        ));
    }
}
