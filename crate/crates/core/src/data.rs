//! CSV ingestion and feature standardization.
//!
//! Accepted files are rectangular UTF-8 CSV (RFC-4180 subset, '.' decimal),
//! header row optional. One column may hold labels — integers or string
//! categories — selected by name or zero-based index; labels are factorized
//! to 0..c-1 in sorted order of their distinct values.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Dataset, Standardization};

fn csv_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn is_numeric(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

fn non_numeric_columns(record: &csv::StringRecord) -> Vec<usize> {
    record
        .iter()
        .enumerate()
        .filter(|(_, f)| !is_numeric(f))
        .map(|(i, _)| i)
        .collect()
}

/// Loads a CSV into a Dataset. `label_column` names a header column or gives
/// a zero-based index; omit it for unlabeled data.
pub fn load_csv<P: AsRef<Path>>(path: P, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e.to_string()))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_err(path, e.to_string()))?;
    if records.is_empty() {
        return Err(csv_err(path, "empty file"));
    }

    // Header detection: a first row with non-numeric cells that do not recur
    // in the second row is a header. Recurring non-numeric cells belong to a
    // categorical label column instead.
    let nn_first = non_numeric_columns(&records[0]);
    let has_header = !nn_first.is_empty()
        && (records.len() == 1 || nn_first != non_numeric_columns(&records[1]));
    let header: Option<Vec<String>> = has_header
        .then(|| records[0].iter().map(|s| s.to_string()).collect());
    let rows = &records[if has_header { 1 } else { 0 }..];
    if rows.is_empty() {
        return Err(csv_err(path, "no data rows"));
    }
    let ncols = rows[0].len();

    let label_idx: Option<usize> = match label_column {
        None => None,
        Some(name) => {
            let by_name = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name));
            let idx = by_name.or_else(|| name.parse::<usize>().ok());
            match idx {
                Some(i) if i < ncols => Some(i),
                _ => {
                    return Err(csv_err(
                        path,
                        format!("label column '{name}' not found"),
                    ))
                }
            }
        }
    };

    let mut features: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut raw_labels: Vec<String> = Vec::new();
    for (r, record) in rows.iter().enumerate() {
        let mut row = Vec::with_capacity(ncols - label_idx.is_some() as usize);
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                csv_err(
                    path,
                    format!("non-numeric feature cell '{field}' at row {r}, column {c}"),
                )
            })?;
            row.push(v);
        }
        features.push(row);
    }

    let labels = label_idx.map(|_| factorize(&raw_labels));
    Dataset::new(Matrix::from_rows(&features)?, labels)
}

/// Maps raw label strings to 0..c-1 in sorted order of the distinct values
/// (numeric sort when every label parses as an integer).
fn factorize(raw: &[String]) -> Vec<usize> {
    let distinct: BTreeSet<&String> = raw.iter().collect();
    let mut ordered: Vec<&String> = distinct.into_iter().collect();
    if ordered.iter().all(|s| s.parse::<i64>().is_ok()) {
        ordered.sort_by_key(|s| s.parse::<i64>().expect("checked integer"));
    }
    raw.iter()
        .map(|s| ordered.iter().position(|o| *o == s).expect("present"))
        .collect()
}

/// Per-feature zero mean and unit variance; (near-)constant features are
/// centered only. The applied transform is recorded on the returned dataset.
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    if data.len() < 2 {
        return Err(Error::InvalidConfig(
            "standardization needs at least 2 points".into(),
        ));
    }
    let stats = &data.feature_stats;
    let d = data.dim();
    // A constant column can carry std ~1e-16 of pure rounding residue;
    // dividing by it would blow the residue up to O(1) values. Exactly
    // constant columns (min == max) center to exact zeros.
    let mut centers = stats.mean.clone();
    let mut divisors = vec![1.0; d];
    for j in 0..d {
        if stats.min[j] == stats.max[j] {
            centers[j] = stats.min[j];
        } else if stats.std[j] > 1e-12 * stats.mean[j].abs().max(1.0) {
            divisors[j] = stats.std[j];
        }
    }
    let mut out = data.points.clone();
    for i in 0..data.len() {
        let row = out.row_mut(i);
        for j in 0..d {
            row[j] = (row[j] - centers[j]) / divisors[j];
        }
    }
    let mut ds = Dataset::new(out, data.labels.clone())?;
    ds.standardization = Some(Standardization {
        mean: centers,
        std: divisors,
    });
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("clam_data_tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_headered_csv_with_named_label() {
        let p = write_temp(
            "headered.csv",
            "a,b,cls\n1.0,2.0,x\n3.0,4.0,y\n5.0,6.0,x\n",
        );
        let ds = load_csv(&p, Some("cls")).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels, Some(vec![0, 1, 0]));
    }

    #[test]
    fn loads_headerless_csv_with_indexed_label() {
        let p = write_temp("headerless.csv", "1,2,7\n3,4,3\n5,6,7\n");
        let ds = load_csv(&p, Some("2")).unwrap();
        assert_eq!(ds.dim(), 2);
        // Distinct labels {3, 7} sort numerically to {0, 1}.
        assert_eq!(ds.labels, Some(vec![1, 0, 1]));
    }

    #[test]
    fn headerless_with_string_labels_detected() {
        let p = write_temp("strlabels.csv", "1,2,cp\n3,4,im\n5,6,cp\n");
        let ds = load_csv(&p, Some("2")).unwrap();
        assert_eq!(ds.labels, Some(vec![0, 1, 0]));
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn single_row_without_labels() {
        let p = write_temp("onerow.csv", "0.5,1.5,-3.0\n");
        let ds = load_csv(&p, None).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.dim(), 3);
        assert!(ds.labels.is_none());
    }

    #[test]
    fn ragged_rows_rejected() {
        let p = write_temp("ragged.csv", "1,2,3\n4,5\n");
        assert!(load_csv(&p, None).is_err());
    }

    #[test]
    fn non_numeric_feature_rejected() {
        let p = write_temp("badcell.csv", "1,2\n3,oops\n5,6\n");
        let err = load_csv(&p, None).unwrap_err();
        assert!(err.to_string().contains("oops"));
    }

    #[test]
    fn empty_file_rejected() {
        let p = write_temp("empty.csv", "");
        assert!(load_csv(&p, None).is_err());
    }

    #[test]
    fn missing_label_column_rejected() {
        let p = write_temp("nolabel.csv", "a,b\n1,2\n3,4\n");
        assert!(load_csv(&p, Some("missing")).is_err());
    }

    #[test]
    fn standardize_centers_and_scales() {
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|i| {
                let t = i as f64;
                vec![3.0 + t, -5.0 * t, 7.7, (t * 0.37).sin() * 2.0, t * t * 0.01]
            })
            .collect();
        let ds = Dataset::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let out = standardize(&ds).unwrap();
        let stats = &out.feature_stats;
        for j in 0..5 {
            assert!(stats.mean[j].abs() <= 1e-9, "mean[{j}] = {}", stats.mean[j]);
            if j != 2 {
                assert!((stats.std[j] - 1.0).abs() <= 1e-9, "std[{j}] = {}", stats.std[j]);
            }
        }
        // Constant feature becomes all-zero.
        for i in 0..out.len() {
            assert_eq!(out.point(i)[2], 0.0);
        }
        assert!(out.standardization.is_some());
    }

    #[test]
    fn standardize_is_idempotent() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64 * 0.61).sin(), (i as f64 * 1.3).cos() * 4.0])
            .collect();
        let ds = Dataset::new(Matrix::from_rows(&rows).unwrap(), None).unwrap();
        let once = standardize(&ds).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once
            .points
            .as_slice()
            .iter()
            .zip(twice.points.as_slice())
        {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn standardize_rejects_single_point() {
        let ds = Dataset::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), None).unwrap();
        assert!(standardize(&ds).is_err());
    }
}
