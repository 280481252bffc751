use std::path::Path;

use bspbn::Dataset;
use log::{info, warn};

use crate::error::{CliError, Result};

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a CSV with a header row into a real-valued dataset.
///
/// Columns in which no cell parses as a finite number are dropped. Rows with
/// a missing or unparseable cell in any kept column are then dropped.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let ingest = |message: String| CliError::Ingest {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows.push((0..headers.len()).map(|j| rec.get(j).and_then(parse_cell)).collect());
    }

    let keep: Vec<usize> = (0..headers.len())
        .filter(|&j| rows.iter().any(|r| r[j].is_some()))
        .collect();
    let rejected: Vec<&str> = (0..headers.len())
        .filter(|j| !keep.contains(j))
        .map(|j| headers[j].as_str())
        .collect();
    if !rejected.is_empty() {
        warn!("{}: rejected non-numeric columns {rejected:?}", path.display());
    }
    if keep.is_empty() {
        return Err(ingest("no numeric columns".into()));
    }

    let total = rows.len();
    let clean: Vec<Vec<f64>> = rows
        .into_iter()
        .filter_map(|r| keep.iter().map(|&j| r[j]).collect::<Option<Vec<f64>>>())
        .collect();
    let dropped = total - clean.len();
    if dropped > 0 {
        info!("{}: dropped {dropped} of {total} rows with missing or unparseable cells", path.display());
    }
    if clean.is_empty() {
        return Err(ingest("no rows left after cleaning".into()));
    }
    let names: Vec<&str> = keep.iter().map(|&j| headers[j].as_str()).collect();
    Ok(Dataset::from_rows(&names, &clean)?)
}

/// Writes a dataset as CSV with a header row.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(data.names())?;
    for r in 0..data.n_rows() {
        w.write_record(data.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn numeric(rows: usize) -> String {
        let mut s = String::from("a,b,c\n");
        for i in 0..rows {
            s.push_str(&format!("{},{},{}\n", i, i as f64 * 0.5, -(i as f64)));
        }
        s
    }

    #[test]
    fn numeric_file_loads() {
        let d = load_csv(file(&numeric(100)).path()).unwrap();
        assert_eq!((d.n_rows(), d.n_cols()), (100, 3));
        assert_eq!(d.column(1)[3], 1.5);
    }

    #[test]
    fn blank_cell_drops_row() {
        let text = numeric(100).replacen("7,3.5,-7", "7,,-7", 1);
        let d = load_csv(file(&text).path()).unwrap();
        assert_eq!(d.n_rows(), 99);
    }

    #[test]
    fn text_columns_are_rejected() {
        let f = file("x,label\n1.0,foo\n2.0,bar\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.names(), &["x".to_string()]);
        assert_eq!(d.n_rows(), 2);
        let f = file("label,kind\nfoo,a\nbar,b\n");
        assert!(matches!(load_csv(f.path()), Err(CliError::Ingest { .. })));
    }

    #[test]
    fn nothing_left_is_an_error() {
        let f = file("x,y\n1,\n,2\n");
        assert!(matches!(load_csv(f.path()), Err(CliError::Ingest { .. })));
    }

    #[test]
    fn write_then_load_round_trips() {
        let d = load_csv(file(&numeric(10)).path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&d, out.path()).unwrap();
        assert_eq!(load_csv(out.path()).unwrap(), d);
    }
}
