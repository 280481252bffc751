use std::collections::HashMap;

use crate::error::{Error, Result};

/// Column-named table of finite reals, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    columns: Vec<Vec<f64>>,
    rows: usize,
}

impl Dataset {
    pub fn from_columns<S: AsRef<str>>(names: &[S], columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Data(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if names.is_empty() {
            return Err(Error::Data("dataset has no columns".into()));
        }
        let rows = columns[0].len();
        if rows == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        let mut index = HashMap::new();
        for (j, (name, col)) in names.iter().zip(&columns).enumerate() {
            let name = name.as_ref();
            if index.insert(name.to_string(), j).is_some() {
                return Err(Error::Data(format!("duplicate column `{name}`")));
            }
            if col.len() != rows {
                return Err(Error::Data(format!(
                    "column `{name}` has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite value {} in column `{name}` row {r}",
                    col[r]
                )));
            }
        }
        Ok(Dataset {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            index,
            columns,
            rows,
        })
    }

    pub fn from_rows<S: AsRef<str>>(names: &[S], rows: &[Vec<f64>]) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(Error::Data(format!(
                    "row {r} has {} values, expected {}",
                    row.len(),
                    names.len()
                )));
            }
            for (c, &v) in columns.iter_mut().zip(row) {
                c.push(v);
            }
        }
        Self::from_columns(names, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Dataset::from_columns(&self.names, columns)
    }

    /// New dataset with the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let columns = names
            .iter()
            .map(|n| self.column_by_name(n.as_ref()).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_columns(names, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_shape_errors() {
        assert!(Dataset::from_columns(&["a"], vec![vec![1.0, f64::NAN]]).is_err());
        assert!(Dataset::from_columns(&["a"], vec![vec![f64::INFINITY]]).is_err());
        assert!(Dataset::from_columns(&["a", "a"], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(Dataset::from_columns(&["a", "b"], vec![vec![1.0], vec![2.0, 3.0]]).is_err());
        assert!(Dataset::from_columns(&["a"], vec![vec![]]).is_err());
    }

    #[test]
    fn row_and_column_access() {
        let d = Dataset::from_rows(&["x", "y"], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.row(1), vec![3.0, 4.0]);
        assert_eq!(d.column_by_name("y").unwrap(), &[2.0, 4.0]);
        let s = d.select_rows(&[1]).unwrap();
        assert_eq!(s.row(0), vec![3.0, 4.0]);
        let c = d.select_columns(&["y"]).unwrap();
        assert_eq!(c.names(), &["y".to_string()]);
    }
}
