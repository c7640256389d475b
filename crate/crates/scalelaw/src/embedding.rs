//! Embedding matrices and their on-disk fixture format.
//!
//! Fixture files are text: a one-line header `rows dim`, then one row per
//! line of comma-separated values. Truth maps (used by retrieval and
//! classification) are CSV pairs `query_index,candidate_index`; a query may
//! list several true candidates.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Tolerance for declaring a row unit-norm.
pub const NORM_TOL: f64 = 1e-6;

/// Dense row-major matrix of embedding vectors, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
}

impl EmbeddingMatrix {
    /// Wraps a matrix after checking all entries are finite.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("embedding matrix has non-finite entries".into()));
        }
        Ok(Self { data })
    }

    /// Like [`EmbeddingMatrix::new`] but additionally requires every row to
    /// have L2 norm within [`NORM_TOL`] of 1.
    pub fn new_normalized(data: Array2<f64>) -> Result<Self> {
        let m = Self::new(data)?;
        for (i, row) in m.data.rows().into_iter().enumerate() {
            let norm = l2_norm(row);
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Shape(format!(
                    "row {i} has L2 norm {norm}, expected 1 within {NORM_TOL}"
                )));
            }
        }
        Ok(m)
    }

    /// L2-normalizes every row in place; rows with zero norm are rejected.
    pub fn normalize_rows(mut data: Array2<f64>) -> Result<Self> {
        for (i, mut row) in data.rows_mut().into_iter().enumerate() {
            let norm = l2_norm(row.view());
            if norm == 0.0 {
                return Err(Error::Domain(format!("row {i} has zero norm")));
            }
            row.mapv_inplace(|v| v / norm);
        }
        Self::new(data)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    /// Reads the `rows dim` header format.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty embedding file".into()))??;
        let mut parts = header.split_whitespace();
        let rows: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidInput("header must be `rows dim`".into()))?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidInput("header must be `rows dim`".into()))?;
        let mut values = Vec::with_capacity(rows * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 2,
                        field: "value".into(),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "line {}: expected {dim} values, got {}",
                    i + 2,
                    row.len()
                )));
            }
            values.extend(row);
        }
        if values.len() != rows * dim {
            return Err(Error::Shape(format!(
                "expected {rows} rows of {dim} values, got {} values",
                values.len()
            )));
        }
        let data = Array2::from_shape_vec((rows, dim), values)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(data)
    }

    pub fn to_writer<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.rows(), self.dim())?;
        for row in self.data.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(writer, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn l2_norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Ground-truth map from query index to its true candidate indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthMap {
    map: BTreeMap<usize, Vec<usize>>,
}

impl TruthMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: usize, candidate: usize) {
        self.map.entry(query).or_default().push(candidate);
    }

    pub fn get(&self, query: usize) -> Option<&[usize]> {
        self.map.get(&query).map(|v| v.as_slice())
    }

    pub fn queries(&self) -> impl Iterator<Item = (&usize, &Vec<usize>)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Identity map over `n` items (candidate i is true for query i).
    pub fn identity(n: usize) -> Self {
        let mut t = Self::new();
        for i in 0..n {
            t.insert(i, i);
        }
        t
    }

    /// Reads CSV `query_index,candidate_index` with an optional header.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut truth = Self::new();
        for (i, row) in csv.records().enumerate() {
            let row = row?;
            if i == 0 && row.get(0).map(|s| s.parse::<usize>().is_err()) == Some(true) {
                continue; // header line
            }
            let parse = |idx: usize, name: &str| -> Result<usize> {
                row.get(idx)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: i + 1,
                        field: name.into(),
                        message: "expected a non-negative integer".into(),
                    })
            };
            truth.insert(parse(0, "query_index")?, parse(1, "candidate_index")?);
        }
        Ok(truth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_preserves_values() {
        let m = EmbeddingMatrix::new(array![[1.0, 2.5e-17, -3.0], [0.25, -0.125, 9.0]]).unwrap();
        let mut buf = Vec::new();
        m.to_writer(&mut buf).unwrap();
        let back = EmbeddingMatrix::from_reader(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingMatrix::new(array![[f64::NAN]]).is_err());
        assert!(EmbeddingMatrix::new(array![[f64::INFINITY, 0.0]]).is_err());
    }

    #[test]
    fn normalized_constructor_enforces_unit_rows() {
        assert!(EmbeddingMatrix::new_normalized(array![[1.0, 0.0], [0.0, -1.0]]).is_ok());
        assert!(EmbeddingMatrix::new_normalized(array![[2.0, 0.0]]).is_err());
    }

    #[test]
    fn normalize_rows_rejects_zero_rows() {
        assert!(EmbeddingMatrix::normalize_rows(array![[0.0, 0.0]]).is_err());
        let m = EmbeddingMatrix::normalize_rows(array![[3.0, 4.0]]).unwrap();
        assert!((l2_norm(m.row(0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_errors_name_the_line() {
        let text = "2 3\n1,2,3\n4,5\n";
        let err = EmbeddingMatrix::from_reader(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn truth_map_from_csv() {
        let text = "query_index,candidate_index\n0,4\n0,5\n2,1\n";
        let t = TruthMap::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.get(0), Some(&[4usize, 5][..]));
        assert_eq!(t.get(2), Some(&[1usize][..]));
        assert_eq!(t.get(1), None);
    }
}
