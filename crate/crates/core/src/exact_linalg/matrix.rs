use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Integer>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Integer>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&v| Integer::from(v)).collect())
    }

    /// Builds a matrix from row slices; all rows must have the same length.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_i64(rows.len(), cols, &flat)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Integer::new(); n * n];
        for i in 0..n {
            entries[i * n + i] = Integer::from(1);
        }
        IntMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Integer] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &Integer {
        &self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Integer] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// The submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<IntMatrix> {
        if cols.is_empty() {
            return Err(Error::Dimension("empty column selection".into()));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::Dimension(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix::new(self.rows, cols.len(), entries)
    }

    /// The submatrix made of the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<IntMatrix> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::Dimension(format!(
                "row {bad} out of range for {} rows",
                self.rows
            )));
        }
        let entries = rows.iter().flat_map(|&r| self.row(r).iter().cloned()).collect();
        IntMatrix::new(rows.len(), self.cols, entries)
    }

    /// Entries as machine integers, when every entry fits.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(|e| e.to_i64()).collect()
    }

    pub fn max_abs(&self) -> Integer {
        self.entries.iter().map(|e| e.clone().abs()).max().unwrap_or_default()
    }

    /// Exact product `self * v` over the rationals.
    pub fn mul_rational(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Rational::new();
                for (a, x) in self.row(i).iter().zip(v) {
                    if *a != 0 {
                        acc += Rational::from(a * x);
                    }
                }
                acc
            })
            .collect())
    }
}

/// Text format: a `rows cols` header line, then one line of
/// space-separated decimal integers per row.
impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad dimension {t:?} in header")))
            })
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!("header must be \"rows cols\", got {header:?}")));
        };
        let mut entries = Vec::with_capacity(rows * cols);
        for (i, line) in lines.enumerate() {
            if i >= rows {
                return Err(Error::Parse(format!("more than {rows} data rows")));
            }
            let before = entries.len();
            for tok in line.split_whitespace() {
                let v = Integer::from_str(tok)
                    .map_err(|_| Error::Parse(format!("bad integer {tok:?} in row {}", i + 1)))?;
                entries.push(v);
            }
            if entries.len() - before != cols {
                return Err(Error::Parse(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    entries.len() - before
                )));
            }
        }
        if entries.len() != rows * cols {
            return Err(Error::Parse(format!(
                "expected {rows} data rows, got {}",
                entries.len() / cols.max(1)
            )));
        }
        IntMatrix::new(rows, cols, entries)
    }
}

struct JsonInteger<'a>(&'a Integer);

impl Serialize for JsonInteger<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct JsonRow<'a>(&'a [Integer]);

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for e in self.0 {
            seq.serialize_element(&JsonInteger(e))?;
        }
        seq.end()
    }
}

struct JsonRows<'a>(&'a IntMatrix);

impl Serialize for JsonRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows))?;
        for i in 0..self.0.rows {
            seq.serialize_element(&JsonRow(self.0.row(i)))?;
        }
        seq.end()
    }
}

/// Serialized as `{"rows", "cols", "entries": [[...], ...]}`; entries that
/// do not fit in an `i64` are written as decimal strings.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntMatrix", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &JsonRows(self))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_round_trip() {
        let m = IntMatrix::from_rows(&[[1, -2, 3], [40, 0, -6]]).unwrap();
        let text = m.to_string();
        assert_eq!(text, "2 3\n1 -2 3\n40 0 -6\n");
        assert_eq!(text.parse::<IntMatrix>().unwrap(), m);
    }

    #[test]
    fn parse_rejects_bad_shapes() {
        assert!("2 2\n1 2\n3\n".parse::<IntMatrix>().is_err());
        assert!("2 2\n1 2\n".parse::<IntMatrix>().is_err());
        assert!("1 2\n1 2\n3 4\n".parse::<IntMatrix>().is_err());
        assert!("2\n1 2\n".parse::<IntMatrix>().is_err());
        assert!("1 1\nx\n".parse::<IntMatrix>().is_err());
        assert!("0 3\n".parse::<IntMatrix>().is_err());
    }

    #[test]
    fn big_entries_parse_and_serialize_as_strings() {
        let m: IntMatrix = "1 2\n123456789012345678901234567890 -1\n".parse().unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"rows":1,"cols":2,"entries":[["123456789012345678901234567890",-1]]}"#
        );
    }

    #[test]
    fn select_columns_and_rows() {
        let m = IntMatrix::from_rows(&[[1, 2, 3], [4, 5, 6]]).unwrap();
        let c = m.select_columns(&[2, 0]).unwrap();
        assert_eq!(c, IntMatrix::from_rows(&[[3, 1], [6, 4]]).unwrap());
        let r = m.select_rows(&[1]).unwrap();
        assert_eq!(r, IntMatrix::from_rows(&[[4, 5, 6]]).unwrap());
        assert!(m.select_columns(&[3]).is_err());
        assert_eq!(m.transpose().transpose(), m);
    }
}
