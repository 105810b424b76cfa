//! Plain CSV series: a header row, then one row per sample with every float
//! written in round-trippable scientific notation.

use crate::error::{Error, Result};

/// Columns of equal length, written row by row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Builds a series from named columns. All columns must have the same length.
    pub fn from_columns(columns: &[(&str, &[f64])]) -> Result<Self> {
        let len = columns.first().map(|c| c.1.len()).unwrap_or(0);
        if columns.iter().any(|c| c.1.len() != len) {
            return Err(Error::Dimension("series columns differ in length".into()));
        }
        let mut s = Self::new(columns.iter().map(|c| c.0));
        for r in 0..len {
            s.rows.push(columns.iter().map(|c| c.1[r]).collect());
        }
        Ok(s)
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Dimension(format!("row of {} values for {} columns", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV text. NaN anywhere is an error: it means the solver produced
    /// garbage, and a file full of it would look like data.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = self.header.iter().map(|h| quote_field(h)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::NonFinite { column: self.header[c].clone(), row: r });
                }
                if c > 0 {
                    out.push(',');
                }
                out.push_str(&format_float(v));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// 17 significant digits, enough to read back the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn quote_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let s = Series::new(["t", "purity"]);
        assert_eq!(s.to_csv().unwrap(), "t,purity\n");
    }

    #[test]
    fn floats_round_trip() {
        let v = [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE];
        let s = Series::from_columns(&[("v", &v)]).unwrap();
        let text = s.to_csv().unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, v);
    }

    #[test]
    fn nan_is_rejected() {
        let s = Series::from_columns(&[("t", &[0.0, 1.0]), ("purity", &[1.0, f64::NAN])]).unwrap();
        assert_eq!(s.to_csv(), Err(Error::NonFinite { column: "purity".into(), row: 1 }));
    }

    #[test]
    fn awkward_headers_are_quoted() {
        assert_eq!(quote_field("a,b"), "\"a,b\"");
        assert_eq!(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(quote_field("plain"), "plain");
    }

    #[test]
    fn ragged_rows_are_refused() {
        let mut s = Series::new(["a", "b"]);
        assert!(s.push(vec![1.0]).is_err());
        assert!(Series::from_columns(&[("a", &[1.0]), ("b", &[])]).is_err());
    }
}
