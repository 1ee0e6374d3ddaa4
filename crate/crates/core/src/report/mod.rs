//! Deterministic CSV and SVG output for sweep tables.

mod csv;
mod svg;

use thiserror::Error;

pub use self::csv::{to_csv_string, write_csv};
pub use self::svg::{write_svg_heatmap, write_svg_line, HEATMAP_RAMP};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no column named `{0}`")]
    MissingColumn(String),
    #[error("degenerate range for `{0}`: all values are equal")]
    DegenerateRange(String),
    #[error("a plot needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("row has {got} values but the table has {expected} columns")]
    RowLength { expected: usize, got: usize },
    #[error("non-finite value {value} in column `{column}`")]
    NonFinite { column: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    /// `name (unit)`, or just the name when the unit is empty.
    pub fn label(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{} ({})", self.name, self.unit)
        }
    }
}

/// A rectangular table of finite numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<N: Into<String>, U: Into<String>>(columns: impl IntoIterator<Item = (N, U)>) -> Self {
        Self {
            columns: columns
                .into_iter()
                .map(|(n, u)| Column {
                    name: n.into(),
                    unit: u.into(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<(), ReportError> {
        if row.len() != self.columns.len() {
            return Err(ReportError::RowLength {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        if let Some((c, v)) = self.columns.iter().zip(&row).find(|(_, v)| !v.is_finite()) {
            return Err(ReportError::NonFinite {
                column: c.name.clone(),
                value: *v,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Result<usize, ReportError> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| ReportError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, ReportError> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Formats `v` with 12 significant digits in the shortest of fixed or
/// exponent notation (like C's `%.12g`), without trailing zeros. `-0` prints
/// as `0`.
pub fn format_number(v: f64) -> String {
    format_sig(v, 12)
}

pub(crate) fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456789012.0), "123456789012");
        assert_eq!(format_number(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_number(1.5e-7), "1.5e-07");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(-2.5), "-2.5");
        // rounding that carries into the next decade
        assert_eq!(format_number(9.9999999999999), "10");
    }

    #[test]
    fn table_validation() {
        let mut t = Table::new([("a", ""), ("b", "s")]);
        assert!(t.push_row(vec![1.0]).is_err());
        assert!(t.push_row(vec![1.0, f64::NAN]).is_err());
        t.push_row(vec![1.0, 2.0]).unwrap();
        assert_eq!(t.column("b").unwrap(), vec![2.0]);
        assert!(matches!(t.column("c"), Err(ReportError::MissingColumn(_))));
        assert_eq!(t.columns()[1].label(), "b (s)");
    }
}
