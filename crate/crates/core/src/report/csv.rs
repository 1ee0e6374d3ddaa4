use std::io::Write;

use super::{format_number, ReportError, Table};

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// CSV text for `table`: a header of column names, then one line per row,
/// every line ending in `\n`.
pub fn to_csv_string(table: &Table) -> String {
    let mut out = String::new();
    let header: Vec<String> = table.columns().iter().map(|c| escape(&c.name)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in table.rows() {
        let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes [`to_csv_string`] to `dest`; returns the byte count.
pub fn write_csv<W: Write>(table: &Table, dest: &mut W) -> Result<usize, ReportError> {
    let s = to_csv_string(table);
    dest.write_all(s.as_bytes())?;
    Ok(s.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let t = Table::new([("x", ""), ("y", "s")]);
        assert_eq!(to_csv_string(&t), "x,y\n");
    }

    #[test]
    fn single_value_is_two_lines() {
        let mut t = Table::new([("v", "")]);
        t.push_row(vec![1.0]).unwrap();
        let mut buf = Vec::new();
        let n = write_csv(&t, &mut buf).unwrap();
        assert_eq!(buf, b"v\n1\n");
        assert_eq!(n, 4);
    }

    #[test]
    fn round_trip_to_twelve_digits() {
        let mut t = Table::new([("a", ""), ("b", "")]);
        let vals = [std::f64::consts::PI, -1.0 / 7.0, 6.02214076e23, 1e-300, 0.1 + 0.2];
        for &v in &vals {
            t.push_row(vec![v, -v]).unwrap();
        }
        let s = to_csv_string(&t);
        for (line, &v) in s.lines().skip(1).zip(&vals) {
            let parsed: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((parsed[0] - v).abs() <= 5e-12 * v.abs());
            assert!((parsed[1] + v).abs() <= 5e-12 * v.abs());
        }
    }

    #[test]
    fn awkward_names_are_quoted() {
        let t = Table::new([("a,b", ""), ("say \"hi\"", "")]);
        assert_eq!(to_csv_string(&t), "\"a,b\",\"say \"\"hi\"\"\"\n");
    }
}
