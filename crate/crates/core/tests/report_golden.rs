use multiamdahl::report::{to_csv_string, write_svg_heatmap, write_svg_line, Table};
use sha2::{Digest, Sha256};

fn line_table() -> Table {
    let mut t = Table::new([("x", "BGP area"), ("fast", "BGP time"), ("slow", "BGP time")]);
    for k in 0..8 {
        let x = 1.0 + k as f64;
        t.push_row(vec![x, 1.0 / x, 1.0 / x.sqrt()]).unwrap();
    }
    t
}

fn heat_table() -> Table {
    let mut t = Table::new([("u", ""), ("v", ""), ("z", "")]);
    for i in 0..4 {
        for j in 0..3 {
            t.push_row(vec![i as f64, j as f64 * 0.5, (i * j) as f64]).unwrap();
        }
    }
    t
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn csv_text_is_stable() {
    let csv = to_csv_string(&line_table());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,fast,slow"));
    assert_eq!(lines.next(), Some("1,1,1"));
    assert_eq!(lines.next(), Some("2,0.5,0.707106781187"));
    assert_eq!(lines.nth(1), Some("4,0.25,0.5"));
}

#[test]
fn svg_output_matches_golden_digest() {
    let mut line = Vec::new();
    write_svg_line(&line_table(), "x", &["fast", "slow"], &mut line).unwrap();
    let mut heat = Vec::new();
    write_svg_heatmap(&heat_table(), "u", "v", "z", &mut heat).unwrap();
    // repeated rendering is byte-identical
    let mut again = Vec::new();
    write_svg_line(&line_table(), "x", &["fast", "slow"], &mut again).unwrap();
    assert_eq!(line, again);
    assert_eq!(digest(&line), LINE_DIGEST, "line chart changed");
    assert_eq!(digest(&heat), HEAT_DIGEST, "heat map changed");
}

const LINE_DIGEST: &str = "f1336e291c7bb8ff33f58cf03cf8069a4525d142298a998700df1dc6a0ba09ae";
const HEAT_DIGEST: &str = "eff4f2ab45dba62f4572ddd05a84960aaace16cc4dd2ab8b47a251973bcf13a0";
