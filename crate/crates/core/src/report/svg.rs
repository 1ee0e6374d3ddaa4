//! Minimal SVG plots on a fixed 800x600 canvas.

use std::fmt::Write as _;
use std::io::Write;

use super::{format_sig, ReportError, Table};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

const LINE_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Heatmap colour stops, low to high; colours are interpolated linearly in
/// RGB between neighbouring stops.
pub const HEATMAP_RAMP: [(u8, u8, u8); 8] = [
    (0x44, 0x01, 0x54),
    (0x46, 0x32, 0x7e),
    (0x36, 0x5c, 0x8d),
    (0x27, 0x7f, 0x8e),
    (0x1f, 0xa1, 0x87),
    (0x4a, 0xc1, 0x6d),
    (0xa0, 0xda, 0x39),
    (0xfd, 0xe7, 0x25),
];

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (HEATMAP_RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(HEATMAP_RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (HEATMAP_RAMP[i], HEATMAP_RAMP[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn coord(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn range(name: &str, values: impl Iterator<Item = f64>) -> Result<(f64, f64), ReportError> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Err(ReportError::DegenerateRange(name.to_string()));
    }
    Ok((lo, hi))
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
}

/// Axis lines, tick labels at evenly spaced positions and axis titles.
/// `x_ticks`/`y_ticks` map a tick fraction in `[0, 1]` to its label.
fn axes(out: &mut String, x_label: &str, y_label: &str, x_tick: impl Fn(f64) -> f64, y_tick: impl Fn(f64) -> f64) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        "<polyline points=\"{},{} {},{} {},{}\" fill=\"none\" stroke=\"#000000\"/>",
        coord(x0),
        coord(y1),
        coord(x0),
        coord(y0),
        coord(x1),
        coord(y0)
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let x = x0 + f * (x1 - x0);
        let y = y0 + f * (y1 - y0);
        let _ = writeln!(
            out,
            "<polyline points=\"{},{} {},{}\" stroke=\"#000000\"/>",
            coord(x),
            coord(y0),
            coord(x),
            coord(y0 + 5.0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            coord(x),
            coord(y0 + 20.0),
            format_sig(x_tick(f), 4)
        );
        let _ = writeln!(
            out,
            "<polyline points=\"{},{} {},{}\" stroke=\"#000000\"/>",
            coord(x0 - 5.0),
            coord(y),
            coord(x0),
            coord(y)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            coord(x0 - 8.0),
            coord(y + 4.0),
            format_sig(y_tick(f), 4)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        coord((x0 + x1) / 2.0),
        coord(HEIGHT - 20.0),
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>",
        coord((y0 + y1) / 2.0),
        coord((y0 + y1) / 2.0),
        escape(y_label)
    );
}

fn finish<W: Write>(mut out: String, dest: &mut W) -> Result<usize, ReportError> {
    out.push_str("</svg>\n");
    dest.write_all(out.as_bytes())?;
    Ok(out.len())
}

/// One polyline per `y_cols` entry against `x_col`, with a legend. Axis
/// ranges are the data min/max.
pub fn write_svg_line<W: Write>(
    table: &Table,
    x_col: &str,
    y_cols: &[&str],
    dest: &mut W,
) -> Result<usize, ReportError> {
    let xi = table.column_index(x_col)?;
    let yi: Vec<usize> = y_cols.iter().map(|c| table.column_index(c)).collect::<Result<_, _>>()?;
    if table.rows().len() < 2 {
        return Err(ReportError::TooFewRows(table.rows().len()));
    }
    if yi.is_empty() {
        return Err(ReportError::MissingColumn("(no y columns)".into()));
    }
    let rows = table.rows();
    let frame = Frame {
        x: range(x_col, rows.iter().map(|r| r[xi]))?,
        y: range(
            &y_cols.join(","),
            rows.iter().flat_map(|r| yi.iter().map(move |&i| r[i])),
        )?,
    };
    let mut out = String::new();
    header(&mut out);
    let y_label = if yi.len() == 1 {
        table.columns()[yi[0]].label()
    } else {
        let unit = &table.columns()[yi[0]].unit;
        if unit.is_empty() {
            "value".to_string()
        } else {
            format!("value ({unit})")
        }
    };
    let (xr, yr) = (frame.x, frame.y);
    axes(
        &mut out,
        &table.columns()[xi].label(),
        &y_label,
        |f| xr.0 + f * (xr.1 - xr.0),
        |f| yr.0 + f * (yr.1 - yr.0),
    );
    for (k, &c) in yi.iter().enumerate() {
        let color = LINE_COLORS[k % LINE_COLORS.len()];
        let pts: Vec<String> = rows
            .iter()
            .map(|r| format!("{},{}", coord(frame.px(r[xi])), coord(frame.py(r[c]))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            "<polyline points=\"{},{} {},{}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            coord(lx),
            coord(ly),
            coord(lx + 20.0),
            coord(ly)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            coord(lx + 25.0),
            coord(ly + 4.0),
            escape(&table.columns()[c].name)
        );
    }
    finish(out, dest)
}

/// Cells of `z_col` on the grid of distinct `x_col` and `y_col` values, one
/// `rect` per row, with a colour bar. Cells are equally sized per distinct
/// value, so log-spaced sweeps plot on a log axis.
pub fn write_svg_heatmap<W: Write>(
    table: &Table,
    x_col: &str,
    y_col: &str,
    z_col: &str,
    dest: &mut W,
) -> Result<usize, ReportError> {
    let (xi, yi, zi) = (
        table.column_index(x_col)?,
        table.column_index(y_col)?,
        table.column_index(z_col)?,
    );
    let rows = table.rows();
    if rows.len() < 2 {
        return Err(ReportError::TooFewRows(rows.len()));
    }
    let distinct = |i: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (xs, ys) = (distinct(xi), distinct(yi));
    if xs.len() < 2 {
        return Err(ReportError::DegenerateRange(x_col.to_string()));
    }
    if ys.len() < 2 {
        return Err(ReportError::DegenerateRange(y_col.to_string()));
    }
    let (z0, z1) = range(z_col, rows.iter().map(|r| r[zi]))?;

    let mut out = String::new();
    header(&mut out);
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let (cw, ch) = (w / xs.len() as f64, h / ys.len() as f64);
    for r in rows {
        let ix = xs.binary_search_by(|v| v.total_cmp(&r[xi])).expect("value present");
        let iy = ys.binary_search_by(|v| v.total_cmp(&r[yi])).expect("value present");
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            coord(LEFT + ix as f64 * cw),
            coord(HEIGHT - BOTTOM - (iy + 1) as f64 * ch),
            coord(cw),
            coord(ch),
            ramp((r[zi] - z0) / (z1 - z0))
        );
    }
    // ticks sit at cell centres of evenly spaced indices
    let pick = |vals: &[f64], f: f64| vals[((vals.len() - 1) as f64 * f).round() as usize];
    axes(
        &mut out,
        &table.columns()[xi].label(),
        &table.columns()[yi].label(),
        |f| pick(&xs, f),
        |f| pick(&ys, f),
    );
    let bx = WIDTH - RIGHT + 30.0;
    let steps = 40;
    for k in 0..steps {
        let f = k as f64 / (steps - 1) as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"20\" height=\"{}\" fill=\"{}\"/>",
            coord(bx),
            coord(HEIGHT - BOTTOM - (k + 1) as f64 * h / steps as f64),
            coord(h / steps as f64),
            ramp(f)
        );
    }
    for (f, anchor) in [(0.0, HEIGHT - BOTTOM), (1.0, TOP)] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            coord(bx + 25.0),
            coord(anchor + 4.0),
            format_sig(z0 + f * (z1 - z0), 4)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\">{}</text>",
        coord(bx - 10.0),
        coord(TOP - 10.0),
        escape(&table.columns()[zi].label())
    );
    finish(out, dest)
}
