//! CSV tables and SVG line plots for experiment output.
//!
//! Every table row ends with `seed,pool_id,version`. Floats are written with
//! Rust's shortest round-trip formatting, so equal inputs give equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::VERSION;

/// Columns appended to every table.
pub const STAMP_COLUMNS: [&str; 3] = ["seed", "pool_id", "version"];

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV bytes with the stamp columns appended to every row.
    pub fn to_csv(&self, seed: u64, pool_id: Option<u64>) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = self.columns.iter().map(String::as_str).chain(STAMP_COLUMNS).collect();
        let stamp = [seed.to_string(), pool_hex(pool_id), VERSION.to_string()];
        // Writing into a Vec cannot fail.
        w.write_record(&header).unwrap();
        for r in &self.rows {
            w.write_record(r.iter().chain(stamp.iter())).unwrap();
        }
        w.into_inner().unwrap()
    }
}

pub fn pool_hex(id: Option<u64>) -> String {
    id.map_or_else(|| "none".into(), |p| format!("{p:016x}"))
}

/// Shortest round-trip text for a float; `inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 150.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn hline(mut self, y: f64, label: &str) -> Self {
        self.hlines.push((y, label.into()));
        self
    }

    pub fn to_svg(&self) -> String {
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        for (y, _) in &self.hlines {
            y0 = y0.min(*y);
            y1 = y1.max(*y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let pw = W - PAD_L - PAD_R;
        let ph = H - PAD_T - PAD_B;
        let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| PAD_T + ph - (y - y0) / (y1 - y0) * ph;

        let mut o = String::new();
        let _ = writeln!(o, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(o, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, PAD_L + pw / 2.0, esc(&self.title));
        let _ = writeln!(o, r##"<rect x="{PAD_L}" y="{PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(o, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(xv), H - PAD_B + 16.0, tick(xv));
            let _ = writeln!(o, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, PAD_L - 6.0, sy(yv) + 4.0, tick(yv));
        }
        let _ = writeln!(o, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, PAD_L + pw / 2.0, H - 10.0, esc(&self.x_label));
        let _ = writeln!(
            o,
            r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
            PAD_T + ph / 2.0,
            esc(&self.y_label)
        );
        for (y, label) in &self.hlines {
            let _ = writeln!(
                o,
                r##"<line x1="{PAD_L}" x2="{0:.1}" y1="{1:.1}" y2="{1:.1}" stroke="#888" stroke-dasharray="2 3"/><text x="{2:.1}" y="{3:.1}" fill="#555">{4}</text>"##,
                PAD_L + pw,
                sy(*y),
                PAD_L + pw + 4.0,
                sy(*y) + 4.0,
                esc(label)
            );
        }
        for (k, s) in self.series.iter().enumerate() {
            let c = COLORS[k % COLORS.len()];
            let path: Vec<String> =
                s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(o, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5"{dash} points="{}"/>"#, path.join(" "));
            for p in &path {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(o, r#"<circle cx="{x}" cy="{y}" r="2" fill="{c}"/>"#);
            }
            let ly = PAD_T + 12.0 + 16.0 * k as f64;
            let _ = writeln!(
                o,
                r#"<line x1="{0}" x2="{1}" y1="{2}" y2="{2}" stroke="{c}" stroke-width="2"{dash}/><text x="{3}" y="{4}">{5}</text>"#,
                W - PAD_R + 10.0,
                W - PAD_R + 30.0,
                ly,
                W - PAD_R + 34.0,
                ly + 4.0,
                esc(&s.name)
            );
        }
        o.push_str("</svg>\n");
        o
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Writes `<dir>/<name>/results.csv` and `<dir>/<name>/plot.svg`.
pub fn write_experiment(dir: &Path, name: &str, csv: &[u8], svg: &str) -> io::Result<std::path::PathBuf> {
    let d = dir.join(name);
    fs::create_dir_all(&d)?;
    fs::write(d.join("results.csv"), csv)?;
    fs::write(d.join("plot.svg"), svg)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_stamps_and_quotes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let s = String::from_utf8(t.to_csv(7, Some(0xab))).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("a,b,seed,pool_id,version"));
        assert_eq!(lines.next().unwrap(), format!("1,\"x,y\",7,00000000000000ab,{VERSION}"));
    }

    #[test]
    fn num_formats() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(5.0), "5");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let p = Plot::new("t", "x", "y").with(Series::new("s<1>", vec![(0.0, 1.0), (1.0, 2.0)])).hline(1.5, "ref");
        let s = p.to_svg();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("s&lt;1&gt;"));
    }
}
