//! CSV tables, JSON metadata and optional SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Missing,
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Missing => String::new(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) if x.is_finite() => Some(*x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }
}

/// Collects the files written by one run.
pub struct Writer {
    dir: PathBuf,
    svg: bool,
    files: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl Writer {
    pub fn new(dir: &Path, svg: bool) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            svg,
            files: Vec::new(),
        })
    }

    pub fn svg_enabled(&self) -> bool {
        self.svg
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn record(&mut self, name: String) -> PathBuf {
        let path = self.dir.join(&name);
        self.files.push(name);
        path
    }

    pub fn csv(&mut self, stem: &str, table: &Table) -> CliResult<()> {
        let path = self.record(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(&table.columns)
            .map_err(|e| io_err(&path, e))?;
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    }

    pub fn json(&mut self, stem: &str, value: &Value) -> CliResult<()> {
        let path = self.record(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
    }

    pub fn line_plot(
        &mut self,
        stem: &str,
        table: &Table,
        x: &str,
        ys: &[&str],
        opts: PlotOptions,
    ) -> CliResult<()> {
        if !self.svg {
            return Ok(());
        }
        let svg = line_plot_svg(table, x, ys, &opts);
        let path = self.record(format!("{stem}.svg"));
        std::fs::write(&path, svg).map_err(|e| io_err(&path, e))
    }

    pub fn heatmap(&mut self, stem: &str, map: &Heatmap, title: &str) -> CliResult<()> {
        if !self.svg {
            return Ok(());
        }
        let svg = heatmap_svg(map, title);
        let path = self.record(format!("{stem}.svg"));
        std::fs::write(&path, svg).map_err(|e| io_err(&path, e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
];

fn transform(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        Some(v)
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi - lo > 0.0 {
        Some((lo, hi))
    } else {
        Some((lo - 0.5, hi + 0.5))
    }
}

fn tick_label(v: f64, log: bool) -> String {
    let x = if log { 10f64.powf(v) } else { v };
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-2) {
        format!("{x:.1e}")
    } else {
        format!("{x:.3}")
    }
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), opts: &PlotOptions) {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            tick_label(x0 + f * (x1 - x0), opts.log_x)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            tick_label(y0 + f * (y1 - y0), opts.log_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 18.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&opts.y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn line_plot_svg(table: &Table, x: &str, ys: &[&str], opts: &PlotOptions) -> String {
    let xs = table.column(x).unwrap_or_default();
    let series: Vec<(&str, Vec<Option<f64>>)> = ys
        .iter()
        .filter_map(|&name| table.column(name).map(|c| (name, c)))
        .collect();
    let pts = |col: &[Option<f64>]| -> Vec<Option<(f64, f64)>> {
        xs.iter()
            .zip(col)
            .map(|(a, b)| Some((transform((*a)?, opts.log_x)?, transform((*b)?, opts.log_y)?)))
            .collect()
    };
    let all: Vec<Vec<Option<(f64, f64)>>> = series.iter().map(|(_, c)| pts(c)).collect();
    let flat = || all.iter().flatten().flatten();
    let xr = range(flat().map(|p| p.0)).unwrap_or((0.0, 1.0));
    let yr = range(flat().map(|p| p.1)).unwrap_or((0.0, 1.0));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    axes(&mut out, xr, yr, opts);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let map = |(a, b): (f64, f64)| {
        (
            LEFT + (a - xr.0) / (xr.1 - xr.0) * pw,
            TOP + ph - (b - yr.0) / (yr.1 - yr.0) * ph,
        )
    };
    for (k, ((name, _), line)) in series.iter().zip(&all).enumerate() {
        let color = COLORS[k % COLORS.len()];
        // Missing points split the curve into separate segments.
        for segment in line.split(|p| p.is_none()) {
            if segment.is_empty() {
                continue;
            }
            let coords: Vec<String> = segment
                .iter()
                .flatten()
                .map(|&p| {
                    let (px, py) = map(p);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" font-size="11" fill="{color}" text-anchor="end">{}</text>"#,
            W - RIGHT - 6.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Values on a rectangular grid, `values[ix][iy]`.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
    pub x_label: String,
    pub y_label: String,
}

fn heatmap_svg(map: &Heatmap, title: &str) -> String {
    let xr = range(map.xs.iter().copied()).unwrap_or((0.0, 1.0));
    let yr = range(map.ys.iter().copied()).unwrap_or((0.0, 1.0));
    let vr = range(map.values.iter().flatten().flatten().copied()).unwrap_or((0.0, 1.0));
    let opts = PlotOptions {
        title: title.to_string(),
        x_label: map.x_label.clone(),
        y_label: map.y_label.clone(),
        ..Default::default()
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let cw = pw / map.xs.len().max(1) as f64;
    let ch = ph / map.ys.len().max(1) as f64;
    for (ix, col) in map.values.iter().enumerate() {
        for (iy, v) in col.iter().enumerate() {
            let fill = match v {
                Some(v) => {
                    let t = (v - vr.0) / (vr.1 - vr.0);
                    let r = (255.0 * t).round() as u8;
                    let b = (255.0 * (1.0 - t)).round() as u8;
                    format!("rgb({r},0,{b})")
                }
                None => "#dddddd".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                LEFT + ix as f64 * cw,
                TOP + ph - (iy + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    axes(&mut out, xr, yr, &opts);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 9.512_492_197_250_393, -2.5e-300, 6.02e23] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn missing_cells_render_empty() {
        assert_eq!(Cell::Missing.render(), "");
        assert_eq!(Cell::from(None).render(), "");
        assert_eq!(Cell::from(true).render(), "true");
    }

    #[test]
    fn svg_plots_are_well_formed() {
        let mut t = Table::new(&["x", "y", "z"]);
        for k in 0..10 {
            let x = k as f64;
            t.push(vec![
                x.into(),
                (x * x).into(),
                if k == 4 {
                    Cell::Missing
                } else {
                    (1.0 + x).into()
                },
            ]);
        }
        let svg = line_plot_svg(
            &t,
            "x",
            &["y", "z"],
            &PlotOptions {
                log_y: true,
                ..Default::default()
            },
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        // z is split by the missing point; y drops x = 0 on the log axis.
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
