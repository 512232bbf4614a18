//! Tables, plots and manifests written by the experiment runner.

use std::fmt::Write as _;
use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)`.
pub fn format_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::experiments::output::Cell::from($x)),*]
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Linear,
    Log10,
}

/// Line plot of columns of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub file: String,
    pub table: String,
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub x_axis: Axis,
    pub y_axis: Axis,
}

impl PlotSpec {
    pub fn new(file: &str, table: &str, title: &str, x: &str, ys: &[&str], x_axis: Axis, y_axis: Axis) -> Self {
        PlotSpec {
            file: file.into(),
            table: table.into(),
            title: title.into(),
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            x_axis,
            y_axis,
        }
    }
}

fn transform(v: f64, a: Axis) -> Option<f64> {
    match a {
        Axis::Linear => v.is_finite().then_some(v),
        Axis::Log10 => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn axis_label(name: &str, a: Axis) -> String {
    match a {
        Axis::Linear => name.to_string(),
        Axis::Log10 => format!("log10 {name}"),
    }
}

const COLORS: [RGBColor; 4] = [BLUE, RED, GREEN, MAGENTA];

/// Renders `spec` to SVG. Returns `Ok(false)` with no file written when the
/// table has no plottable points.
pub fn render_plot(spec: &PlotSpec, table: &Table, path: &Path) -> Result<bool> {
    let xi = table.column(&spec.x).ok_or_else(|| Error::Config(format!("plot column `{}` missing", spec.x)))?;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for y in &spec.ys {
        let yi = table.column(y).ok_or_else(|| Error::Config(format!("plot column `{y}` missing")))?;
        let pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter_map(|r| {
                let x = transform(r[xi].as_f64()?, spec.x_axis)?;
                let y = transform(r[yi].as_f64()?, spec.y_axis)?;
                Some((x, y))
            })
            .collect();
        series.push((y.clone(), pts));
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    if all.is_empty() {
        return Ok(false);
    }
    let pad = |lo: f64, hi: f64| if hi > lo { (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)) } else { (lo - 0.5, hi + 0.5) };
    let (x0, x1) = pad(all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min), all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = pad(all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min), all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));
    let draw = || -> std::result::Result<(), Box<dyn std::error::Error>> {
        let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&spec.title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1, y0..y1)?;
        chart
            .configure_mesh()
            .x_desc(axis_label(&spec.x, spec.x_axis))
            .y_desc(if spec.ys.len() == 1 { axis_label(&spec.ys[0], spec.y_axis) } else { axis_label("value", spec.y_axis) })
            .draw()?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))?
                .label(name.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            chart.draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))?;
        }
        if series.len() > 1 {
            chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
        }
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(true)
}

/// Everything a runner produces, before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub plots: Vec<PlotSpec>,
    pub warnings: Vec<String>,
}

impl Outputs {
    pub fn put<T: Serialize>(&mut self, key: &str, value: T) {
        self.summary.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub jobs: usize,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes tables, summary and plots; returns the written file names
/// (sorted) and any plot warnings.
pub fn write_outputs(out: &Outputs, dir: &Path) -> Result<(Vec<String>, Vec<String>)> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for t in &out.tables {
        std::fs::write(dir.join(t.file_name()), t.to_csv())?;
        files.push(t.file_name());
    }
    let mut summary = serde_json::to_string_pretty(&serde_json::Value::Object(out.summary.clone()))
        .map_err(|e| Error::Io(e.to_string()))?;
    summary.push('\n');
    std::fs::write(dir.join(SUMMARY_FILE), summary)?;
    files.push(SUMMARY_FILE.into());
    for p in &out.plots {
        let Some(table) = out.tables.iter().find(|t| t.name == p.table) else {
            warnings.push(format!("plot {}: table {} not produced", p.file, p.table));
            continue;
        };
        let path = dir.join(&p.file);
        if table.rows.is_empty() {
            warnings.push(format!("plot {}: table {} is empty, skipped", p.file, p.table));
            continue;
        }
        if !render_plot(p, table, &path)? {
            let _ = std::fs::remove_file(&path);
            warnings.push(format!("plot {}: table {} has no points on this axis scale, skipped", p.file, p.table));
            continue;
        }
        files.push(p.file.clone());
    }
    files.sort();
    Ok((files, warnings))
}

pub fn write_manifest(manifest: &RunManifest, dir: &Path) -> Result<()> {
    let mut s = String::new();
    let body = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.to_string()))?;
    let _ = writeln!(s, "{body}");
    std::fs::write(dir.join(MANIFEST_FILE), s)?;
    Ok(())
}
