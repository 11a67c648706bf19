use crate::report::Row;
use anyhow::{anyhow, Result};
use plotters::prelude::*;
use std::path::Path;

/// A static figure drawn from table rows: measured values as markers,
/// expected values (where present) as a line.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub file: &'static str,
    pub title: &'static str,
    pub x_label: &'static str,
    pub y_label: &'static str,
    /// Every series whose name starts with this is drawn.
    pub prefix: &'static str,
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    Some((lo - pad, hi + pad))
}

pub fn render(spec: &PlotSpec, rows: &[Row], path: &Path) -> Result<()> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows.iter().filter(|r| r.series.starts_with(spec.prefix)) {
        if !names.contains(&r.series.as_str()) {
            names.push(&r.series);
        }
    }
    let picked: Vec<Vec<&Row>> = names
        .iter()
        .map(|s| rows.iter().filter(|r| r.series == *s).collect())
        .collect();
    let all = || picked.iter().flatten();
    let xr = bounds(all().map(|r| r.param)).ok_or_else(|| anyhow!("no data for {}", spec.file))?;
    let yr = bounds(all().flat_map(|r| [Some(r.measured), r.expected]).flatten())
        .ok_or_else(|| anyhow!("no data for {}", spec.file))?;

    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| anyhow!("{e}"))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(spec.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)
        .map_err(|e| anyhow!("{e}"))?;
    chart
        .configure_mesh()
        .x_desc(spec.x_label)
        .y_desc(spec.y_label)
        .draw()
        .map_err(|e| anyhow!("{e}"))?;
    for (i, (name, pts)) in names.iter().zip(&picked).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut expected: Vec<(f64, f64)> = pts.iter().filter_map(|r| r.expected.map(|e| (r.param, e))).collect();
        expected.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !expected.is_empty() {
            chart
                .draw_series(LineSeries::new(expected, color.stroke_width(1)))
                .map_err(|e| anyhow!("{e}"))?;
        }
        chart
            .draw_series(pts.iter().map(|r| Circle::new((r.param, r.measured), 3, color.filled())))
            .map_err(|e| anyhow!("{e}"))?
            .label(name.to_string())
            .legend(move |(x, y)| Circle::new((x, y), 3, color.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| anyhow!("{e}"))?;
    root.present().map_err(|e| anyhow!("{e}"))?;
    Ok(())
}
