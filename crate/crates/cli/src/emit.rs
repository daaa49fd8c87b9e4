//! Plot-data emission: weight rows, basis columns, dense spline
//! samples, and minimal SVG polyline charts.

use std::fs;
use std::path::{Path, PathBuf};

use splinecast::spline::interpolate_natural;
use splinecast::tournament::{AnalyzedFamily, TournamentResult};
use splinecast::SeriesData;

use crate::error::CliError;

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// One CSV per exponent with the winning level-n row: index, year, weight.
pub fn emit_weights(
    dir: &Path,
    results: &[TournamentResult],
    series: &SeriesData,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for result in results {
        let mut out = String::from("index,year,weight\n");
        for (i, w) in result.final_row.weights.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", series.year_of(i), fmt(*w)));
        }
        let path = dir.join(format!("weights_q{}.csv", result.q.label()));
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

/// Basis columns b_0..b_l of each family at one level, one CSV per
/// family, (l+1) x (l+1) values under a `b0..bl` header.
pub fn emit_basis(
    dir: &Path,
    families: &[AnalyzedFamily],
    level: usize,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for family in families {
        let pm = family.level(level);
        let basis = pm.basis();
        let header: Vec<String> = (0..=level).map(|j| format!("b{j}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for i in 0..=level {
            let row: Vec<String> = (0..=level).map(|j| fmt(basis[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let tag = family.id.map_or("canonical", |f| f.tag());
        let path = dir.join(format!("basis_{tag}_l{level}.csv"));
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

/// Dense samples (t, value) of the natural spline through the series.
pub fn emit_spline(
    path: &Path,
    series: &SeriesData,
    samples_per_interval: usize,
) -> Result<(), CliError> {
    let spline = interpolate_natural(series.values()).map_err(CliError::from)?;
    let n = series.n();
    let step = 1.0 / samples_per_interval.max(1) as f64;
    let mut out = String::from("t,value\n");
    for i in 0..n {
        for k in 0..samples_per_interval.max(1) {
            let t = i as f64 + k as f64 * step;
            let value = spline.evaluate(t).map_err(CliError::from)?;
            out.push_str(&format!("{},{}\n", fmt(t), fmt(value)));
        }
    }
    let value = spline.evaluate(n as f64).map_err(CliError::from)?;
    out.push_str(&format!("{n},{}\n", fmt(value)));
    write_file(path, &out)
}

/// A bare polyline chart; axes are implied by the bounding box.
fn polyline_svg(points: &[(f64, f64)], title: &str) -> String {
    const WIDTH: f64 = 800.0;
    const HEIGHT: f64 = 400.0;
    const MARGIN: f64 = 40.0;

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (x_max - x_min);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y_max - y_min);
    let mapped: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            format!(
                "{:.2},{:.2}",
                MARGIN + (x - x_min) * sx,
                HEIGHT - MARGIN - (y - y_min) * sy
            )
        })
        .collect();

    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<title>{title}</title>\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<line x1=\"{m}\" y1=\"{ybase}\" x2=\"{xend}\" y2=\"{ybase}\" stroke=\"#999\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybase}\" stroke=\"#999\"/>\n",
            "<text x=\"{m}\" y=\"20\" font-family=\"monospace\" font-size=\"12\">{title} ",
            "[{x0:.4}..{x1:.4}] x [{y0:.4}..{y1:.4}]</text>\n",
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{points}\"/>\n",
            "</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        m = MARGIN,
        ybase = HEIGHT - MARGIN,
        xend = WIDTH - MARGIN,
        title = title,
        x0 = x_min,
        x1 = x_max,
        y0 = y_min,
        y1 = y_max,
        points = mapped.join(" ")
    )
}

/// SVG charts of the data spline and of each winning weight row.
pub fn emit_svg(
    dir: &Path,
    results: &[TournamentResult],
    series: &SeriesData,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();

    let series_points: Vec<(f64, f64)> = series
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| (series.year_of(i) as f64, v))
        .collect();
    let path = dir.join("series.svg");
    write_file(&path, &polyline_svg(&series_points, "observed series"))?;
    written.push(path);

    for result in results {
        let points: Vec<(f64, f64)> = result
            .final_row
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as f64, w))
            .collect();
        let path = dir.join(format!("weights_q{}.svg", result.q.label()));
        write_file(&path, &polyline_svg(&points, &format!("weights q={}", result.q.label())))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_self_contained_and_scaled() {
        let points: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, (i * i) as f64)).collect();
        let svg = polyline_svg(&points, "test");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let svg = polyline_svg(&[(1.0, 2.0), (1.0, 2.0)], "flat");
        assert!(!svg.contains("NaN"));
    }
}
