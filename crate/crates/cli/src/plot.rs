//! Plot-data emission: a Figure-style overlay of the simulated curve
//! (with its standard-error band) and the three theory curves.
//!
//! Two formats: a self-contained SVG, and a whitespace-separated `.dat`
//! table that gnuplot can consume directly (`plot 'curves.dat' using 1:2
//! with lines`).  Line styles follow the usual convention: solid for the
//! simulation, dotted for no correction, dash-dotted for skewness, dashed
//! for skewness+kurtosis.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

use crate::config::CorrectionLevel;
use crate::csvio::{schema_header, CsvTable};
use crate::report::assert_matching_grids;

/// Output flavor of the `plotdata` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotFormat {
    /// Self-contained SVG overlay.
    Svg,
    /// Gnuplot-ready columns.
    Dat,
}

impl PlotFormat {
    /// Conventional file extension.
    pub fn extension(self) -> &'static str {
        match self {
            PlotFormat::Svg => "svg",
            PlotFormat::Dat => "dat",
        }
    }
}

struct Curves {
    v: Vec<f64>,
    sim: Option<(Vec<f64>, Vec<f64>)>,
    theories: Vec<(CorrectionLevel, Vec<f64>)>,
}

fn gather(sim: Option<&CsvTable>, theories: &[(CorrectionLevel, CsvTable)]) -> Result<Curves> {
    let mut v: Option<Vec<f64>> = None;
    let mut take_grid = |grid: Vec<f64>, what: &str| -> Result<()> {
        match &v {
            None => {
                v = Some(grid);
                Ok(())
            }
            Some(have) => assert_matching_grids(have, &grid)
                .with_context(|| format!("threshold grid of {what}")),
        }
    };
    let sim_cols = match sim {
        Some(table) => {
            take_grid(table.column_values("v")?, "the simulation table")?;
            Some((
                table.column_values("chi_mean")?,
                table.column_values("chi_se")?,
            ))
        }
        None => None,
    };
    let mut th = Vec::new();
    for (level, table) in theories {
        take_grid(table.column_values("v")?, level.label())?;
        th.push((*level, table.column_values("e_chi")?));
    }
    let Some(v) = v else {
        bail!("nothing to plot: no simulation table and no theory tables");
    };
    Ok(Curves {
        v,
        sim: sim_cols,
        theories: th,
    })
}

/// Renders the gnuplot-ready table.
///
/// # Errors
///
/// Missing columns, mismatched grids, or empty input.
pub fn render_dat(
    sim: Option<&CsvTable>,
    theories: &[(CorrectionLevel, CsvTable)],
) -> Result<String> {
    let curves = gather(sim, theories)?;
    let mut out = String::new();
    out.push_str(&schema_header());
    out.push('\n');
    let mut names = vec!["v".to_string()];
    if curves.sim.is_some() {
        names.push("chi_mean".into());
        names.push("chi_se".into());
    }
    for (level, _) in &curves.theories {
        names.push(format!("theory_{}", level.file_label()));
    }
    let _ = writeln!(out, "# columns: {}", names.join(" "));
    for (i, &v) in curves.v.iter().enumerate() {
        let _ = write!(out, "{v}");
        if let Some((mean, se)) = &curves.sim {
            let _ = write!(out, " {} {}", mean[i], se[i]);
        }
        for (_, th) in &curves.theories {
            let _ = write!(out, " {}", th[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 18.0;
const MARGIN_B: f64 = 44.0;

fn level_style(level: CorrectionLevel) -> (&'static str, &'static str) {
    match level {
        CorrectionLevel::Gaussian => ("#1f77b4", "2,4"),
        CorrectionLevel::Skewness => ("#d62728", "8,3,2,3"),
        CorrectionLevel::SkewnessKurtosis => ("#2ca02c", "8,4"),
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn polyline(frame: &Frame, v: &[f64], y: &[f64]) -> String {
    let pts: Vec<String> = v
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi.is_finite())
        .map(|(&vi, &yi)| format!("{:.2},{:.2}", frame.px(vi), frame.py(yi)))
        .collect();
    pts.join(" ")
}

/// Renders the SVG overlay.
///
/// # Errors
///
/// As for [`render_dat`].
pub fn render_svg(
    sim: Option<&CsvTable>,
    theories: &[(CorrectionLevel, CsvTable)],
) -> Result<String> {
    let curves = gather(sim, theories)?;
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    for &v in &curves.v {
        x_min = x_min.min(v);
        x_max = x_max.max(v);
    }
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut see = |y: f64| {
        if y.is_finite() {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    };
    if let Some((mean, se)) = &curves.sim {
        for (&m, &s) in mean.iter().zip(se) {
            see(m - 2.0 * s);
            see(m + 2.0 * s);
        }
    }
    for (_, th) in &curves.theories {
        for &y in th {
            see(y);
        }
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    // Degenerate ranges (single threshold, constant curve) still plot.
    if !(x_max > x_min) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if !(y_max > y_min) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let y_pad = 0.05 * (y_max - y_min);
    let frame = Frame {
        x_min,
        x_max,
        y_min: y_min - y_pad,
        y_max: y_max + y_pad,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(svg, "<!-- {} -->", schema_header().trim_start_matches("# "));
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Zero lines, when inside the frame.
    if frame.y_min < 0.0 && frame.y_max > 0.0 {
        let y = frame.py(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#cccccc"/>"##,
            frame.px(frame.x_min),
            frame.px(frame.x_max)
        );
    }
    if frame.x_min < 0.0 && frame.x_max > 0.0 {
        let x = frame.px(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#cccccc"/>"##,
            frame.py(frame.y_min),
            frame.py(frame.y_max)
        );
    }

    // Simulation band and mean.
    if let Some((mean, se)) = &curves.sim {
        if curves.v.len() >= 2 {
            let mut d = String::from("M");
            for (i, &v) in curves.v.iter().enumerate() {
                let _ = write!(
                    d,
                    " {:.2},{:.2}",
                    frame.px(v),
                    frame.py(mean[i] + 2.0 * se[i])
                );
            }
            for (i, &v) in curves.v.iter().enumerate().rev() {
                let _ = write!(
                    d,
                    " {:.2},{:.2}",
                    frame.px(v),
                    frame.py(mean[i] - 2.0 * se[i])
                );
            }
            d.push_str(" Z");
            let _ = writeln!(
                svg,
                r##"<path d="{d}" fill="#999999" fill-opacity="0.3" stroke="none"/>"##
            );
        }
        if curves.v.len() >= 2 {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
                polyline(&frame, &curves.v, mean)
            );
        } else {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
                frame.px(curves.v[0]),
                frame.py(mean[0])
            );
        }
    }

    // Theory curves.
    for (level, th) in &curves.theories {
        let (color, dash) = level_style(*level);
        if curves.v.len() >= 2 {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>"#,
                polyline(&frame, &curves.v, th)
            );
        } else if th[0].is_finite() {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.px(curves.v[0]),
                frame.py(th[0])
            );
        }
    }

    // Axes.
    let (x0, x1) = (frame.px(frame.x_min), frame.px(frame.x_max));
    let (y0, y1) = (frame.py(frame.y_min), frame.py(frame.y_max));
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x0:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
        y0 + 16.0,
        frame.x_min
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x1:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
        y0 + 16.0,
        frame.x_max
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{y0:.2}" text-anchor="end">{:.3}</text>"#,
        x0 - 6.0,
        frame.y_min
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{y1:.2}" text-anchor="end" dominant-baseline="hanging">{:.3}</text>"#,
        x0 - 6.0,
        frame.y_max
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">v</text>"#,
        0.5 * (x0 + x1),
        y0 + 34.0
    );

    // Legend.
    let mut ly = MARGIN_T + 12.0;
    let lx = MARGIN_L + 10.0;
    if curves.sim.is_some() {
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/><text x="{:.2}" y="{:.2}">simulation mean &#177; 2se</text>"#,
            ly - 4.0,
            lx + 28.0,
            ly - 4.0,
            lx + 34.0,
            ly
        );
        ly += 16.0;
    }
    for (level, _) in &curves.theories {
        let (color, dash) = level_style(*level);
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 4.0,
            lx + 28.0,
            ly - 4.0,
            lx + 34.0,
            ly,
            level.label()
        );
        ly += 16.0;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders in the requested format.
///
/// # Errors
///
/// As for the individual renderers.
pub fn render(
    format: PlotFormat,
    sim: Option<&CsvTable>,
    theories: &[(CorrectionLevel, CsvTable)],
) -> Result<String> {
    match format {
        PlotFormat::Svg => render_svg(sim, theories),
        PlotFormat::Dat => render_dat(sim, theories),
    }
}
