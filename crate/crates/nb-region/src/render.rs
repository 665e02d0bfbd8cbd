//! Contour grids as CSV (`mu,p,stat` per valid point) or standalone SVG.
//!
//! The SVG puts `mu` on the horizontal axis and `P` on the vertical one, shades
//! the Poisson half-plane `P <= 0`, draws the `mu` axis as a reference line
//! and emits one closed `path` per boundary polyline, tagged with
//! `data-level`.

use std::fmt::Write as _;
use std::io::{self, Write};

use nb_region_core::ContourGrid;
use thiserror::Error;

use crate::format::sig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("EmptyGrid: no grid point lies in the statistic's domain")]
    EmptyGrid,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn render(grid: &ContourGrid, format: Format, marks: &[(f64, f64)], out: &mut (impl Write + ?Sized)) -> Result<(), RenderError> {
    if grid.valid_points() == 0 {
        return Err(RenderError::EmptyGrid);
    }
    match format {
        Format::Csv => render_csv(grid, out)?,
        Format::Svg => out.write_all(svg(grid, marks).as_bytes())?,
    }
    Ok(())
}

fn render_csv(grid: &ContourGrid, out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    w.write_all(b"mu,p,stat\n")?;
    for (idx, stat) in grid.stat.iter().enumerate() {
        if let Some(stat) = stat {
            let (mu, p) = grid.spec.point(idx);
            writeln!(w, "{},{},{}", sig(mu, 9), sig(p, 9), sig(*stat, 9))?;
        }
    }
    w.flush()
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

struct Frame {
    mu_min: f64,
    mu_max: f64,
    p_min: f64,
    p_max: f64,
}

impl Frame {
    fn x(&self, mu: f64) -> f64 {
        MARGIN + (mu - self.mu_min) / (self.mu_max - self.mu_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, p: f64) -> f64 {
        HEIGHT - MARGIN - (p - self.p_min) / (self.p_max - self.p_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn svg(grid: &ContourGrid, marks: &[(f64, f64)]) -> String {
    let spec = &grid.spec;
    let f = Frame { mu_min: spec.mu_min, mu_max: spec.mu_max, p_min: spec.p_min, p_max: spec.p_max };
    let (left, right) = (f.x(spec.mu_min), f.x(spec.mu_max));
    let (top, bottom) = (f.y(spec.p_max), f.y(spec.p_min));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);

    if spec.p_min < 0.0 {
        let zero = f.y(0.0_f64.min(spec.p_max));
        let _ = writeln!(
            s,
            r##"<rect class="poisson-region" x="{}" y="{}" width="{}" height="{}" fill="#dde6f3"/>"##,
            px(left),
            px(zero),
            px(right - left),
            px(bottom - zero)
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" fill="#4a6790">Poisson (P &lt;= 0)</text>"##,
            px(left + 6.0),
            px(bottom - 6.0)
        );
    }
    if spec.p_min <= 0.0 && spec.p_max >= 0.0 {
        let zero = f.y(0.0);
        let _ = writeln!(
            s,
            r##"<line class="mu-axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-dasharray="4 3"/>"##,
            px(left),
            px(zero),
            px(right),
            px(zero)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
        px(left),
        px(top),
        px(right - left),
        px(bottom - top)
    );

    // corner ticks
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(left), px(bottom + 18.0), sig(spec.mu_min, 4));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(right), px(bottom + 18.0), sig(spec.mu_max, 4));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px(left - 6.0), px(bottom + 4.0), sig(spec.p_min, 4));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, px(left - 6.0), px(top + 4.0), sig(spec.p_max, 4));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">mu</text>"#, px((left + right) / 2.0), px(HEIGHT - 20.0));
    let _ = writeln!(s, r#"<text x="20" y="{}" text-anchor="middle">P</text>"#, px((top + bottom) / 2.0));

    for (k, level) in grid.levels.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let label = sig(level.level.value(), 6);
        for line in &level.boundaries {
            let mut d = String::new();
            for (i, &(mu, p)) in line.points.iter().enumerate() {
                let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, px(f.x(mu)), px(f.y(p)));
            }
            d.push('Z');
            let _ = writeln!(
                s,
                r#"<path class="contour" data-level="{label}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{}" y="{}" fill="{color}">{}%</text>"#,
            px(right - 50.0),
            px(top + 16.0 + 16.0 * k as f64),
            sig(100.0 * level.level.value(), 6)
        );
    }

    for &(mu, p) in marks {
        if (spec.mu_min..=spec.mu_max).contains(&mu) && (spec.p_min..=spec.p_max).contains(&p) {
            let _ = writeln!(
                s,
                r##"<circle class="mark" cx="{}" cy="{}" r="3" fill="#000000"/>"##,
                px(f.x(mu)),
                px(f.y(p))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
