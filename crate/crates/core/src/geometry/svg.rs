//! SVG 1.1 rendering of a window of the decorated tiling in half-plane
//! coordinates. Geodesic edges between points at equal height are
//! Euclidean semicircles centered on the real axis; they are flattened to
//! polylines whose sagitta stays below the requested screen tolerance.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;

use super::tile::{pow2f, tile_region, TileAddress};
use crate::error::{Error, Result};
use crate::symbolic::Model;

const PALETTE: [&str; 8] = [
    "#f4d35e", "#0d3b66", "#ee964b", "#5fa8d3", "#f95738", "#8cb369", "#9b5de5", "#e0e0e0",
];

/// Tiles rendered at most.
pub const RENDER_TILE_LIMIT: u64 = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOptions {
    /// Inclusive tiling rows.
    pub rows: (i64, i64),
    /// Horizontal window `[x0, x1)` in half-plane units.
    pub x_range: (f64, f64),
    /// Vertical clip band.
    pub y_clip: (f64, f64),
    pub width_px: f64,
    /// Patch levels whose boundaries are overlaid.
    pub overlays: Vec<usize>,
    /// Maximal screen distance between a drawn edge and the true geodesic.
    pub tolerance: f64,
    /// Optional polylines (e.g. decimated diffusion paths) in half-plane coordinates.
    pub traces: Vec<Vec<(f64, f64)>>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            rows: (0, 2),
            x_range: (0.0, 4.0),
            y_clip: (0.0, f64::INFINITY),
            width_px: 800.0,
            overlays: Vec::new(),
            tolerance: 1e-3,
            traces: Vec::new(),
        }
    }
}

struct Screen {
    x0: f64,
    y_top: f64,
    scale: f64,
}

impl Screen {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y_top - y) * self.scale)
    }
}

/// World-coordinate points along the geodesic from `p` to `q` (both at the
/// same height), excluding `p`, including `q`.
pub fn geodesic_polyline(p: (f64, f64), q: (f64, f64), scale: f64, tolerance: f64) -> Vec<(f64, f64)> {
    if (p.0 - q.0).abs() < f64::EPSILON * p.0.abs().max(1.0) || (p.1 - q.1).abs() > 1e-12 * p.1.max(q.1) {
        // vertical geodesic (or degenerate): a straight segment is exact
        return vec![q];
    }
    let y = p.1;
    let c = 0.5 * (p.0 + q.0);
    let radius = ((0.5 * (q.0 - p.0)).powi(2) + y * y).sqrt();
    let t0 = y.atan2(p.0 - c);
    let t1 = y.atan2(q.0 - c);
    let r_screen = radius * scale;
    let n = if tolerance >= r_screen {
        1
    } else {
        let max_step = 2.0 * (1.0 - tolerance / r_screen).acos();
        (((t1 - t0).abs() / max_step).ceil() as usize).max(1)
    };
    (1..=n)
        .map(|k| {
            if k == n {
                return q;
            }
            let t = t0 + (t1 - t0) * k as f64 / n as f64;
            (c + radius * t.cos(), radius * t.sin())
        })
        .collect()
}

fn tile_outline(t: &TileAddress, screen: &Screen, tol: f64) -> Vec<(f64, f64)> {
    let v: Vec<(f64, f64)> = tile_region(t).iter().map(|p| (p.x.to_f64(), p.y.to_f64())).collect();
    let mut pts = vec![v[0]];
    for k in 0..5 {
        let (a, b) = (v[k], v[(k + 1) % 5]);
        pts.extend(geodesic_polyline(a, b, screen.scale, tol));
    }
    pts.pop(); // closing point repeats A_1
    pts
}

fn path_data(pts: &[(f64, f64)], screen: &Screen, close: bool) -> String {
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (sx, sy) = screen.map(x, y);
        let _ = write!(d, "{}{:.4},{:.4} ", if i == 0 { "M" } else { "L" }, sx, sy);
    }
    if close {
        d.push('Z');
    }
    d.trim_end().to_string()
}

fn visible_rows(opts: &RenderOptions) -> Vec<i64> {
    (opts.rows.0..=opts.rows.1)
        .filter(|&k| {
            let (lo, hi) = (pow2f(k), pow2f(k + 1));
            hi > opts.y_clip.0 && lo < opts.y_clip.1
        })
        .collect()
}

/// Renders the window; `model = None` draws the undecorated tiling.
pub fn render_svg(model: Option<&Model>, opts: &RenderOptions) -> Result<String> {
    let (x0, x1) = opts.x_range;
    if !(x0.is_finite() && x1.is_finite()) || opts.width_px <= 0.0 || opts.tolerance <= 0.0 {
        return Err(Error::domain(
            "render window must be finite with positive width and tolerance",
        ));
    }
    let rows = visible_rows(opts);
    if rows.is_empty() || x1 <= x0 {
        return Ok(concat!(
            r#"<?xml version="1.0" encoding="UTF-8"?>"#,
            "\n",
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="0" height="0"></svg>"#,
            "\n"
        )
        .to_string());
    }
    let y_bottom = pow2f(rows[0]).max(opts.y_clip.0);
    let y_top = pow2f(rows[rows.len() - 1] + 1).min(opts.y_clip.1);
    let scale = opts.width_px / (x1 - x0);
    let screen = Screen { x0, y_top, scale };
    let height = (y_top - y_bottom) * scale;

    let mut tiles: u64 = 0;
    for &k in &rows {
        let w = pow2f(k);
        tiles += ((x1 / w).ceil() - (x0 / w).floor()).max(0.0) as u64;
    }
    if tiles > RENDER_TILE_LIMIT {
        return Err(Error::Budget {
            what: "rendered tiles",
            needed: tiles.to_string(),
            limit: RENDER_TILE_LIMIT,
        });
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.2}" height="{:.2}" viewBox="0 0 {:.4} {:.4}">"#,
        opts.width_px, height, opts.width_px, height
    );
    let _ = writeln!(out, r##"<g id="tiles" stroke="#222" stroke-width="0.5">"##);
    for &k in &rows {
        let w = pow2f(k);
        let c0 = (x0 / w).floor() as i64;
        let c1 = (x1 / w).ceil() as i64;
        let fill = match model {
            Some(m) => PALETTE[m.letter(k)?.index() % PALETTE.len()],
            None => "none",
        };
        for c in c0..c1 {
            let t = TileAddress::new(k, c);
            let d = path_data(&tile_outline(&t, &screen, opts.tolerance), &screen, true);
            let _ = writeln!(
                out,
                r#"<path class="tile" data-row="{k}" data-col="{c}" fill="{fill}" d="{d}"/>"#
            );
        }
    }
    let _ = writeln!(out, "</g>");

    if let Some(m) = model {
        for &q in &opts.overlays {
            let len = m.level_len_u64(q)? as i64;
            let _ = writeln!(
                out,
                r##"<g class="overlay" data-level="{q}" fill="none" stroke="#c00" stroke-width="2">"##
            );
            let (r0, r1) = (rows[0], rows[rows.len() - 1]);
            let mut block = r0.div_euclid(len);
            while block * len <= r1 {
                let apex_row = (block + 1) * len - 1;
                let base_row = block * len;
                let w = pow2f(apex_row);
                let c0 = (x0 / w).floor() as i64;
                let c1 = (x1 / w).ceil() as i64;
                for c in c0..c1 {
                    let apex = TileAddress::new(apex_row, BigInt::from(c));
                    let v = tile_region(&apex);
                    let (top_r, top_l) = ((v[3].x.to_f64(), v[3].y.to_f64()), (v[4].x.to_f64(), v[4].y.to_f64()));
                    let bottom = pow2f(base_row);
                    let mut pts = vec![(top_l.0, bottom), top_l];
                    pts.extend(geodesic_polyline(top_l, top_r, scale, opts.tolerance));
                    pts.push((top_r.0, bottom));
                    let _ = writeln!(out, r#"<path d="{}"/>"#, path_data(&pts, &screen, false));
                }
                block += 1;
            }
            let _ = writeln!(out, "</g>");
        }
    }

    for trace in &opts.traces {
        if trace.len() >= 2 {
            let _ = writeln!(
                out,
                r##"<path class="trace" fill="none" stroke="#000" stroke-width="1" d="{}"/>"##,
                path_data(trace, &screen, false)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg(path: &Path, model: Option<&Model>, opts: &RenderOptions) -> Result<()> {
    let doc = render_svg(model, opts)?;
    std::fs::write(path, doc)?;
    Ok(())
}

/// Screen coordinates of the `M`/`L` vertices of every `path` element's `d`
/// attribute; used by tests and by callers that post-process the output.
pub fn parse_path_points(d: &str) -> Vec<(f64, f64)> {
    d.split_whitespace()
        .filter_map(|tok| {
            let tok = tok.trim_start_matches(['M', 'L']).trim_end_matches('Z');
            let (a, b) = tok.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect()
}
