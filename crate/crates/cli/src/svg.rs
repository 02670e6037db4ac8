//! Minimal hand-written SVG: line plots and ternary contour lines.

use std::fmt::Write;

use mixtopo::SimplexGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    /// Horizontal reference lines.
    pub guides: &'a [f64],
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

pub fn line_plot(p: &LinePlot) -> String {
    let (x0, x1) = range(p.points.iter().map(|q| q.0));
    let (y0, y1) = range(p.points.iter().map(|q| q.1).chain(p.guides.iter().copied()));
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(p.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for t in 0..=TICKS {
        let f = t as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(xv),
            HEIGHT - MARGIN + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            sy(yv) + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(p.y_label)
    );
    for &g in p.guides {
        let _ = writeln!(
            out,
            r#"<line x1="{MARGIN}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            WIDTH - MARGIN,
            sy(g),
            sy(g)
        );
    }
    let mut path = String::new();
    let mut pen_down = false;
    for &(x, y) in p.points {
        if !(x.is_finite() && y.is_finite()) {
            pen_down = false;
            continue;
        }
        let _ = write!(path, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
        pen_down = true;
    }
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.trim_end()
    );
    out.push_str("</svg>\n");
    out
}

/// Contour lines of `log h` on the barycentric triangle, with grid maxima marked.
pub fn ternary_contour(grid: &SimplexGrid, levels: usize) -> String {
    let size = 520.0;
    let (w, h) = (size + 2.0 * MARGIN, size * 3f64.sqrt() / 2.0 + 2.0 * MARGIN);
    let (tx0, tx1) = range(grid.nodes.iter().map(|n| n.tx));
    let (ty0, ty1) = range(grid.nodes.iter().map(|n| n.ty));
    let scale = size / (tx1 - tx0).max(ty1 - ty0);
    let px = |tx: f64| MARGIN + (tx - tx0) * scale;
    let py = |ty: f64| h - MARGIN - (ty - ty0) * scale;

    let top = grid.nodes.iter().map(|n| n.log_h).fold(f64::NEG_INFINITY, f64::max);
    let bottom = grid
        .nodes
        .iter()
        .map(|n| n.log_h)
        .fold(f64::INFINITY, f64::min)
        .max(top - 15.0);
    let values: Vec<f64> = (1..=levels)
        .map(|l| bottom + (top - bottom) * l as f64 / (levels + 1) as f64)
        .collect();

    let r = grid.resolution as isize;
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for i in 0..=r {
        for j in 0..=r - i {
            let a = grid.index(i, j);
            let (b, c, d) = (grid.index(i + 1, j), grid.index(i, j + 1), grid.index(i + 1, j + 1));
            if let (Some(a), Some(b), Some(c)) = (a, b, c) {
                tris.push([a, b, c]);
                if let Some(d) = d {
                    tris.push([b, d, c]);
                }
            }
        }
    }

    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">ridgeline elevation, log h</text>"#,
        w / 2.0
    );
    for (l, &level) in values.iter().enumerate() {
        let mut path = String::new();
        for t in &tris {
            let pts: Vec<(f64, f64)> = [(0, 1), (1, 2), (2, 0)]
                .iter()
                .filter_map(|&(u, v)| {
                    let (p, q) = (&grid.nodes[t[u]], &grid.nodes[t[v]]);
                    if (p.log_h >= level) == (q.log_h >= level) {
                        return None;
                    }
                    let s = (level - p.log_h) / (q.log_h - p.log_h);
                    Some((p.tx + s * (q.tx - p.tx), p.ty + s * (q.ty - p.ty)))
                })
                .collect();
            if let [a, b] = pts[..] {
                let _ = write!(path, "M{:.2} {:.2}L{:.2} {:.2}", px(a.0), py(a.1), px(b.0), py(b.1));
            }
        }
        let shade = 40 + 180 * l / levels.max(1);
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="rgb({shade},60,{})" stroke-width="1"/>"#,
            220 - shade / 2
        );
    }
    let corners: Vec<_> = grid.nodes.iter().filter(|n| n.alpha.contains(&1.0)).collect();
    let outline: Vec<String> = corners
        .iter()
        .map(|n| format!("{:.2},{:.2}", px(n.tx), py(n.ty)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="none" stroke="black"/>"#,
        outline.join(" ")
    );
    for n in &corners {
        let k = n.alpha.iter().position(|&a| a == 1.0).unwrap_or(0) + 1;
        let dy = if n.ty > ty0 + 0.5 * (ty1 - ty0) { -8.0 } else { 18.0 };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            px(n.tx),
            py(n.ty) + dy
        );
    }
    for n in grid.local_maxima() {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="crimson"/>"#,
            px(n.tx),
            py(n.ty)
        );
    }
    out.push_str("</svg>\n");
    out
}
