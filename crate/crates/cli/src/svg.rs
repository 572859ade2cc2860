//! Minimal SVG line chart of residual maps.

use std::fmt::Write;

use otreg::MonotoneMap;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Residual maps in blue, their mean in orange, the identity dashed grey.
pub fn residual_overlay(maps: &[MonotoneMap], mean: &MonotoneMap) -> String {
    let g = mean.grid();
    let (lo, hi) = (g.omega_min(), g.omega_max());
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + plot * (x - lo) / (hi - lo);
    let sy = |y: f64| SIZE - MARGIN - plot * (y - lo) / (hi - lo);
    let points = |t: &MonotoneMap| {
        let mut s = String::new();
        for (j, v) in t.values().iter().enumerate() {
            if j > 0 {
                s.push(' ');
            }
            write!(s, "{:.2},{:.2}", sx(g.node(j)), sy(*v)).unwrap();
        }
        s
    };

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (a, b) = (MARGIN, SIZE - MARGIN);
    writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{a}" y1="{b}" x2="{b}" y2="{b}"/><line x1="{a}" y1="{b}" x2="{a}" y2="{a}"/></g>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="12"><text x="{a}" y="{}" text-anchor="middle">{lo}</text><text x="{b}" y="{}" text-anchor="middle">{hi}</text><text x="{}" y="{}" text-anchor="end">{lo}</text><text x="{}" y="{}" text-anchor="end">{hi}</text></g>"#,
        b + 18.0,
        b + 18.0,
        a - 6.0,
        b,
        a - 6.0,
        a + 4.0
    )
    .unwrap();
    writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
        sx(lo),
        sy(lo),
        sx(hi),
        sy(hi)
    )
    .unwrap();
    writeln!(
        out,
        "<g fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" stroke-opacity=\"0.5\">"
    )
    .unwrap();
    for t in maps {
        writeln!(out, r#"<polyline points="{}"/>"#, points(t)).unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(
        out,
        r##"<polyline fill="none" stroke="#ff7f0e" stroke-width="2.5" points="{}"/>"##,
        points(mean)
    )
    .unwrap();
    let legend = [
        ("#1f77b4", "residual maps"),
        ("#ff7f0e", "mean residual"),
        ("#888888", "identity"),
    ];
    writeln!(out, r#"<g font-family="sans-serif" font-size="12">"#).unwrap();
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = MARGIN + 4.0 + 16.0 * i as f64;
        writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            a + 10.0,
            a + 30.0,
            a + 36.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    out
}
