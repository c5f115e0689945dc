//! Minimal SVG line chart: MSE and squared bias of both filters against `d`
//! on a logarithmic y-axis.

use std::fmt::Write;

use oac_core::experiments::SweepResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

struct Series {
    label: &'static str,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

pub fn render_svg(result: &SweepResult) -> String {
    let rows = &result.rows;
    let collect = |f: &dyn Fn(&oac_core::experiments::SweepRow) -> f64| {
        rows.iter().map(|r| (r.d as f64, f(r))).collect::<Vec<_>>()
    };
    let series = [
        Series {
            label: "MSE (proposed)",
            color: "#1f77b4",
            dashed: false,
            points: collect(&|r| r.proposed.mse),
        },
        Series {
            label: "MSE (matched)",
            color: "#d62728",
            dashed: false,
            points: collect(&|r| r.matched.mse),
        },
        Series {
            label: "bias² (proposed)",
            color: "#1f77b4",
            dashed: true,
            points: collect(&|r| r.proposed.bias_sq()),
        },
        Series {
            label: "bias² (matched)",
            color: "#d62728",
            dashed: true,
            points: collect(&|r| r.matched.bias_sq()),
        },
    ];

    let positive = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|&v| v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo_dec, hi_dec) = if lo.is_finite() {
        (
            lo.log10().floor(),
            hi.log10().ceil().max(lo.log10().floor() + 1.0),
        )
    } else {
        (-1.0, 0.0)
    };
    let (x_min, x_max) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.d as f64), b.max(r.d as f64))
        });
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / x_span * plot_w;
    // values at or below zero are pinned to the bottom edge
    let py = |y: f64| {
        let l = if y > 0.0 {
            y.log10().max(lo_dec)
        } else {
            lo_dec
        };
        TOP + (hi_dec - l) / (hi_dec - lo_dec) * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let mut dec = lo_dec;
    while dec <= hi_dec {
        let y = py(10f64.powf(dec));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            dec as i64
        );
        dec += 1.0;
    }
    for r in rows {
        let x = px(r.d as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            r.d
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">maximum delay d</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    for (i, s) in series.iter().enumerate() {
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            pts.join(" "),
            s.color
        );
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            s.color,
            lx + 30.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
