//! Static SVG boxplots of D on an `asinh(8x)` axis.

use std::fmt::Write as _;

use rainfit_core::evaluation::{asinh_axis_transform, BoxplotStats, MethodId, ASINH_SCALE};

const TICKS: [f64; 15] = [-5.0, -2.0, -1.0, -0.5, -0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0];
const HEIGHT: f64 = 420.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
const LEFT: f64 = 70.0;
const SLOT: f64 = 90.0;

fn t(x: f64) -> f64 {
    asinh_axis_transform(x, ASINH_SCALE)
}

/// One box per method: Q1 to Q3 with the median, whiskers at 1.5 IQR, and
/// the extremes as dots when they fall outside the whiskers.
pub fn boxplot_svg(p: f64, cells: &[(MethodId, BoxplotStats)]) -> String {
    let (mut lo, mut hi) = (t(-0.1), t(0.1));
    for (_, s) in cells {
        lo = lo.min(t(s.min));
        hi = hi.max(t(s.max));
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y = |d: f64| TOP + (hi - t(d)) / (hi - lo) * plot_h;
    let width = LEFT + SLOT * cells.len().max(1) as f64 + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">D at p = {p} (axis asinh(8x))</text>"#, width / 2.0);
    for tick in TICKS.iter().copied().filter(|v| (lo..=hi).contains(&t(*v))) {
        let ty = y(tick);
        let stroke = if tick == 0.0 { "#888" } else { "#e4e4e4" };
        let _ = writeln!(s, r#"<line x1="{LEFT}" x2="{:.1}" y1="{ty:.2}" y2="{ty:.2}" stroke="{stroke}"/>"#, width - 10.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{tick}</text>"#, LEFT - 6.0, ty + 4.0);
    }
    let _ = writeln!(s, r#"<line x1="{LEFT}" x2="{LEFT}" y1="{TOP}" y2="{:.1}" stroke="black"/>"#, TOP + plot_h);
    for (i, (method, b)) in cells.iter().enumerate() {
        let cx = LEFT + SLOT * (i as f64 + 0.5);
        let half = SLOT * 0.3;
        let _ = writeln!(s, r#"<g><title>{} n={}</title>"#, method.name(), b.n);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.upper_whisker),
            y(b.q3)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.q1),
            y(b.lower_whisker)
        );
        for w in [b.lower_whisker, b.upper_whisker] {
            let _ = writeln!(s, r#"<line x1="{:.1}" x2="{:.1}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#, cx - half / 2.0, cx + half / 2.0, y(w), y(w));
        }
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.2}" width="{:.1}" height="{:.2}" fill="#cfe0f3" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(s, r#"<line x1="{:.1}" x2="{:.1}" y1="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, cx - half, cx + half, y(b.median), y(b.median));
        if b.min < b.lower_whisker {
            let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{:.2}" r="2.5" fill="none" stroke="black"/>"#, y(b.min));
        }
        if b.max > b.upper_whisker {
            let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{:.2}" r="2.5" fill="none" stroke="black"/>"#, y(b.max));
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-35 {cx:.1} {:.1})">{}</text></g>"#,
            TOP + plot_h + 16.0,
            TOP + plot_h + 16.0,
            method.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
