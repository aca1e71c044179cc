//! SVG rendering of a region scan.

use std::fmt::Write;

use crate::atlas::{Rule, ScanPoint, Status};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 20.0;
const PLOT_W: f64 = 400.0;
const PLOT_H: f64 = 400.0;

/// Fill colour and legend label of one cell.
fn cell_style(p: &ScanPoint) -> (&'static str, &'static str) {
    let c = &p.classification;
    match c.status {
        Status::NecessaryViolated => ("#b0b0b0", "necessary_violated"),
        Status::KnownNotFrame => ("#d7301f", "known_not_frame (obstruction_db)"),
        Status::Unknown => ("#f4f4f4", "unknown"),
        Status::FrameGuaranteed => {
            if c.fired(Rule::RegionAMultiplication) {
                ("#1a9850", "frame: regionA_multiplication")
            } else if c.fired(Rule::PropIiShortDual) {
                ("#91cf60", "frame: prop_ii_shortdual")
            } else if c.fired(Rule::PropIiiHalfSupport) {
                ("#fee08b", "frame: prop_iii_halfsupport")
            } else {
                ("#4575b4", "frame: thm_D_Vclass")
            }
        }
    }
}

type Curve = (&'static str, &'static str, Box<dyn Fn(f64) -> f64>);

const LEGEND: [(&str, &str); 7] = [
    ("#1a9850", "frame: regionA_multiplication"),
    ("#91cf60", "frame: prop_ii_shortdual"),
    ("#fee08b", "frame: prop_iii_halfsupport"),
    ("#4575b4", "frame: thm_D_Vclass"),
    ("#d7301f", "known_not_frame (obstruction_db)"),
    ("#b0b0b0", "necessary_violated"),
    ("#f4f4f4", "unknown"),
];

/// Renders the scanned cells over `a in (0, N)`, `b in (0, b_max]` with
/// `b_max = max(4/N, largest scanned b)`, plus the curves `b = 2/(N+a)`,
/// `b = 4/(N+3a)`, `b = 1/N` and `ab = 1`. Output is deterministic.
pub fn render_atlas_svg(points: &[ScanPoint], n: f64, a_step: f64, b_step: f64) -> String {
    let b_top = points.iter().map(|p| p.b + b_step / 2.0).fold(4.0 / n, f64::max);
    let sx = |a: f64| LEFT + a / n * PLOT_W;
    let sy = |b: f64| TOP + PLOT_H - b / b_top * PLOT_H;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g id="cells" stroke="none">"#);
    for p in points {
        let (fill, _) = cell_style(p);
        let x0 = sx((p.a - a_step / 2.0).max(0.0));
        let x1 = sx((p.a + a_step / 2.0).min(n));
        let y0 = sy((p.b + b_step / 2.0).min(b_top));
        let y1 = sy((p.b - b_step / 2.0).max(0.0));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="{fill}"><title>a={} b={} {} {}</title></rect>"#,
            (x1 - x0).max(0.0),
            (y1 - y0).max(0.0),
            p.a,
            p.b,
            p.classification.status.id(),
            p.classification.rules_string()
        );
    }
    let _ = writeln!(s, "</g>");

    let curves: [Curve; 4] = [
        ("b=2/(N+a)", "#000000", Box::new(move |a| 2.0 / (n + a))),
        ("b=4/(N+3a)", "#08306b", Box::new(move |a| 4.0 / (n + 3.0 * a))),
        ("b=1/N", "#006d2c", Box::new(move |_| 1.0 / n)),
        ("ab=1", "#7f0000", Box::new(|a| 1.0 / a)),
    ];
    let _ = writeln!(s, r#"<g id="boundaries" fill="none" stroke-width="1.5">"#);
    for (label, color, f) in &curves {
        let pts: Vec<String> = (1..=400)
            .map(|i| n * i as f64 / 400.0)
            .filter(|&a| a < n || *label != "ab=1")
            .filter_map(|a| {
                let b = f(a);
                (b > 0.0 && b <= b_top).then(|| format!("{:.3},{:.3}", sx(a), sy(b)))
            })
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline stroke="{color}" points="{}"><title>{label}</title></polyline>"#,
                pts.join(" ")
            );
        }
    }
    let _ = writeln!(s, "</g>");

    // axes
    let _ = writeln!(
        s,
        r#"<g id="axes" stroke="black"><line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{0}"/></g>"#,
        TOP + PLOT_H,
        LEFT + PLOT_W
    );
    for i in 0..=4 {
        let a = n * i as f64 / 4.0;
        let b = b_top * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            sx(a),
            TOP + PLOT_H + 15.0,
            trim(a)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            sy(b) + 4.0,
            trim(b)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">a</text>"#, LEFT + PLOT_W / 2.0, HEIGHT - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{:.3}" text-anchor="middle">b</text>"#, TOP + PLOT_H / 2.0);

    let lx = LEFT + PLOT_W + 15.0;
    let _ = writeln!(s, r#"<g id="legend">"#);
    for (i, (color, label)) in LEGEND.iter().enumerate() {
        let y = TOP + 10.0 + i as f64 * 18.0;
        let _ = writeln!(
            s,
            r##"<rect x="{lx:.3}" y="{y:.3}" width="12" height="12" fill="{color}" stroke="#666"/><text x="{:.3}" y="{:.3}">{label}</text>"##,
            lx + 16.0,
            y + 10.0
        );
    }
    for (i, (label, color, _)) in curves.iter().enumerate() {
        let y = TOP + 10.0 + (LEGEND.len() + i) as f64 * 18.0 + 8.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="1.5"/><text x="{:.3}" y="{:.3}">{label}</text>"#,
            y + 6.0,
            lx + 12.0,
            y + 6.0,
            lx + 16.0,
            y + 10.0
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
