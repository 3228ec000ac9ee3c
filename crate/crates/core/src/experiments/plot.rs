use std::fmt::Write;

use super::ComparisonReport;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLOURS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Mean speed against frequency, one polyline per gel level, with
/// plus/minus one standard deviation bars.
pub fn dispersion_svg(report: &ComparisonReport) -> String {
    let cells = &report.cells;
    let (mut f0, mut f1, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for c in cells {
        f0 = f0.min(c.frequency);
        f1 = f1.max(c.frequency);
        v1 = v1.max(c.summary.mean + c.summary.sd.unwrap_or(0.0));
    }
    if !f0.is_finite() {
        (f0, f1) = (0.0, 1.0);
    }
    if f1 - f0 < 1e-9 {
        (f0, f1) = (f0 - 50.0, f1 + 50.0);
    }
    let v1 = if v1 > 0.0 { v1 * 1.1 } else { 1.0 };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let x = |f: f64| LEFT + (f - f0) / (f1 - f0) * pw;
    let y = |v: f64| TOP + ph - v / v1 * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    let step = nice_step(v1);
    let mut v = 0.0;
    while v <= v1 + 1e-12 {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0,
            (v * 1e6).round() / 1e6
        );
        v += step;
    }
    let mut freqs: Vec<f64> = cells.iter().map(|c| c.frequency).collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    for f in &freqs {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{f}</text>"#,
            x(*f),
            TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">frequency (Hz)</text>"#,
        LEFT + pw / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">surface wave speed (m/s, {})</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        report.method.tag()
    );

    let mut levels: Vec<f64> = Vec::new();
    for c in cells {
        if !levels.contains(&c.gel_level) {
            levels.push(c.gel_level);
        }
    }
    for (i, level) in levels.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let mut pts: Vec<_> = cells.iter().filter(|c| c.gel_level == *level).collect();
        pts.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        let path: Vec<String> = pts
            .iter()
            .map(|c| format!("{:.2},{:.2}", x(c.frequency), y(c.summary.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for c in &pts {
            let (cx, cy) = (x(c.frequency), y(c.summary.mean));
            if let Some(sd) = c.summary.sd {
                let (lo, hi) = (y((c.summary.mean - sd).max(0.0)), y(c.summary.mean + sd));
                let _ = writeln!(
                    s,
                    r#"<path d="M{cx:.2} {lo:.2} V{hi:.2} M{:.2} {lo:.2} H{:.2} M{:.2} {hi:.2} H{:.2}" stroke="{colour}"/>"#,
                    cx - 4.0,
                    cx + 4.0,
                    cx - 4.0,
                    cx + 4.0
                );
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{colour}"/>"#
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<path d="M{lx:.2} {ly:.2} h20" stroke="{colour}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">gel {} mm</text>"#,
            lx + 26.0,
            ly + 4.0,
            (level * 1e9).round() / 1e6
        );
    }
    s.push_str("</svg>\n");
    s
}
