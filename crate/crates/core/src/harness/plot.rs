//! Self-contained SVG training curves: per-method mean over seeds with a 95%
//! confidence band, validation solid and evaluation dashed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::metrics::{mean_ci95, MetricRecord};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#aec7e8", "#2ca02c", "#d62728", "#ff7f0e", "#bcbd22", "#9467bd", "#8c564b",
];

/// Records of one method across seeds.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub label: String,
    pub records: Vec<MetricRecord>,
}

/// Per-step `(step, mean, half_width)` of a metric across seeds.
pub fn aggregate(records: &[MetricRecord], metric: fn(&MetricRecord) -> f64) -> Vec<(u64, f64, f64)> {
    let mut by_step: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_step.entry(r.step).or_default().push(metric(r));
    }
    by_step
        .into_iter()
        .map(|(step, vals)| {
            let (m, h) = mean_ci95(&vals);
            (step, m, h)
        })
        .collect()
}

pub fn plot_curves(sets: &[CurveSet], threshold: Option<f64>, title: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 170.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 45.0;

    let series: Vec<_> = sets
        .iter()
        .map(|s| {
            (
                aggregate(&s.records, |r| r.validation_return),
                aggregate(&s.records, |r| r.evaluation_return),
            )
        })
        .collect();
    let max_step = series
        .iter()
        .flat_map(|(v, e)| v.iter().chain(e).map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let (y_min, y_max) = (-150.0, 50.0);
    let sx = |s: f64| LEFT + s / max_step * (W - LEFT - RIGHT);
    let sy = |v: f64| TOP + (y_max - v.clamp(y_min, y_max)) / (y_max - y_min) * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    for tick in [-150.0, -100.0, -50.0, 0.0, 50.0] {
        let y = sy(tick);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/><text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for i in 0..=4 {
        let s = max_step * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}k</text>"#,
            sx(s),
            H - BOTTOM + 18.0,
            (s / 1000.0).round()
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">steps</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 8.0
    );
    if let Some(t) = threshold {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r#"<line class="threshold" x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-dasharray="2,3"/>"#,
            W - RIGHT
        );
    }

    for (i, (set, (val, eval))) in sets.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (points, dash) in [(val, ""), (eval, r#" stroke-dasharray="6,4""#)] {
            if points.is_empty() {
                continue;
            }
            let upper: Vec<String> = points.iter().map(|&(s, m, h)| format!("{:.1},{:.1}", sx(s as f64), sy(m + h))).collect();
            let lower: Vec<String> = points
                .iter()
                .rev()
                .map(|&(s, m, h)| format!("{:.1},{:.1}", sx(s as f64), sy(m - h)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
            let line: Vec<String> = points.iter().map(|&(s, m, _)| format!("{:.1},{:.1}", sx(s as f64), sy(m))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                line.join(" ")
            );
        }
        let ly = TOP + 18.0 * i as f64 + 10.0;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&set.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
