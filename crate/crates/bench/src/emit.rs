//! Report files: CSV tables and SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tcs_schemes::SchemeId;

use crate::error::BenchError;
use crate::report::MetricsReport;

pub const METRICS_HEADER: &str = "scheme,rate,throughput,L50,Ltheta,L95,delta_res,eta_theta";

fn ms(v: Option<f64>) -> String {
    v.map(|s| format!("{:.3}", s * 1e3)).unwrap_or_default()
}

fn ratio(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// One line per (scheme, rate). Latencies in milliseconds.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{:.3},{},{},{},{},{}",
            r.scheme,
            r.rate,
            r.throughput,
            ms(r.l50),
            ms(r.l_theta),
            ms(r.l95),
            ratio(r.delta_res),
            ratio(r.eta_theta)
        );
    }
    out
}

pub fn nodes_csv(report: &MetricsReport) -> String {
    let mut out = String::from("scheme,rate,node,samples,L50,Ltheta,L95\n");
    for r in &report.rows {
        for n in &r.nodes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.scheme,
                r.rate,
                n.node,
                n.samples,
                ms(Some(n.l50)),
                ms(Some(n.l_theta)),
                ms(Some(n.l95))
            );
        }
    }
    out
}

pub fn capacity_csv(report: &MetricsReport) -> String {
    let mut out = String::from("scheme,knee_capacity,usable_capacity\n");
    for c in &report.capacities {
        let _ = writeln!(out, "{},{},{}", c.scheme, c.knee, c.usable);
    }
    out
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 60.0;

struct Series {
    label: String,
    color: &'static str,
    dash: Option<&'static str>,
    points: Vec<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart; `log_x` plots the x axis in log2.
fn chart(title: &str, x_label: &str, y_label: &str, log_x: bool, series: &[Series]) -> String {
    let tx = |x: f64| if log_x { x.max(1e-9).log2() } else { x };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), y)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y1) = (f64::MAX, f64::MIN, 0.0f64);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    y1 *= 1.05;
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - y / y1 * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#, H - M);
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y1 * i as f64 / 4.0;
        let xl = if log_x { format!("{:.0}", fx.exp2()) } else { format!("{fx:.1}") };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{xl}</text>"#,
            px(fx),
            H - M + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{fy:.1}</text>"#,
            M - 6.0,
            py(fy) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 16.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    );
    for (i, se) in series.iter().enumerate() {
        let path: Vec<String> = se
            .points
            .iter()
            .map(|&(x, y)| (tx(x), y))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let dash = se.dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        if !path.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
                se.color,
                path.join(" ")
            );
        }
        let ly = M + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly:.1}" fill="{}">{}</text>"#,
            W - M - 110.0,
            se.color,
            esc(&se.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn schemes(report: &MetricsReport) -> Vec<SchemeId> {
    let mut out = Vec::new();
    for r in &report.rows {
        if !out.contains(&r.scheme) {
            out.push(r.scheme);
        }
    }
    out
}

/// L95 against throughput, one line per scheme.
pub fn throughput_latency_svg(report: &MetricsReport) -> String {
    let series: Vec<Series> = schemes(report)
        .into_iter()
        .enumerate()
        .map(|(i, s)| Series {
            label: s.to_string(),
            color: COLORS[i % COLORS.len()],
            dash: None,
            points: report
                .rows
                .iter()
                .filter(|r| r.scheme == s)
                .filter_map(|r| Some((r.throughput, r.l95? * 1e3)))
                .collect(),
        })
        .collect();
    chart(
        &format!("Throughput vs latency ({})", report.preset),
        "throughput [req/s]",
        "L95 [ms]",
        false,
        &series,
    )
}

/// L50, Lθ and L95 against the offered rate, per scheme.
pub fn percentiles_svg(report: &MetricsReport) -> String {
    let mut series = Vec::new();
    for (i, s) in schemes(report).into_iter().enumerate() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.scheme == s).collect();
        let color = COLORS[i % COLORS.len()];
        type Pick = fn(&crate::report::MetricsRow) -> Option<f64>;
        let picks: [(&str, Pick, Option<&'static str>); 3] = [
            ("L50", |r| r.l50, Some("2,3")),
            ("Ltheta", |r| r.l_theta, None),
            ("L95", |r| r.l95, Some("8,4")),
        ];
        for (name, pick, dash) in picks {
            series.push(Series {
                label: format!("{s} {name}"),
                color,
                dash,
                points: rows
                    .iter()
                    .filter_map(|r| Some((r.rate as f64, pick(r)? * 1e3)))
                    .collect(),
            });
        }
    }
    chart(
        &format!("Latency percentiles ({}, theta = {:.2})", report.preset, report.theta),
        "offered rate [req/s]",
        "latency [ms]",
        true,
        &series,
    )
}

/// Writes every report file into `out` and returns their paths.
pub fn emit_report(report: &MetricsReport, out: &Path) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let files = [
        ("metrics.csv", metrics_csv(report)),
        ("nodes.csv", nodes_csv(report)),
        ("capacity.csv", capacity_csv(report)),
        ("throughput_latency.svg", throughput_latency_svg(report)),
        ("percentiles.svg", percentiles_svg(report)),
        (
            "report.json",
            serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| BenchError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
