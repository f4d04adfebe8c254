//! CSV and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ehcr_core::AccessPolicy;
use serde::Serialize;

pub const HEADER: [&str; 13] = [
    "lambda_p",
    "lambda_s_max",
    "winning_system",
    "p_s",
    "p_t",
    "p_f",
    "p_b",
    "p_r",
    "mu_p",
    "mu_s",
    "delay",
    "confidence",
    "lambda_e",
];

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub lambda_p: f64,
    pub lambda_s_max: f64,
    pub winning_system: String,
    pub policy: AccessPolicy,
    pub mu_p: f64,
    pub mu_s: f64,
    pub delay: f64,
    /// Solver tolerance for analytic rows, 95% half-width for simulated ones.
    pub confidence: f64,
    pub lambda_e: f64,
}

/// `v` with 12 significant digits.
pub fn sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{v:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn render_csv(rows: &[Row]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        let p = &r.policy;
        let fields = [
            sig12(r.lambda_p),
            sig12(r.lambda_s_max),
            r.winning_system.clone(),
            sig12(p.p_s),
            sig12(p.p_t),
            sig12(p.p_f),
            sig12(p.p_b),
            sig12(p.p_r),
            sig12(r.mu_p),
            sig12(r.mu_s),
            sig12(r.delay),
            sig12(r.confidence),
            sig12(r.lambda_e),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Line plot of several named series sharing one figure.
pub fn render_svg(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 50.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f",
    ];
    let finite = series
        .iter()
        .flat_map(|(_, pts)| pts.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() || x1 <= x0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - y / y1 * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{M}" y="{}" text-anchor="middle">{x0:.3}</text>"#,
        H - M + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x1:.3}</text>"#,
        W - M,
        H - M + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{y1:.3}</text>"#,
        M - 4.0,
        M + 4.0
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !d.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            W - M - 90.0,
            M + 14.0 * (k as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.123456789012345), "0.123456789012");
        assert_eq!(sig12(4.375), "4.375");
        assert_eq!(sig12(1234.56789012345), "1234.56789012");
        assert_eq!(sig12(1e-9), "1.00000000000e-9");
        assert_eq!(sig12(f64::INFINITY), "inf");
        let x = 0.610_837_312_345_678;
        assert!((sig12(x).parse::<f64>().unwrap() - x).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_fixed_columns() {
        let row = Row {
            lambda_p: 0.3,
            lambda_s_max: 0.1,
            winning_system: "S1".into(),
            policy: AccessPolicy::conventional(),
            mu_p: 0.5,
            mu_s: 0.1,
            delay: 2.0,
            confidence: 1e-7,
            lambda_e: 0.4,
        };
        let csv = render_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "0.3,0.1,S1,1,0,1,0,0,0.5,0.1,2,1.00000000000e-7,0.4"
        );
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = render_svg("t", "x", &[("a".into(), vec![(0.0, 1.0), (1.0, 0.5)])]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline"));
    }
}
