//! Minimal SVG line plot of the regime sweep.

use std::fmt::Write;

use crate::asymptotics::SweepRow;

const W: f64 = 720.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP_Y0: f64 = 40.0;
const TOP_H: f64 = 260.0;
const FLAG_Y0: f64 = 340.0;
const FLAG_H: f64 = 60.0;
const H: f64 = 450.0;

/// `u_power` and the log flag against `a`, with dashed markers at the two
/// regime boundaries.
pub fn sweep_plot(rows: &[SweepRow], a0: f64, half_beta: f64) -> String {
    let (amin, amax) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.a), hi.max(r.a)));
    let (pmin, pmax) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.u_power), hi.max(r.u_power))
    });
    let pad = ((pmax - pmin) * 0.08).max(0.1);
    let (pmin, pmax) = (pmin - pad, pmax + pad);
    let span = (amax - amin).max(f64::EPSILON);
    let x = |a: f64| LEFT + (a - amin) / span * (W - LEFT - RIGHT);
    let y = |p: f64| TOP_Y0 + (pmax - p) / (pmax - pmin) * TOP_H;
    let yf = |f: u8| FLAG_Y0 + FLAG_H * (1.0 - f as f64);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    for (y0, h) in [(TOP_Y0, TOP_H), (FLAG_Y0, FLAG_H)] {
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{y0}" width="{:.1}" height="{h}" fill="none" stroke="black"/>"#,
            W - LEFT - RIGHT
        );
    }
    let path = |pts: Vec<(f64, f64)>| {
        pts.iter()
            .map(|(a, b)| format!("{a:.2},{b:.2}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let power: Vec<(f64, f64)> = rows.iter().map(|r| (x(r.a), y(r.u_power))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path(power));
    // step line for the log flag
    let mut flag = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            flag.push((x(r.a), yf(rows[i - 1].log_power)));
        }
        flag.push((x(r.a), yf(r.log_power)));
    }
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="darkorange" stroke-width="2"/>"#, path(flag));
    for (a, label) in [(a0, format!("a0 = {a0:.4}")), (half_beta, format!("beta/2 = {half_beta:.4}"))] {
        if a < amin || a > amax {
            continue;
        }
        let xa = x(a);
        let _ = writeln!(
            s,
            r#"<line x1="{xa:.2}" y1="{TOP_Y0}" x2="{xa:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="5,4"/>"#,
            FLAG_Y0 + FLAG_H
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, xa + 4.0, TOP_Y0 - 8.0);
    }
    for k in 0..=4 {
        let p = pmin + (pmax - pmin) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="8" y="{:.2}">{p:.3}</text>"#, y(p) + 4.0);
    }
    for k in 0..=4 {
        let a = amin + span * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{a:.3}</text>"#, x(a) - 12.0, FLAG_Y0 + FLAG_H + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{LEFT}" y="20">exponent of u versus a</text>"#);
    let _ = writeln!(s, r#"<text x="8" y="{:.2}">log u</text>"#, FLAG_Y0 + FLAG_H / 2.0 + 4.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">a</text>"#, W / 2.0, H - 8.0);
    s.push_str("</svg>\n");
    s
}
