//! Timeline plots of a recorded run: SVG for `.svg` outputs, plain text otherwise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::TelemetryRow;
use crate::controller::Mode;
use crate::error::{Error, Result};

const WIDTH: f64 = 1000.0;
const BAND_H: f64 = 28.0;
const PANEL_H: f64 = 140.0;
const MARGIN: f64 = 60.0;

fn mode_color(mode: Mode) -> &'static str {
    const PALETTE: [&str; 14] = [
        "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
        "#ff9da7", "#9c755f", "#bab0ac", "#17becf", "#8c564b", "#bcbd22", "#7f7f7f",
    ];
    let idx = Mode::ALL.iter().position(|m| *m == mode).unwrap_or(0);
    PALETTE[idx % PALETTE.len()]
}

/// Contiguous runs of one mode as (mode, t_start, t_end).
pub fn mode_segments(rows: &[TelemetryRow]) -> Vec<(Mode, f64, f64)> {
    let mut segs: Vec<(Mode, f64, f64)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let t_next = rows.get(i + 1).map_or(row.t, |r| r.t);
        match segs.last_mut() {
            Some(last) if last.0 == row.state => last.2 = t_next,
            _ => segs.push((row.state, row.t, t_next)),
        }
    }
    segs
}

struct Series {
    label: &'static str,
    color: &'static str,
    values: Vec<f64>,
}

fn panels(rows: &[TelemetryRow]) -> Vec<(&'static str, Vec<Series>)> {
    let col = |f: fn(&TelemetryRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    vec![
        (
            "velocity commands (m/s)",
            vec![
                Series { label: "forward", color: "#1f77b4", values: col(|r| r.forward_mps) },
                Series { label: "right", color: "#ff7f0e", values: col(|r| r.right_mps) },
                Series { label: "up", color: "#2ca02c", values: col(|r| r.up_mps) },
            ],
        ),
        ("yaw rate (deg/s)", vec![Series { label: "yaw", color: "#d62728", values: col(|r| r.yaw_rate_dps) }]),
        (
            "gimbal (deg)",
            vec![
                Series { label: "pan", color: "#9467bd", values: col(|r| r.gimbal_pan_deg) },
                Series { label: "tilt", color: "#8c564b", values: col(|r| r.gimbal_tilt_deg) },
            ],
        ),
        ("altitude (m)", vec![Series { label: "z", color: "#17becf", values: col(|r| r.z_m) }]),
    ]
}

pub fn render_svg(rows: &[TelemetryRow]) -> String {
    let t0 = rows.first().map_or(0.0, |r| r.t);
    let t1 = rows.last().map_or(1.0, |r| r.t).max(t0 + 1e-9);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let x = |t: f64| MARGIN + (t - t0) / (t1 - t0) * plot_w;
    let panels = panels(rows);
    let height = MARGIN + BAND_H + 20.0 + panels.len() as f64 * (PANEL_H + 30.0) + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let band_y = MARGIN;
    for (mode, a, b) in mode_segments(rows) {
        let w = (x(b) - x(a)).max(0.5);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{band_y}" width="{w:.2}" height="{BAND_H}" fill="{}"><title>{} {a:.2}-{b:.2} s</title></rect>"#,
            x(a),
            mode_color(mode),
            mode.as_str()
        );
    }
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">state</text>"#, band_y - 6.0);

    let mut top = band_y + BAND_H + 30.0;
    for (title, series) in &panels {
        let (lo, hi) = series
            .iter()
            .flat_map(|se| se.values.iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0) };
        let y = |v: f64| top + PANEL_H - (v - lo) / (hi - lo) * PANEL_H;
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#ccc"/>"##
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">{title}</text>"#, top - 6.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{hi:.2}</text>"#, top + 10.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{lo:.2}</text>"#, top + PANEL_H);
        for (k, se) in series.iter().enumerate() {
            let pts: Vec<String> = rows
                .iter()
                .zip(&se.values)
                .map(|(r, v)| format!("{:.2},{:.2}", x(r.t), y(*v)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
                se.color,
                pts.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" fill="{}">{}</text>"#,
                WIDTH - MARGIN - 150.0 + k as f64 * 50.0,
                top - 6.0,
                se.color,
                se.label
            );
        }
        top += PANEL_H + 30.0;
    }
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.1}">t = {t0:.2} .. {t1:.2} s</text>"#, top - 10.0);
    s.push_str("</svg>\n");
    s
}

pub fn render_text(rows: &[TelemetryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>9} {:>9}  state", "t_start", "t_end");
    for (mode, a, b) in mode_segments(rows) {
        let _ = writeln!(s, "{a:>9.2} {b:>9.2}  {}", mode.as_str());
    }
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "ticks {}  start ({:.2}, {:.2}, {:.2})  end ({:.2}, {:.2}, {:.2})",
            rows.len(),
            first.x_m,
            first.y_m,
            first.z_m,
            last.x_m,
            last.y_m,
            last.z_m
        );
    }
    s
}

/// Writes an SVG when `out` ends in `.svg`, otherwise a text summary.
pub fn write_plot(rows: &[TelemetryRow], out: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("record", "no telemetry rows to plot"));
    }
    let svg = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    let body = if svg { render_svg(rows) } else { render_text(rows) };
    fs::write(out, body).map_err(|e| Error::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::StreamId;

    fn row(t: f64, state: Mode) -> TelemetryRow {
        TelemetryRow {
            t,
            state,
            forward_mps: t,
            right_mps: 0.0,
            up_mps: 0.0,
            yaw_rate_dps: 0.0,
            gimbal_pan_deg: 0.0,
            gimbal_tilt_deg: -45.0,
            zoom: 1.0,
            stream: StreamId::Wide,
            detected: false,
            s_p_percent: None,
            phi_deg: None,
            theta_deg: None,
            psi_deg: None,
            x_m: 0.0,
            y_m: 0.0,
            z_m: 5.0,
            yaw_deg: 0.0,
        }
    }

    #[test]
    fn segments_merge_consecutive_modes() {
        let rows = [row(0.0, Mode::StaticSearch), row(0.1, Mode::StaticSearch), row(0.2, Mode::AimCamera)];
        let segs = mode_segments(&rows);
        assert_eq!(segs, vec![(Mode::StaticSearch, 0.0, 0.2), (Mode::AimCamera, 0.2, 0.2)]);
    }

    #[test]
    fn svg_and_text_outputs() {
        let rows = [row(0.0, Mode::StaticSearch), row(1.0, Mode::AimCamera)];
        let dir = tempfile::tempdir().unwrap();
        let svg = dir.path().join("p.svg");
        write_plot(&rows, &svg).unwrap();
        let body = fs::read_to_string(&svg).unwrap();
        assert!(body.starts_with("<svg") && body.trim_end().ends_with("</svg>"));
        let txt = dir.path().join("p.txt");
        write_plot(&rows, &txt).unwrap();
        assert!(fs::read_to_string(&txt).unwrap().contains("aim_camera"));
    }

    #[test]
    fn empty_record_rejected() {
        assert!(write_plot(&[], Path::new("x.txt")).is_err());
    }
}
