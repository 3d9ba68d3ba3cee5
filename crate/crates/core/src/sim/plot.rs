//! Self-contained SVG plots of estimation-error norms.

use super::record::{SimRecord, SimRow};
use std::fmt::Write as _;
use std::path::Path;

/// Values below this are clamped on log axes.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    pub log_scale: bool,
    pub width: f64,
    pub panel_height: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { log_scale: true, width: 800.0, panel_height: 260.0 }
    }
}

type Series = (&'static str, &'static str, fn(&SimRow) -> f64);

const FORCE_SERIES: [Series; 3] = [
    ("FFTS-ESO", "#1f77b4", |r| r.e_phi.norm()),
    ("LESO", "#d62728", |r| r.baselines.map_or(f64::NAN, |b| b.leso_phi.norm())),
    ("FxTSDO", "#2ca02c", |r| r.baselines.map_or(f64::NAN, |b| b.fxtsdo_phi.norm())),
];

const TORQUE_SERIES: [Series; 3] = [
    ("FFTS-ESO", "#1f77b4", |r| r.e_tau.norm()),
    ("LESO", "#d62728", |r| r.baselines.map_or(f64::NAN, |b| b.leso_tau.norm())),
    ("FxTSDO", "#2ca02c", |r| r.baselines.map_or(f64::NAN, |b| b.fxtsdo_tau.norm())),
];

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 110.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 30.0;

fn transform(y: f64, log: bool) -> f64 {
    let y = if y.is_finite() { y } else { f64::MAX };
    if log { y.max(LOG_FLOOR).log10() } else { y }
}

fn panel(out: &mut String, rec: &SimRecord, series: &[Series], title: &str, top: f64, o: &PlotOptions) {
    let active: Vec<&Series> = series.iter().take(if rec.with_baselines { 3 } else { 1 }).collect();
    let (t0, t1) = match (rec.rows.first(), rec.rows.last()) {
        (Some(a), Some(b)) if b.t > a.t => (a.t, b.t),
        (Some(a), _) => (a.t, a.t + 1.0),
        _ => (0.0, 1.0),
    };
    let values: Vec<Vec<f64>> = active
        .iter()
        .map(|(_, _, f)| rec.rows.iter().map(|r| transform(f(r), o.log_scale)).collect())
        .collect();
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite() && *v < f64::MAX);
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (mut lo, mut hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    if o.log_scale {
        lo = lo.floor();
        hi = hi.ceil().min(12.0);
    } else {
        lo = lo.min(0.0);
    }
    if hi <= lo {
        hi = lo + 1.0;
    }

    let (x0, x1) = (MARGIN_L, o.width - MARGIN_R);
    let (y0, y1) = (top + MARGIN_T, top + o.panel_height - MARGIN_B);
    let sx = |t: f64| x0 + (t - t0) / (t1 - t0) * (x1 - x0);
    let sy = |v: f64| y1 - (v.clamp(lo, hi) - lo) / (hi - lo) * (y1 - y0);

    let _ = writeln!(out, r##"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444"/>"##, x1 - x0, y1 - y0);
    let _ = writeln!(out, r#"<text x="{x0:.3}" y="{:.3}" font-size="14">{title}</text>"#, y0 - 8.0);
    let scale = if o.log_scale { "log10" } else { "linear" };
    let _ = writeln!(out, r#"<text x="{:.3}" y="{y0:.3}" font-size="11" text-anchor="end">{hi:.1}</text>"#, x0 - 4.0);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{y1:.3}" font-size="11" text-anchor="end">{lo:.1}</text>"#, x0 - 4.0);
    let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{scale}</text>"#, x0 - 4.0, 0.5 * (y0 + y1));
    let _ = writeln!(out, r#"<text x="{x0:.3}" y="{:.3}" font-size="11">{t0:.1} s</text>"#, y1 + 16.0);
    let _ = writeln!(out, r#"<text x="{x1:.3}" y="{:.3}" font-size="11" text-anchor="end">{t1:.1} s</text>"#, y1 + 16.0);

    for (i, ((name, color, _), vals)) in active.iter().zip(&values).enumerate() {
        let _ = write!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points=""#);
        for (k, (row, v)) in rec.rows.iter().zip(vals).enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.3},{:.3}", sx(row.t), sy(*v));
        }
        out.push_str("\"/>\n");
        let ly = y0 + 14.0 + 16.0 * i as f64;
        let _ = writeln!(out, r#"<text x="{:.3}" y="{ly:.3}" font-size="12" fill="{color}">{name}</text>"#, x1 + 8.0);
    }
}

/// Two stacked panels of `‖e_φ‖` and `‖e_τ‖` against time, one series per observer.
pub fn render_svg(rec: &SimRecord, o: &PlotOptions) -> String {
    let height = 2.0 * o.panel_height;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" viewBox="0 0 {:.0} {height:.0}">"#,
        o.width, o.width
    );
    panel(&mut out, rec, &FORCE_SERIES, "force estimation error norm [N]", 0.0, o);
    panel(&mut out, rec, &TORQUE_SERIES, "torque estimation error norm [N*m]", o.panel_height, o);
    out.push_str("</svg>\n");
    out
}

pub fn emit_plots(rec: &SimRecord, path: &Path, o: &PlotOptions) -> std::io::Result<()> {
    std::fs::write(path, render_svg(rec, o))
}
