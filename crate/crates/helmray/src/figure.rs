//! Static SVG rendering of trajectory files: all rays as thin polylines,
//! the rays launched at +-w0 emphasized, and (for Gaussian runs) the
//! analytic waist lines dashed on top. Axes are in w0 / Rayleigh-length
//! units. Output bytes are deterministic.

use crate::csvio::{Source, TrajectoryRow};
use crate::error::{Result, SimError};
use crate::scenarios::gaussian_waist_reference;
use crate::units::{rayleigh_length, UnitSystem};

use std::collections::BTreeMap;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Data-to-pixel mapping of the plot area.
#[derive(Debug, Clone, Copy)]
pub struct PlotFrame {
    pub z_max: f64,
    pub x_max: f64,
}

impl PlotFrame {
    pub fn plot_height(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    pub fn to_px(&self, z: f64, x: f64) -> (f64, f64) {
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = self.plot_height();
        (
            MARGIN_LEFT + z / self.z_max * pw,
            MARGIN_TOP + (1.0 - (x + self.x_max) / (2.0 * self.x_max)) * ph,
        )
    }
}

/// Groups exact-source rows into per-ray (z, x) paths ordered by time.
pub fn ray_paths(rows: &[TrajectoryRow]) -> BTreeMap<usize, Vec<(f64, f64)>> {
    let mut paths: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in rows {
        if r.source == Source::Exact {
            paths.entry(r.ray_id).or_default().push((r.t, r.z, r.x));
        }
    }
    paths
        .into_iter()
        .map(|(id, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (id, pts.into_iter().map(|(_, z, x)| (z, x)).collect())
        })
        .collect()
}

/// Builds the plot frame covering all exact trajectories.
pub fn frame_for(rows: &[TrajectoryRow]) -> Result<PlotFrame> {
    let mut z_max = 0.0f64;
    let mut x_max = 0.0f64;
    let mut any = false;
    for r in rows {
        if r.source != Source::Exact {
            continue;
        }
        any = true;
        z_max = z_max.max(r.z);
        x_max = x_max.max(r.x.abs());
    }
    if !any || !(z_max > 0.0) {
        return Err(SimError::DegenerateFront(
            "no exact trajectory rows to plot".into(),
        ));
    }
    Ok(PlotFrame {
        z_max,
        x_max: x_max * 1.05,
    })
}

/// The ray ids whose launch position is closest to +w0 and -w0.
pub fn emphasized_rays(rows: &[TrajectoryRow], u: &UnitSystem) -> Vec<usize> {
    let paths = ray_paths(rows);
    let mut best = [(usize::MAX, f64::INFINITY); 2];
    for (&id, pts) in &paths {
        let x0 = pts[0].1;
        for (k, target) in [u.w0, -u.w0].iter().enumerate() {
            let d = (x0 - target).abs();
            if d < best[k].1 {
                best[k] = (id, d);
            }
        }
    }
    best.iter().map(|&(id, _)| id).filter(|&id| id != usize::MAX).collect()
}

fn polyline(points: &[(f64, f64)], frame: &PlotFrame, style: &str) -> String {
    let mut pts = String::new();
    for &(z, x) in points {
        let (px, py) = frame.to_px(z, x);
        pts.push_str(&format!("{px:.2},{py:.2} "));
    }
    format!("<polyline points=\"{}\" fill=\"none\" {style}/>\n", pts.trim_end())
}

fn axes(frame: &PlotFrame, u: &UnitSystem) -> String {
    let mut out = String::new();
    let (ox, oy) = frame.to_px(0.0, -frame.x_max / 1.05);
    let (ex, _) = frame.to_px(frame.z_max, 0.0);
    let (_, ty) = frame.to_px(0.0, frame.x_max / 1.05);
    out.push_str(&format!(
        "<line x1=\"{ox:.2}\" y1=\"{oy:.2}\" x2=\"{ex:.2}\" y2=\"{oy:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{ox:.2}\" y1=\"{oy:.2}\" x2=\"{ox:.2}\" y2=\"{ty:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    // z ticks in Rayleigh lengths
    let z_r = rayleigh_length(u);
    let mut k = 0;
    while (k as f64) * z_r <= frame.z_max * (1.0 + 1e-12) {
        let (px, _) = frame.to_px(k as f64 * z_r, 0.0);
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{oy:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            oy + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{k}</text>\n",
            oy + 20.0
        ));
        k += 1;
    }
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">z / z_R</text>\n",
        (ox + ex) / 2.0,
        oy + 38.0
    ));
    // x ticks in w0
    let x_span = frame.x_max / u.w0;
    let step = if x_span > 20.0 { (x_span / 10.0).ceil() as i64 } else { 1 };
    let mut m = -(x_span.floor() as i64);
    while m as f64 <= x_span {
        if m % step == 0 {
            let (_, py) = frame.to_px(0.0, m as f64 * u.w0);
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{ox:.2}\" y2=\"{py:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
                ox - 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{m}</text>\n",
                ox - 9.0,
                py + 4.0
            ));
        }
        m += 1;
    }
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">x / w0</text>\n",
        (oy + ty) / 2.0,
        (oy + ty) / 2.0
    ));
    out
}

/// Renders rows into an SVG document. With `overlay` the analytic waist
/// lines are drawn dashed (meaningful for Gaussian runs only).
pub fn render_svg(rows: &[TrajectoryRow], u: &UnitSystem, overlay: bool) -> Result<String> {
    let frame = frame_for(rows)?;
    let paths = ray_paths(rows);
    let heavy = emphasized_rays(rows, u);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&axes(&frame, u));

    for (id, pts) in &paths {
        if heavy.contains(id) {
            continue;
        }
        svg.push_str(&polyline(pts, &frame, "stroke=\"#777777\" stroke-width=\"0.6\""));
    }
    for id in &heavy {
        svg.push_str(&polyline(
            &paths[id],
            &frame,
            "stroke=\"black\" stroke-width=\"2\"",
        ));
    }
    if overlay {
        let n = 256;
        for sign in [1.0, -1.0] {
            let pts: Vec<(f64, f64)> = (0..=n)
                .map(|i| {
                    let z = frame.z_max * i as f64 / n as f64;
                    (z, sign * gaussian_waist_reference(z, u))
                })
                .collect();
            svg.push_str(&polyline(
                &pts,
                &frame,
                "stroke=\"#cc2222\" stroke-width=\"1.2\" stroke-dasharray=\"7 5\"",
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
