//! Static SVG plot of sweep results over the analytic singlet curve.

use std::fmt::Write;

use bellsim::math::UnitVector3;
use bellsim::models::qm_correlation;

use crate::config::Kind;
use crate::document::SweepSeries;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x_min: f64,
    x_max: f64,
}

impl Frame {
    fn x(&self, deg: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(f64::EPSILON);
        MARGIN + (deg - self.x_min) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, value: f64) -> f64 {
        // fixed range [-1.1, 1.1]
        HEIGHT - MARGIN - (value + 1.1) / 2.2 * (HEIGHT - 2.0 * MARGIN)
    }
}

fn reference(kind: Kind, deg: f64) -> f64 {
    let b = UnitVector3::planar((kind.particle().angle_factor() * deg).to_radians());
    qm_correlation(&UnitVector3::X, &b, bellsim::models::ParticleKind::SpinHalf)
}

pub fn sweep_svg(kind: Kind, angles_deg: &[f64], series: &[SweepSeries<'_>]) -> String {
    let x_min = angles_deg.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = angles_deg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame { x_min, x_max };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for v in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let y = frame.y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"##,
            WIDTH - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for deg in [x_min, (x_min + x_max) / 2.0, x_max] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{deg}</text>"#,
            frame.x(deg),
            HEIGHT - MARGIN + 16.0
        );
    }
    let label = match kind {
        Kind::Spin => ("relative angle θ (degrees)", "−cos θ"),
        Kind::Photon => ("analyzer angle Δ (degrees)", "−cos 2Δ"),
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        label.0
    );

    let steps = 200;
    let curve: Vec<String> = (0..=steps)
        .map(|k| {
            let deg = x_min + (x_max - x_min) * k as f64 / steps as f64;
            format!("{:.2},{:.2}", frame.x(deg), frame.y(reference(kind, deg)))
        })
        .collect();
    let _ = writeln!(svg, r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#, curve.join(" "));

    let mut legend = vec![(label.1.to_string(), "black")];
    for (s, color) in series.iter().zip(COLORS.iter().cycle()) {
        for (point, &deg) in s.points.iter().zip(angles_deg) {
            let (x, e) = (frame.x(deg), &point.estimate);
            let (lo, hi) = (frame.y(e.mean() - e.stderr()), frame.y(e.mean() + e.stderr()));
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.y(e.mean())
            );
        }
        legend.push((s.model.to_string(), color));
    }
    for (k, (name, color)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            WIDTH - MARGIN - 120.0,
            y - 9.0,
            WIDTH - MARGIN - 104.0,
            y
        );
    }
    svg.push_str("</svg>\n");
    svg
}
