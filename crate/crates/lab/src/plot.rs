//! Self-contained SVG line charts. Output depends only on the input numbers,
//! so identical tables give identical files.

use std::fmt::Write;

use crate::config::Experiment;

/// Curve drawn dashed next to the measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Values taken from another column.
    Column(&'static str),
    Constant(f64),
    /// `y ∝ x^exponent`, anchored at the first plotted point.
    PowerLaw(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub column: &'static str,
    pub log_x: bool,
    pub log_y: bool,
    pub reference: Option<(String, Reference)>,
}

impl PlotSpec {
    fn new(column: &'static str, log_x: bool, log_y: bool) -> Self {
        Self {
            column,
            log_x,
            log_y,
            reference: None,
        }
    }

    fn with_reference(mut self, label: impl Into<String>, r: Reference) -> Self {
        self.reference = Some((label.into(), r));
        self
    }
}

/// Charts for an experiment; `s` and `theta` fix the reference slopes.
pub fn plot_specs(experiment: Experiment, s: f64, theta: f64) -> Vec<PlotSpec> {
    match experiment {
        Experiment::ProfileBound | Experiment::EpsSquared => vec![
            PlotSpec::new("hs_norm_at_t_n", true, true)
                .with_reference("kappa (lambda t)^s", Reference::Column("predicted_hs")),
            PlotSpec::new("ratio1_lower", true, false),
            PlotSpec::new("ratio2_h0", true, false),
            PlotSpec::new("ratio2_h1", true, false),
            PlotSpec::new("ratio2_h2", true, false),
            PlotSpec::new("ratio3_sup", true, false).with_reference("bound 1", Reference::Constant(1.0)),
            PlotSpec::new("ratio4_gradient", true, false),
        ],
        Experiment::Coarea => vec![PlotSpec::new("g", true, true).with_reference("no decay", Reference::PowerLaw(0.0))],
        Experiment::Perturbation => [
            ("defect_h0", 0.0),
            ("defect_h1", 1.0),
            ("defect_h2", 2.0),
            ("defect_hs", s),
        ]
        .into_iter()
        .map(|(c, nu)| {
            let rate = nu - s - theta;
            PlotSpec::new(c, true, true).with_reference(format!("n^{rate:.3}"), Reference::PowerLaw(rate))
        })
        .collect(),
        Experiment::Fsp => vec![PlotSpec::new("discrepancy", true, true)],
        Experiment::Inflation => vec![
            PlotSpec::new("sup_hs", false, true),
            PlotSpec::new("localized_hs", false, true)
                .with_reference("kappa (lambda t)^s", Reference::Column("predicted_rate")),
            PlotSpec::new("single_bump_discrepancy", false, true),
        ],
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Axis> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1e-12) };
            lo -= pad;
            hi += pad;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Some(Axis { log, lo, hi })
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            if b - a >= 1 {
                let step = ((b - a) as f64 / 6.0).ceil().max(1.0) as i32;
                return (a..=b).step_by(step as usize).map(|e| 10f64.powi(e)).collect();
            }
            return (0..5)
                .map(|i| 10f64.powf(self.lo + (self.hi - self.lo) * (0.1 + 0.2 * i as f64)))
                .collect();
        }
        (0..5)
            .map(|i| self.lo + (self.hi - self.lo) * (0.1 + 0.2 * i as f64))
            .collect()
    }
}

fn usable(v: f64, log: bool) -> bool {
    v.is_finite() && (!log || v > 0.0)
}

/// Renders one chart. Points that cannot be placed (non-finite, or
/// non-positive on a log axis) are skipped.
pub fn render_svg(
    title: &str,
    x_label: &str,
    x: &[f64],
    y: &[f64],
    spec: &PlotSpec,
    reference: Option<&[f64]>,
) -> String {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| usable(**a, spec.log_x) && usable(**b, spec.log_y))
        .map(|(a, b)| (*a, *b))
        .collect();
    let refs: Vec<(f64, f64)> = reference
        .map(|r| {
            x.iter()
                .zip(r)
                .filter(|(a, b)| usable(**a, spec.log_x) && usable(**b, spec.log_y))
                .map(|(a, b)| (*a, *b))
                .collect()
        })
        .unwrap_or_default();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let x_axis = Axis::fit(pts.iter().chain(&refs).map(|p| p.0), spec.log_x);
    let y_axis = Axis::fit(pts.iter().chain(&refs).map(|p| p.1), spec.log_y);
    let (Some(xa), Some(ya)) = (x_axis, y_axis) else {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">no plottable data</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + pw * xa.frac(v);
    let py = |v: f64| TOP + ph * (1.0 - ya.frac(v));

    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in xa.ticks() {
        let p = px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{p:.2}" y1="{:.2}" x2="{p:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(t)
        );
    }
    for t in ya.ticks() {
        let p = py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{p:.2}" x2="{LEFT}" y2="{p:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            p + 4.0,
            tick_label(t)
        );
    }
    let scale = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label),
        scale(spec.log_x)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(spec.column),
        scale(spec.log_y)
    );

    if refs.len() > 1 {
        let line: Vec<String> = refs
            .iter()
            .map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
            line.join(" ")
        );
    }
    if pts.len() > 1 {
        let line: Vec<String> = pts
            .iter()
            .map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="2"/>"##,
            line.join(" ")
        );
    }
    for (a, b) in &pts {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#1f4e9c"/>"##,
            px(*a),
            py(*b)
        );
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f4e9c" stroke-width="2"/>"##,
        LEFT + 12.0,
        TOP + 14.0,
        LEFT + 36.0,
        TOP + 14.0
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}">measured</text>"#, LEFT + 42.0, TOP + 18.0);
    if let Some((label, _)) = spec.reference.as_ref().filter(|_| refs.len() > 1) {
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
            LEFT + 12.0,
            TOP + 32.0,
            LEFT + 36.0,
            TOP + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            LEFT + 42.0,
            TOP + 36.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reference values aligned with `x`, or `None` when the spec has none or a
/// referenced column is missing.
pub fn reference_values(
    spec: &PlotSpec,
    x: &[f64],
    y: &[f64],
    column: impl Fn(&str) -> Option<Vec<f64>>,
) -> Option<Vec<f64>> {
    match spec.reference.as_ref()?.1 {
        Reference::Column(name) => column(name),
        Reference::Constant(c) => Some(vec![c; x.len()]),
        Reference::PowerLaw(p) => {
            let (x0, y0) = x
                .iter()
                .zip(y)
                .find(|(a, b)| usable(**a, spec.log_x) && usable(**b, spec.log_y))?;
            Some(x.iter().map(|v| y0 * (v / x0).powf(p)).collect())
        }
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_deterministic_and_well_formed() {
        let spec = PlotSpec::new("g", true, true).with_reference("flat", Reference::PowerLaw(0.0));
        let x = [1.0, 10.0, 100.0];
        let y = [2.0, 2.1, 1.9];
        let r = reference_values(&spec, &x, &y, |_| None).unwrap();
        assert_eq!(r, vec![2.0, 2.0, 2.0]);
        let a = render_svg("t", "x", &x, &y, &spec, Some(&r));
        let b = render_svg("t", "x", &x, &y, &spec, Some(&r));
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 3);
        assert!(a.contains("stroke-dasharray"));
    }

    #[test]
    fn unplottable_points_are_skipped() {
        let spec = PlotSpec::new("y", false, true);
        let svg = render_svg("t", "x", &[1.0, 2.0, 3.0], &[0.0, f64::NAN, 1.0], &spec, None);
        assert_eq!(svg.matches("<circle").count(), 1);
        let empty = render_svg("t", "x", &[1.0], &[f64::NAN], &spec, None);
        assert!(empty.contains("no plottable data"));
    }

    #[test]
    fn every_experiment_has_charts() {
        for e in Experiment::ALL {
            assert!(!plot_specs(e, 0.3, 0.05).is_empty());
        }
    }
}
