//! Standalone SVG regret curves: one line per experiment with a 95% band.

use std::fmt::Write as _;

use super::output::OutputRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub experiment_id: String,
    /// `(t, mean, ci95)`, sorted by `t`.
    pub points: Vec<(f64, f64, f64)>,
}

/// Groups rows by experiment in order of first appearance.
pub fn group_series(records: &[OutputRecord]) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in records {
        let point = (r.t as f64, r.mean_cum_regret, r.ci95);
        match out.iter_mut().find(|s| s.experiment_id == r.experiment_id) {
            Some(s) => s.points.push(point),
            None => out.push(Series {
                experiment_id: r.experiment_id.clone(),
                points: vec![point],
            }),
        }
    }
    for s in &mut out {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(lo: f64, hi: f64, log: bool) -> Self {
        let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|i| {
                let v = self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64;
                if self.log {
                    10f64.powf(v)
                } else {
                    v
                }
            })
            .collect()
    }
}

/// Renders the series; `log_x` puts the round axis on a log scale.
pub fn render_svg(series: &[Series], log_x: bool) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let x_lo = all().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = all().map(|p| p.1 - p.2).fold(0.0, f64::min);
    let y_hi = all().map(|p| p.1 + p.2).fold(f64::NEG_INFINITY, f64::max);
    let x_axis = Axis::new(x_lo.max(if log_x { 1.0 } else { f64::NEG_INFINITY }), x_hi, log_x);
    let y_axis = Axis::new(y_lo, y_hi, false);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + plot_w * x_axis.frac(x);
    let py = |y: f64| MARGIN_TOP + plot_h * (1.0 - y_axis.frac(y));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Axes and ticks.
    let (left, right) = (MARGIN_LEFT, MARGIN_LEFT + plot_w);
    let (top, bottom) = (MARGIN_TOP, MARGIN_TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    for v in x_axis.ticks() {
        let x = px(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 20.0,
            tick_label(v)
        );
    }
    for v in y_axis.ticks() {
        let y = py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let x_label = if log_x { "round t (log scale)" } else { "round t" };
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        left + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" transform="translate(20,{:.2}) rotate(-90)" text-anchor="middle">mean cumulative regret</text>"#,
        top + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = s.points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1 + p.2)));
        let lower = s.points.iter().rev().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1 - p.2)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="ci-band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-experiment="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(&s.experiment_id),
            line.join(" ")
        );
    }

    if series.len() >= 2 {
        let _ = writeln!(svg, r#"<g class="legend">"#);
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = top + 10.0 + 18.0 * i as f64;
            let x = left + 15.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{:.2}">{}</text>"#,
                x + 20.0,
                x + 26.0,
                y + 4.0,
                escape(&s.experiment_id)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, t: usize, mean: f64) -> OutputRecord {
        OutputRecord {
            experiment_id: id.into(),
            policy: "bpr2".into(),
            environment: "e".into(),
            n: 100,
            t,
            mean_cum_regret: mean,
            stderr: 0.5,
            ci95: 0.98,
            episodes: 10,
            master_seed: 1,
        }
    }

    #[test]
    fn single_series_has_one_polyline_of_three_points() {
        let rows = vec![row("a", 100, 3.0), row("a", 10, 1.0), row("a", 50, 2.0)];
        let svg = render_svg(&group_series(&rows), false);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("class=\"series\"").nth(1).unwrap();
        let pts = pts.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 3);
        assert!(!svg.contains("class=\"legend\""));
        assert!(svg.contains("round t") && svg.contains("mean cumulative regret"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn two_series_get_a_legend() {
        let rows = vec![row("a", 10, 1.0), row("b<&>", 10, 2.0), row("a", 20, 1.5), row("b<&>", 20, 2.5)];
        let series = group_series(&rows);
        assert_eq!(series.len(), 2);
        let svg = render_svg(&series, true);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("class=\"legend\""));
        assert!(svg.contains("b&lt;&amp;&gt;"));
        assert!(svg.contains(PALETTE[0]) && svg.contains(PALETTE[1]));
    }

    #[test]
    fn grouping_sorts_by_round() {
        let s = group_series(&[row("a", 30, 3.0), row("a", 10, 1.0)]);
        assert_eq!(s[0].points.iter().map(|p| p.0).collect::<Vec<_>>(), vec![10.0, 30.0]);
    }
}
