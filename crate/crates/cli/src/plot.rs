//! Deterministic SVG rendering of a phase histogram.
//!
//! Bars show the bin probabilities; an optional exact spectrum is overlaid
//! as vertical impulses and an optional estimate as diamond markers, both on
//! the same normalized-mass scale as the bars. The output depends only on
//! the inputs (fixed canvas, fixed number formatting), so repeated renders
//! are byte-identical.

use std::fmt::Write;

use dosqpe_core::{EstimateEntry, PhaseHistogram, Spectrum};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 44.0;

struct Frame {
    ymax: f64,
}

impl Frame {
    fn x(&self, phase: f64) -> f64 {
        LEFT + phase * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, value: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        HEIGHT - BOTTOM - (value / self.ymax).clamp(0.0, 1.0) * h
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Render `histogram` (normalized to probabilities) with optional exact and
/// estimate overlays. `exact` must already be in phase units.
pub fn render_svg(
    histogram: &PhaseHistogram,
    exact: Option<&Spectrum>,
    estimate: Option<&[EstimateEntry]>,
) -> String {
    let probabilities = histogram.probabilities();
    let bins = probabilities.len();

    let exact_masses: Vec<(f64, f64)> = exact
        .map(|s| {
            let total = s.total_degeneracy() as f64;
            s.entries()
                .iter()
                .map(|e| (e.phase.rem_euclid(1.0), e.degeneracy as f64 / total))
                .collect()
        })
        .unwrap_or_default();
    let estimate_masses: Vec<(f64, f64)> = estimate
        .map(|entries| {
            let total: u64 = entries.iter().map(|e| e.d_hat).sum();
            let total = (total.max(1)) as f64;
            entries
                .iter()
                .map(|e| (e.theta_hat.rem_euclid(1.0), e.d_hat as f64 / total))
                .collect()
        })
        .unwrap_or_default();

    let mut ymax = probabilities.iter().copied().fold(0.0f64, f64::max);
    for (_, w) in exact_masses.iter().chain(&estimate_masses) {
        ymax = ymax.max(*w);
    }
    let frame = Frame {
        ymax: if ymax > 0.0 { ymax * 1.05 } else { 1.0 },
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<style>text{{font-family:monospace;font-size:12px;fill:#333}}.bar{{fill:#7a9cc6}}.ex{{stroke:#b03a2e;stroke-width:1.5}}.est{{fill:#1e8449}}.axis{{stroke:#333;stroke-width:1}}.tick{{stroke:#333;stroke-width:1}}</style>"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Bars, centered on their bin phase and clamped to the plot area.
    let bar_width = (WIDTH - LEFT - RIGHT) / bins as f64;
    let baseline = frame.y(0.0);
    for (bin, p) in probabilities.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        let center = frame.x(histogram.phase_of_bin(bin));
        let left = (center - bar_width / 2.0).max(LEFT);
        let right = (center + bar_width / 2.0).min(WIDTH - RIGHT);
        let top = frame.y(*p);
        let _ = writeln!(
            svg,
            r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}"/>"#,
            px(left),
            px(top),
            px(right - left),
            px(baseline - top),
        );
    }

    for (phase, weight) in &exact_masses {
        let x = px(frame.x(*phase));
        let _ = writeln!(
            svg,
            r#"<line class="ex" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
            px(baseline),
            px(frame.y(*weight)),
        );
    }

    for (phase, weight) in &estimate_masses {
        let x = frame.x(*phase);
        let y = frame.y(*weight);
        let _ = writeln!(
            svg,
            r#"<path class="est" d="M{} {} L{} {} L{} {} L{} {} Z"/>"#,
            px(x),
            px(y - 5.0),
            px(x + 5.0),
            px(y),
            px(x),
            px(y + 5.0),
            px(x - 5.0),
            px(y),
        );
    }

    // Axes and ticks.
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        px(LEFT),
        px(baseline),
        px(WIDTH - RIGHT),
        px(baseline),
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        px(LEFT),
        px(TOP),
        px(LEFT),
        px(baseline),
    );
    for k in 0..=4 {
        let phase = k as f64 / 4.0;
        let x = frame.x(phase);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            px(x),
            px(baseline),
            px(x),
            px(baseline + 4.0),
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{phase:.2}</text>"#,
            px(x),
            px(baseline + 18.0),
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">phase</text>"#,
        px(frame.x(0.5)),
        px(baseline + 34.0),
    );
    for (value, label) in [(0.0, "0".to_string()), (frame.ymax, format!("{:.3}", frame.ymax))] {
        let y = frame.y(value);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            px(LEFT - 4.0),
            px(y),
            px(LEFT),
            px(y),
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{label}</text>"#,
            px(LEFT - 8.0),
            px(y + 4.0),
        );
    }

    // Legend for whichever layers are present.
    let mut ly = TOP + 8.0;
    let lx = WIDTH - RIGHT - 120.0;
    let _ = writeln!(
        svg,
        r#"<rect class="bar" x="{}" y="{}" width="10" height="10"/><text x="{}" y="{}">bins</text>"#,
        px(lx),
        px(ly - 9.0),
        px(lx + 16.0),
        px(ly),
    );
    if !exact_masses.is_empty() {
        ly += 16.0;
        let _ = writeln!(
            svg,
            r#"<line class="ex" x1="{}" y1="{}" x2="{}" y2="{}"/><text x="{}" y="{}">exact</text>"#,
            px(lx + 5.0),
            px(ly - 10.0),
            px(lx + 5.0),
            px(ly + 1.0),
            px(lx + 16.0),
            px(ly),
        );
    }
    if !estimate_masses.is_empty() {
        ly += 16.0;
        let _ = writeln!(
            svg,
            r#"<path class="est" d="M{} {} L{} {} L{} {} L{} {} Z"/><text x="{}" y="{}">estimate</text>"#,
            px(lx + 5.0),
            px(ly - 9.0),
            px(lx + 10.0),
            px(ly - 4.0),
            px(lx + 5.0),
            px(ly + 1.0),
            px(lx),
            px(ly - 4.0),
            px(lx + 16.0),
            px(ly),
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use dosqpe_core::sim::HistogramKind;
    use dosqpe_core::SpectrumEntry;

    fn toy_histogram() -> PhaseHistogram {
        PhaseHistogram::from_probabilities(2, vec![0.5, 0.25, 0.125, 0.125]).unwrap()
    }

    #[test]
    fn draws_one_bar_per_nonempty_bin() {
        let svg = render_svg(&toy_histogram(), None, None);
        assert_eq!(svg.matches(r#"<rect class="bar""#).count(), 4 + 1); // + legend swatch
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn overlays_appear_when_supplied() {
        let spectrum = Spectrum::new(vec![
            SpectrumEntry {
                phase: 0.0,
                degeneracy: 2,
            },
            SpectrumEntry {
                phase: 0.25,
                degeneracy: 1,
            },
        ])
        .unwrap();
        let estimate = [EstimateEntry {
            theta_hat: 0.25,
            d_hat: 1,
        }];
        let svg = render_svg(&toy_histogram(), Some(&spectrum), Some(&estimate));
        assert_eq!(svg.matches(r#"<line class="ex""#).count(), 2 + 1);
        assert_eq!(svg.matches(r#"<path class="est""#).count(), 1 + 1);
    }

    #[test]
    fn renders_are_byte_identical() {
        let a = render_svg(&toy_histogram(), None, None);
        let b = render_svg(&toy_histogram(), None, None);
        assert_eq!(a, b);
        let counts = PhaseHistogram::from_counts(2, vec![8.0, 4.0, 2.0, 2.0]).unwrap();
        assert_eq!(counts.kind(), HistogramKind::Counts);
        assert_eq!(render_svg(&counts, None, None), a);
    }
}
