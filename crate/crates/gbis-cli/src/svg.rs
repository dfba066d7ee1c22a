//! Minimal self-contained SVG 1.1 bar chart for median benchmark totals.

/// Renders one bar per `(label, milliseconds)` entry.
pub fn bar_chart(title: &str, entries: &[(String, f64)]) -> String {
    const BAR_WIDTH: f64 = 46.0;
    const BAR_GAP: f64 = 26.0;
    const LEFT: f64 = 70.0;
    const TOP: f64 = 48.0;
    const PLOT_HEIGHT: f64 = 260.0;
    const BOTTOM_PAD: f64 = 120.0;

    let max_value = entries.iter().map(|&(_, v)| v).fold(0.0, f64::max).max(1e-9);
    let width = LEFT + entries.len() as f64 * (BAR_WIDTH + BAR_GAP) + 40.0;
    let height = TOP + PLOT_HEIGHT + BOTTOM_PAD;
    let baseline = TOP + PLOT_HEIGHT;

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{:.0}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
        LEFT,
        escape(title)
    ));
    svg.push('\n');

    // Axes and a few horizontal gridlines with tick labels.
    svg.push_str(&format!(
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{baseline}" stroke="black"/>"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<line x1="{LEFT}" y1="{baseline}" x2="{:.1}" y2="{baseline}" stroke="black"/>"#,
        width - 20.0
    ));
    svg.push('\n');
    for step in 0..=4 {
        let frac = step as f64 / 4.0;
        let y = baseline - frac * PLOT_HEIGHT;
        svg.push_str(&format!(
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ccc" stroke-dasharray="3,3"/>"#,
            LEFT,
            width - 20.0
        ));
        svg.push('\n');
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{:.1} ms</text>"#,
            LEFT - 6.0,
            y + 4.0,
            frac * max_value
        ));
        svg.push('\n');
    }

    for (i, (label, value)) in entries.iter().enumerate() {
        let x = LEFT + BAR_GAP / 2.0 + i as f64 * (BAR_WIDTH + BAR_GAP);
        let bar_h = (value / max_value) * PLOT_HEIGHT;
        let y = baseline - bar_h;
        svg.push_str(&format!(
            r#"<rect x="{x:.1}" y="{y:.1}" width="{BAR_WIDTH}" height="{bar_h:.1}" fill="#4878a8"/>"#
        ));
        svg.push('\n');
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{value:.1}</text>"#,
            x + BAR_WIDTH / 2.0,
            y - 5.0
        ));
        svg.push('\n');
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end" transform="rotate(-45 {:.1} {:.1})">{}</text>"#,
            x + BAR_WIDTH / 2.0,
            baseline + 14.0,
            x + BAR_WIDTH / 2.0,
            baseline + 14.0,
            escape(label)
        ));
        svg.push('\n');
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
