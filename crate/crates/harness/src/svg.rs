//! Minimal static SVG renderings: the critical-difference diagram and the
//! per-aspect bucketed line charts. Deterministic output, no dependencies.

use ctxrec_core::behavior::BucketedReport;
use ctxrec_core::eval::CdRanking;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Critical-difference diagram: a rank axis with one tick per model and
/// thick bars underneath joining cliques of non-significant models.
pub fn cd_diagram(cd: &CdRanking) -> String {
    let m = cd.labels.len();
    let width = 640.0;
    let margin = 60.0;
    let axis_y = 50.0;
    let label_row_h = 18.0;
    let clique_row_h = 8.0;
    let height = axis_y + 30.0 + m as f64 * label_row_h + cd.cliques.len() as f64 * clique_row_h + 30.0;

    let min_rank = 1.0;
    let max_rank = m.max(2) as f64;
    let x_of = |rank: f64| margin + (rank - min_rank) / (max_rank - min_rank) * (width - 2.0 * margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<line x1="{}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#,
        x_of(min_rank),
        x_of(max_rank)
    ));
    svg.push('\n');
    for tick in 1..=m.max(2) {
        let x = x_of(tick as f64);
        svg.push_str(&format!(
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{tick}</text>"#,
            axis_y - 4.0,
            axis_y + 4.0,
            axis_y - 8.0
        ));
        svg.push('\n');
    }
    // One labeled stem per model, best rank first.
    for (row, &idx) in cd.order.iter().enumerate() {
        let rank = cd.average_ranks[idx];
        let x = x_of(rank);
        let y = axis_y + 26.0 + row as f64 * label_row_h;
        svg.push_str(&format!(
            r##"<line x1="{x}" y1="{axis_y}" x2="{x}" y2="{y}" stroke="#888" stroke-width="0.7"/>"##
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="start">{} ({:.3})</text>"#,
            x + 4.0,
            y + 4.0,
            escape(&cd.labels[idx]),
            rank
        ));
        svg.push('\n');
    }
    // Clique bars just under the axis.
    for (ci, clique) in cd.cliques.iter().enumerate() {
        let lo = clique
            .iter()
            .map(|&i| cd.average_ranks[i])
            .fold(f64::INFINITY, f64::min);
        let hi = clique
            .iter()
            .map(|&i| cd.average_ranks[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let y = axis_y + 8.0 + ci as f64 * clique_row_h;
        svg.push_str(&format!(
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-width="3"/>"#,
            x_of(lo) - 3.0,
            x_of(hi) + 3.0
        ));
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}

/// Line chart of per-bucket mean metric, one polyline per model.
pub fn bucketed_chart(report: &BucketedReport) -> String {
    let width = 560.0;
    let height = 360.0;
    let margin = 50.0;
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;

    let flat: Vec<f64> = report
        .bucket_means
        .iter()
        .flat_map(|row| row.iter().flatten().copied())
        .collect();
    let y_max = flat.iter().cloned().fold(f64::MIN, f64::max).max(1e-12);
    let x_of = |bucket: usize| margin + bucket as f64 / 4.0 * plot_w;
    let y_of = |v: f64| height - margin - (v / y_max) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{} behavior vs. metric</text>"#,
        width / 2.0,
        escape(report.aspect.name())
    ));
    // Axes.
    svg.push_str(&format!(
        r#"<line x1="{margin}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{margin}" y1="{margin}" x2="{margin}" y2="{}" stroke="black"/>"#,
        height - margin,
        width - margin,
        height - margin,
        height - margin
    ));
    svg.push('\n');
    for b in 0..5 {
        let x = x_of(b);
        svg.push_str(&format!(
            r#"<text x="{x}" y="{}" text-anchor="middle">{:.3}</text>"#,
            height - margin + 16.0,
            report.boundaries[b]
        ));
    }
    svg.push('\n');
    for (mi, label) in report.model_labels.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()];
        let points: Vec<String> = report.bucket_means[mi]
            .iter()
            .enumerate()
            .filter_map(|(b, v)| v.map(|v| format!("{:.2},{:.2}", x_of(b), y_of(v))))
            .collect();
        if points.len() >= 2 {
            svg.push_str(&format!(
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            ));
        }
        for p in &points {
            let mut it = p.split(',');
            let (x, y) = (it.next().unwrap(), it.next().unwrap());
            svg.push_str(&format!(r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#));
        }
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            width - margin + 4.0,
            margin + 14.0 * mi as f64,
            escape(label)
        ));
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}
