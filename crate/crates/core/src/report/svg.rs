//! Standalone SVG charts: k* histograms and neighbour matrices.
//!
//! Output is plain text with fixed two-decimal coordinates, so identical
//! inputs give byte-identical files.

use std::fmt::Write;

use crate::neighbor_matrix::NeighborMatrix;

use super::{ClassRow, Histogram};

pub const SAME_CLASS_COLOR: &str = "#2ca02c";
pub const OTHER_CLASS_COLOR: &str = "#bbbbbb";

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 50.0;
const RIGHT: f64 = 15.0;
const TOP: f64 = 35.0;
const BOTTOM: f64 = 45.0;

pub fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Bar chart of one class's normalised k* counts, x-axis `[0, 1]`, bars in
/// the colour of the class's pattern.
pub fn histogram(row: &ClassRow, hist: &Histogram) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let max = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar_w = plot_w / hist.bins as f64;
    let base = TOP + plot_h;
    let color = row.pattern.color();

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{} {} (μ={:.2}, σ={:.2}, γ={:.2})</text>"#,
        WIDTH / 2.0,
        escape_xml(&row.class_name),
        row.pattern.glyph(),
        row.mu,
        row.sigma,
        row.gamma
    )
    .unwrap();
    writeln!(s, r#"<g fill="{color}" class="bars">"#).unwrap();
    for (i, &count) in hist.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let h = plot_h * count as f64 / max;
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"><title>{count}</title></rect>"#,
            LEFT + i as f64 * bar_w,
            base - h,
            bar_w,
            h
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();

    // Axes with ticks at quarters on x and at 0 / max on y.
    writeln!(
        s,
        r#"<path d="M{LEFT:.2},{TOP:.2} V{base:.2} H{:.2}" fill="none" stroke="black"/>"#,
        LEFT + plot_w
    )
    .unwrap();
    for q in 0..=4 {
        let x = LEFT + plot_w * q as f64 / 4.0;
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{base:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            base + 5.0,
            base + 18.0,
            q as f64 / 4.0
        )
        .unwrap();
    }
    for (value, y) in [(0.0, base), (max, TOP)] {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{value:.0}</text>"#,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">normalized k*</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">count</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

/// Same-class neighbours in green on a gray background, one row per sample
/// in display order. The dashed line runs from rank 0 on the first row to
/// rank `class_size` on the last row.
pub fn neighbor_matrix(matrix: &NeighborMatrix, class_name: &str, class_size: usize) -> String {
    let rows = matrix.num_rows().max(1) as f64;
    let cols = matrix.num_cols().max(1) as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let cw = plot_w / cols;
    let rh = plot_h / rows;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}: neighbour classes by rank</text>"#,
        WIDTH / 2.0,
        escape_xml(class_name)
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="{OTHER_CLASS_COLOR}"/>"#
    )
    .unwrap();
    writeln!(s, r#"<g fill="{SAME_CLASS_COLOR}" class="same">"#).unwrap();
    for (i, row) in matrix.rows.iter().enumerate() {
        let y = TOP + i as f64 * rh;
        let mut r = 0;
        while r < row.len() {
            if !row[r] {
                r += 1;
                continue;
            }
            let start = r;
            while r < row.len() && row[r] {
                r += 1;
            }
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{rh:.2}"/>"#,
                LEFT + start as f64 * cw,
                (r - start) as f64 * cw
            )
            .unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();
    writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
        LEFT + class_size as f64 * cw,
        TOP + plot_h
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">neighbour rank (1..{})</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        matrix.num_cols()
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">samples by k*</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
