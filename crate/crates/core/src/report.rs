//! Small deterministic emitters for CSV rows and SVG line charts. No
//! plotting dependency; charts are a few polylines with axis ticks.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Line chart over slot indices `0..t`. Each series is (label, values,
/// color); `hline` draws a labelled horizontal reference line.
pub fn line_chart(
    t: usize,
    y_max: f64,
    series: &[(&str, &Vec<f64>, &str)],
    hline: Option<(&str, f64, &str)>,
) -> String {
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };
    let x_of = |i: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * i / ((t.max(2) - 1) as f64);
    let y_of = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v / y_max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        s,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // axes
    let _ = writeln!(
        s,
        "  <line x1=\"{m}\" y1=\"{y0}\" x2=\"{xr}\" y2=\"{y0}\" stroke=\"black\"/>",
        m = MARGIN,
        y0 = HEIGHT - MARGIN,
        xr = WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{y0}\" stroke=\"black\"/>",
        m = MARGIN,
        y0 = HEIGHT - MARGIN
    );
    // x ticks at every slot, y ticks at quarters
    for i in 0..t {
        let x = x_of(i as f64);
        let _ = writeln!(
            s,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"middle\">{i}</text>",
            y = HEIGHT - MARGIN + 16.0
        );
    }
    for q in 0..=4 {
        let v = y_max * q as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"end\">{v:.2}</text>",
            x = MARGIN - 6.0
        );
    }
    if let Some((label, v, color)) = hline {
        let y = y_of(v);
        let _ = writeln!(
            s,
            "  <line x1=\"{m}\" y1=\"{y:.2}\" x2=\"{xr}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-dasharray=\"6 3\"/>",
            m = MARGIN,
            xr = WIDTH - MARGIN
        );
        let _ = writeln!(
            s,
            "  <text x=\"{x}\" y=\"{yt:.2}\" fill=\"{color}\">{label}</text>",
            x = MARGIN + 4.0,
            yt = y - 5.0
        );
    }
    for (idx, (label, values, color)) in series.iter().enumerate() {
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_of(i as f64), y_of(v)))
            .collect();
        let _ = writeln!(
            s,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            "  <text x=\"{x}\" y=\"{y}\" fill=\"{color}\">{label}</text>",
            x = WIDTH - MARGIN - 150.0,
            y = MARGIN + 16.0 * idx as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Join cells into a CSV line using the plain Display form of each value.
pub fn csv_line<T: std::fmt::Display>(cells: &[T]) -> String {
    cells
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
