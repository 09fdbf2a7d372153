//! Deterministic artifact writers: TSV/CSV tables and a minimal SVG line
//! plot for ROC curves.

use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use fluscope_core::eval::RocCurve;

/// Fixed six-decimal formatting keeps artifacts byte-reproducible.
pub fn fmt6(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.6}")
}

pub fn write_table(
    path: &Path,
    sep: char,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(&sep.to_string()))?;
    for row in rows {
        writeln!(w, "{}", row.join(&sep.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tsv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_table(path, '\t', header, rows)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_table(path, ',', header, rows)
}

/// A ROC curve as a self-contained SVG line plot.
pub fn roc_svg(curve: &RocCurve, title: &str) -> String {
    const SIZE: f64 = 400.0;
    const MARGIN: f64 = 45.0;
    let scale = |v: f64| MARGIN + v * (SIZE - 2.0 * MARGIN);
    let flip = |v: f64| SIZE - scale(v);
    let mut points = String::new();
    for (fpr, tpr) in &curve.points {
        points.push_str(&format!("{:.2},{:.2} ", scale(*fpr), flip(*tpr)));
    }
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" ",
            "viewBox=\"0 0 400 400\">\n",
            "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n",
            "<line x1=\"{m}\" y1=\"{fm}\" x2=\"{e}\" y2=\"{fm}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{fm}\" x2=\"{m}\" y2=\"{fe}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{fm}\" x2=\"{e}\" y2=\"{fe}\" stroke=\"#bbbbbb\" ",
            "stroke-dasharray=\"4 4\"/>\n",
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n",
            "<text x=\"200\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{title}</text>\n",
            "<text x=\"200\" y=\"392\" text-anchor=\"middle\" font-size=\"11\">",
            "false positive rate</text>\n",
            "<text x=\"12\" y=\"200\" text-anchor=\"middle\" font-size=\"11\" ",
            "transform=\"rotate(-90 12 200)\">true positive rate</text>\n",
            "</svg>\n"
        ),
        m = MARGIN,
        e = SIZE - MARGIN,
        fm = SIZE - MARGIN,
        fe = MARGIN,
        pts = points.trim_end(),
        title = title,
    )
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
