//! Metric records rendered as CSV tables and SVG error charts.
//!
//! Output is deterministic: records are sorted on a total key, floats
//! use shortest round-trip formatting, and nothing time- or
//! environment-dependent is written, so identical inputs produce
//! byte-identical files. Not-applicable cells become empty CSV fields
//! and omitted chart points, never zeros.

use crate::error::{Error, Result};
use crate::formats::fmt_f64;
use crate::harness::metrics::MetricRecord;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const METRICS_HEADER: &str = "experiment,model,train_res,test_res,rl2e,n,seconds";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn metrics_csv_text(records: &[MetricRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.model,
            r.train_res,
            r.test_res,
            fmt_opt(r.rl2e),
            r.n,
            fmt_opt(r.seconds)
        );
    }
    out
}

pub fn write_metrics_csv(records: &[MetricRecord], path: &Path) -> Result<()> {
    std::fs::write(path, metrics_csv_text(records))?;
    Ok(())
}

pub const HISTORY_HEADER: &str = "epoch,train_loss,val_rl2e,lr";

pub fn history_csv_text(history: &[crate::harness::train::EpochRecord]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in history {
        let _ = writeln!(out, "{},{},{},{}", r.epoch, fmt_f64(r.train_loss), fmt_f64(r.val_rl2e), fmt_f64(r.lr));
    }
    out
}

pub fn write_history_csv(history: &[crate::harness::train::EpochRecord], path: &Path) -> Result<()> {
    std::fs::write(path, history_csv_text(history))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("metrics line {line}: bad {name} value '{field}'")))
}

fn parse_opt(field: &str, name: &str, line: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    Ok(Some(parse_field(field, name, line)?))
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == METRICS_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "metrics header must be '{METRICS_HEADER}', got {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut records = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Format(format!("metrics line {}: expected 7 fields, got {}", k + 1, f.len())));
        }
        records.push(MetricRecord {
            experiment: f[0].to_string(),
            model: f[1].to_string(),
            train_res: parse_field(f[2], "train_res", k + 1)?,
            test_res: parse_field(f[3], "test_res", k + 1)?,
            rl2e: parse_opt(f[4], "rl2e", k + 1)?,
            n: parse_field(f[5], "n", k + 1)?,
            seconds: parse_opt(f[6], "seconds", k + 1)?,
        });
    }
    Ok(records)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricRecord>> {
    parse_metrics_csv(&std::fs::read_to_string(path)?)
}

// ── SVG chart ───────────────────────────────────────────────────────

const CHART_W: f64 = 640.0;
const CHART_H: f64 = 420.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 58.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn c(v: f64) -> String {
    format!("{v:.2}")
}

/// Line chart of mean RL2E against test resolution, one polyline per
/// (model, train resolution) series, for records sharing one
/// experiment. Cells without a value are left out of their series.
pub fn render_error_chart(experiment: &str, records: &[MetricRecord]) -> String {
    // Sorted maps keep series and point order independent of input
    // order, which keeps the output byte-stable.
    let mut series: BTreeMap<(String, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for r in records {
        if let Some(e) = r.rl2e {
            series.entry((r.model.clone(), r.train_res)).or_default().insert(r.test_res, e);
        }
    }
    series.retain(|_, pts| !pts.is_empty());

    let xs: Vec<usize> = {
        let mut v: Vec<usize> =
            series.values().flat_map(|pts| pts.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        if v.is_empty() {
            v = vec![0];
        }
        v
    };
    let (x_lo, x_hi) = (*xs.first().unwrap() as f64, *xs.last().unwrap() as f64);
    let y_hi = series
        .values()
        .flat_map(|pts| pts.values().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-12)
        * 1.1;

    let plot_w = CHART_W - MARGIN_L - MARGIN_R;
    let plot_h = CHART_H - MARGIN_T - MARGIN_B;
    let x_of = |r: f64| {
        if x_hi > x_lo {
            MARGIN_L + (r - x_lo) / (x_hi - x_lo) * plot_w
        } else {
            MARGIN_L + plot_w / 2.0
        }
    };
    let y_of = |e: f64| MARGIN_T + plot_h - e / y_hi * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(s, "<rect width=\"{CHART_W}\" height=\"{CHART_H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{experiment}: relative L2 error across test resolutions</text>",
        c(CHART_W / 2.0)
    );

    // Axes.
    let x0 = MARGIN_L;
    let y0 = MARGIN_T + plot_h;
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        c(x0),
        c(MARGIN_T),
        c(x0),
        c(y0)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        c(x0),
        c(y0),
        c(MARGIN_L + plot_w),
        c(y0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">test resolution</text>",
        c(MARGIN_L + plot_w / 2.0),
        c(CHART_H - 14.0)
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">relative L2 error</text>",
        c(MARGIN_T + plot_h / 2.0),
        c(MARGIN_T + plot_h / 2.0)
    );

    for &r in &xs {
        let x = x_of(r as f64);
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>",
            c(x),
            c(y0),
            c(y0 + 5.0)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{r}</text>",
            c(x),
            c(y0 + 22.0)
        );
    }
    for k in 0..=4 {
        let v = y_hi * k as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\"/>",
            c(x0 - 5.0),
            c(x0),
            c(y)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4}</text>",
            c(x0 - 9.0),
            c(y + 4.0),
            v
        );
    }

    if series.is_empty() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no data</text>",
            c(MARGIN_L + plot_w / 2.0),
            c(MARGIN_T + plot_h / 2.0)
        );
    }

    for (si, ((model, train_res), pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let points: Vec<String> =
            pts.iter().map(|(&r, &e)| format!("{},{}", c(x_of(r as f64)), c(y_of(e)))).collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            points.join(" ")
        );
        for (&r, &e) in pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                c(x_of(r as f64)),
                c(y_of(e))
            );
        }
        // Legend entry.
        let ly = MARGIN_T + 8.0 + si as f64 * 18.0;
        let lx = MARGIN_L + plot_w - 150.0;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            c(lx),
            c(ly),
            c(lx + 22.0)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\">{model} (trained at {train_res})</text>",
            c(lx + 28.0),
            c(ly + 4.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write `summary.csv` plus one `<experiment>.svg` per experiment into
/// `dir`, returning the written paths. Records are sorted on
/// (experiment, model, train_res, test_res) so identical inputs give
/// byte-identical files regardless of input order.
pub fn write_report(records: &[MetricRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidArg("no metric records to report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| {
        (&a.experiment, &a.model, a.train_res, a.test_res)
            .cmp(&(&b.experiment, &b.model, b.train_res, b.test_res))
    });

    let mut written = Vec::new();
    let csv_path = dir.join("summary.csv");
    write_metrics_csv(&sorted, &csv_path)?;
    written.push(csv_path);

    let mut by_experiment: BTreeMap<&str, Vec<MetricRecord>> = BTreeMap::new();
    for r in &sorted {
        by_experiment.entry(&r.experiment).or_default().push(r.clone());
    }
    for (experiment, recs) in by_experiment {
        let path = dir.join(format!("{experiment}.svg"));
        std::fs::write(&path, render_error_chart(experiment, &recs))?;
        written.push(path);
    }
    Ok(written)
}
