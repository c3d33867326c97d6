//! CSV tables and SVG plots.
//!
//! Every plot is written next to a CSV with the same basename holding
//! exactly the plotted data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{sort_rows, ResultRow};
use crate::oracle::OutcomeCurveRow;
use crate::rating::KCurve;

pub const RESULTS_HEADER: &str = "method,budget,m_mean,r_mean,r_ci_low,r_ci_high,n_seeds";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.method,
            r.budget_requested,
            r.m_actual_mean,
            r.r_mean,
            r.r_ci_low,
            r.r_ci_high,
            r.n_seeds
        );
    }
    out
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_file(path, &results_csv(rows))
}

/// Parses a file written by [`write_results_csv`].
pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::Input(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || Error::Input(format!("{}: malformed row {}", path.display(), i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(ResultRow {
                method: f[0].to_string(),
                budget_requested: f[1].parse().map_err(|_| bad())?,
                m_actual_mean: real(f[2])?,
                r_mean: real(f[3])?,
                r_ci_low: real(f[4])?,
                r_ci_high: real(f[5])?,
                n_seeds: f[6].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn outcome_curve_csv(rows: &[OutcomeCurveRow]) -> String {
    let mut out = String::from("delta,p_win,p_tie,p_loss\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6}",
            r.delta, r.p_win, r.p_tie, r.p_loss
        );
    }
    out
}

pub fn k_curve_csv(curve: &KCurve) -> String {
    let mut out = String::from("rating_diff");
    for k in &curve.k_values {
        let _ = write!(out, ",k_{k}");
    }
    out.push('\n');
    for (d, changes) in &curve.rows {
        let _ = write!(out, "{d:.6}");
        for c in changes {
            let _ = write!(out, ",{c:.6}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    CorrelationBars,
    SweepBands,
    OutcomeCurve,
    KCurve,
}

/// Input to [`write_plot`]; the variant picks the plot kind.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    CorrelationBars(&'a [ResultRow]),
    SweepBands(&'a [ResultRow]),
    OutcomeCurve(&'a [OutcomeCurveRow]),
    KCurve(&'a KCurve),
}

impl PlotData<'_> {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotData::CorrelationBars(_) => PlotKind::CorrelationBars,
            PlotData::SweepBands(_) => PlotKind::SweepBands,
            PlotData::OutcomeCurve(_) => PlotKind::OutcomeCurve,
            PlotData::KCurve(_) => PlotKind::KCurve,
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            PlotData::CorrelationBars(r) | PlotData::SweepBands(r) => r.is_empty(),
            PlotData::OutcomeCurve(r) => r.is_empty(),
            PlotData::KCurve(c) => c.rows.is_empty() || c.k_values.is_empty(),
        }
    }

    fn csv(&self) -> String {
        match self {
            PlotData::CorrelationBars(r) | PlotData::SweepBands(r) => results_csv(r),
            PlotData::OutcomeCurve(r) => outcome_curve_csv(r),
            PlotData::KCurve(c) => k_curve_csv(c),
        }
    }
}

/// Sibling CSV path of a plot file.
pub fn sibling_csv(svg_path: &Path) -> PathBuf {
    svg_path.with_extension("csv")
}

/// Writes the SVG at `path` and its data at [`sibling_csv`]`(path)`.
pub fn write_plot(data: PlotData<'_>, path: &Path) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Input(format!(
            "nothing to plot for {}",
            path.display()
        )));
    }
    let svg = match data {
        PlotData::CorrelationBars(rows) => correlation_bars(rows),
        PlotData::SweepBands(rows) => sweep_bands(rows),
        PlotData::OutcomeCurve(rows) => outcome_plot(rows),
        PlotData::KCurve(curve) => k_plot(curve),
    };
    write_file(path, &svg)?;
    write_file(&sibling_csv(path), &data.csv())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Plot area with linear axes and a legend column on the right.
struct Canvas {
    body: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    legend: Vec<(String, String, bool)>,
}

impl Canvas {
    fn new(
        title: &str,
        x_label: &str,
        y_label: &str,
        x_range: (f64, f64),
        y_range: (f64, f64),
    ) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            escape(title)
        );
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        );
        let _ = writeln!(
            body,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(y_label)
        );
        let mut canvas = Self {
            body,
            x_range,
            y_range,
            legend: Vec::new(),
        };
        canvas.axes();
        canvas
    }

    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        LEFT + (x - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&mut self) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            self.body,
            r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#
        );
        for i in 0..=5 {
            let t = i as f64 / 5.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let (x, y) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                self.body,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                tick(yv)
            );
        }
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let d: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed {
            r#" stroke-dasharray="6,4""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            d.join(" ")
        );
    }

    /// Shaded region between `lower` and `upper` over the same x values.
    fn band(&mut self, xs: &[f64], lower: &[f64], upper: &[f64], color: &str) {
        let mut pts: Vec<String> = xs
            .iter()
            .zip(upper)
            .map(|(&x, &y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        pts.extend(
            xs.iter()
                .zip(lower)
                .rev()
                .map(|(&x, &y)| format!("{:.2},{:.2}", self.px(x), self.py(y))),
        );
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            pts.join(" ")
        );
    }

    fn marker(&mut self, x: f64, y: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"/>"#,
            self.px(x),
            self.py(y)
        );
    }

    fn error_bar(&mut self, x: f64, lo: f64, hi: f64) {
        let (px, a, b) = (self.px(x), self.py(lo), self.py(hi));
        let _ = writeln!(
            self.body,
            r#"<path d="M{px:.2},{a:.2} L{px:.2},{b:.2} M{:.2},{a:.2} L{:.2},{a:.2} M{:.2},{b:.2} L{:.2},{b:.2}" stroke="black"/>"#,
            px - 5.0,
            px + 5.0,
            px - 5.0,
            px + 5.0
        );
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, color: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (top, bottom) = (self.py(y1), self.py(y0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{a:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            b - a,
            bottom - top
        );
    }

    fn label(&mut self, x: f64, y: f64, text: &str, rotate: bool) {
        let (px, py) = (self.px(x), self.py(y));
        let rot = if rotate {
            format!(r#" transform="rotate(-35 {px:.2} {py:.2})""#)
        } else {
            String::new()
        };
        let _ = writeln!(
            self.body,
            r#"<text x="{px:.2}" y="{py:.2}" text-anchor="end" font-size="11"{rot}>{}</text>"#,
            escape(text)
        );
    }

    fn legend(&mut self, name: &str, color: &str, dashed: bool) {
        self.legend
            .push((name.to_string(), color.to_string(), dashed));
    }

    fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push_str(&self.body);
        let x = WIDTH - RIGHT + 15.0;
        for (i, (name, color, dashed)) in self.legend.iter().enumerate() {
            let y = TOP + 10.0 + i as f64 * 20.0;
            let dash = if *dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="3"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
                x + 25.0,
                x + 32.0,
                y + 4.0,
                escape(name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn padded(range: (f64, f64)) -> (f64, f64) {
    let pad = (range.1 - range.0) * 0.05;
    (range.0 - pad, range.1 + pad)
}

fn correlation_bars(rows: &[ResultRow]) -> String {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let n = rows.len() as f64;
    let y_lo = rows.iter().map(|r| r.r_ci_low).fold(0.0f64, f64::min);
    let mut c = Canvas::new(
        "Correlation of estimated vs true value",
        "method",
        "Pearson r",
        (0.0, n),
        (y_lo, 1.0),
    );
    for (i, r) in rows.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let x = i as f64;
        c.rect(x + 0.15, x + 0.85, y_lo, r.r_mean, color);
        c.error_bar(x + 0.5, r.r_ci_low, r.r_ci_high);
        let name = if r.budget_requested == 0 {
            format!("{} (M={:.0})", r.method, r.m_actual_mean)
        } else {
            format!("{} (M={})", r.method, r.budget_requested)
        };
        c.legend(&name, color, false);
        c.label(x + 0.6, y_lo, &r.method, true);
    }
    c.finish()
}

fn sweep_bands(rows: &[ResultRow]) -> String {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let budgets = rows
        .iter()
        .filter(|r| r.budget_requested > 0)
        .map(|r| r.budget_requested as f64);
    let x_range = span(budgets.chain(std::iter::once(0.0)));
    let y_range = padded(span(rows.iter().flat_map(|r| [r.r_ci_low, r.r_ci_high])));
    let mut c = Canvas::new(
        "Correlation by total number of comparisons",
        "comparisons",
        "Pearson r",
        x_range,
        y_range,
    );
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.dedup();
    for (i, method) in methods.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let own: Vec<&ResultRow> = rows.iter().filter(|r| r.method == *method).collect();
        if own.len() == 1 && own[0].budget_requested == 0 {
            // Natural-budget reference: horizontal line across the plot.
            let r = own[0].r_mean;
            c.polyline(&[(x_range.0, r), (x_range.1, r)], color, true);
            c.legend(
                &format!("{method} (M={:.0})", own[0].m_actual_mean),
                color,
                true,
            );
        } else if method.contains("copeland") {
            for r in &own {
                c.error_bar(r.budget_requested as f64, r.r_ci_low, r.r_ci_high);
                c.marker(r.budget_requested as f64, r.r_mean, color);
            }
            c.legend(method, color, false);
        } else {
            let xs: Vec<f64> = own.iter().map(|r| r.budget_requested as f64).collect();
            let lo: Vec<f64> = own.iter().map(|r| r.r_ci_low).collect();
            let hi: Vec<f64> = own.iter().map(|r| r.r_ci_high).collect();
            c.band(&xs, &lo, &hi, color);
            let mean: Vec<(f64, f64)> = own
                .iter()
                .map(|r| (r.budget_requested as f64, r.r_mean))
                .collect();
            c.polyline(&mean, color, false);
            c.legend(method, color, false);
        }
    }
    c.finish()
}

fn outcome_plot(rows: &[OutcomeCurveRow]) -> String {
    let x_range = span(rows.iter().map(|r| r.delta));
    let mut c = Canvas::new(
        "Comparison outcome probabilities",
        "value difference",
        "probability",
        x_range,
        (0.0, 1.0),
    );
    for (i, name) in ["win", "tie", "loss"].into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.delta, [r.p_win, r.p_tie, r.p_loss][i]))
            .collect();
        c.polyline(&pts, PALETTE[i], false);
        c.legend(name, PALETTE[i], false);
    }
    c.finish()
}

fn k_plot(curve: &KCurve) -> String {
    let x_range = span(curve.rows.iter().map(|r| r.0));
    let y_range = padded(span(curve.rows.iter().flat_map(|r| r.1.iter().copied())));
    let mut c = Canvas::new(
        "Elo change by initial rating difference",
        "initial rating difference (winner - loser)",
        "rating change",
        x_range,
        (y_range.0.min(0.0), y_range.1),
    );
    for (i, k) in curve.k_values.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve.rows.iter().map(|(d, v)| (*d, v[i])).collect();
        c.polyline(&pts, color, false);
        c.legend(&format!("K = {k}"), color, false);
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EloBase, OracleConfig};
    use crate::oracle::outcome_curve;
    use crate::rating::k_curve;

    fn row(method: &str, budget: usize, r: f64) -> ResultRow {
        ResultRow {
            method: method.into(),
            budget_requested: budget,
            m_actual_mean: budget as f64,
            r_mean: r,
            r_ci_low: r - 0.01,
            r_ci_high: r + 0.01,
            n_seeds: 3,
        }
    }

    #[test]
    fn empty_rows_header_only() {
        assert_eq!(results_csv(&[]), format!("{RESULTS_HEADER}\n"));
    }

    #[test]
    fn csv_sorted_fixed_width_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let rows: Vec<ResultRow> = (0..8)
            .map(|i| row(&format!("m{}", 7 - i), 100 * i, 0.5 + i as f64 / 100.0))
            .collect();
        write_results_csv(&rows, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.ends_with('\n'));
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("m0,700,700.000000,0.570000"));
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back.len(), 8);
        assert_eq!(results_csv(&back), text);
        let again = dir.path().join("again.csv");
        write_results_csv(&rows, &again).unwrap();
        assert_eq!(fs::read(&again).unwrap(), fs::read(&path).unwrap());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_results_csv(&[], Path::new("/no/such/dir/x.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn plots_write_svg_and_sibling() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = vec![
            row("bradley_terry", 500, 0.8),
            row("bradley_terry", 1000, 0.9),
            row("borda_copeland", 4950, 0.96),
            row("swiss_infogain", 0, 0.95),
        ];
        let path = dir.path().join("sweep.svg");
        write_plot(PlotData::SweepBands(&sweep), &path).unwrap();
        let svg = fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(
            fs::read_to_string(sibling_csv(&path)).unwrap(),
            results_csv(&sweep)
        );

        let path = dir.path().join("results.svg");
        write_plot(PlotData::CorrelationBars(&sweep), &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap().matches("<rect").count(),
            5
        );

        let cfg = OracleConfig::default().with_base(EloBase::Ten);
        let curve = outcome_curve(&[-400.0, 0.0, 400.0], &cfg);
        let path = dir.path().join("outcome_curve.svg");
        write_plot(PlotData::OutcomeCurve(&curve), &path).unwrap();
        let csv = fs::read_to_string(sibling_csv(&path)).unwrap();
        assert_eq!(csv.lines().next(), Some("delta,p_win,p_tie,p_loss"));
        assert_eq!(csv.lines().count(), 4);

        let kc = k_curve(&[-400.0, 0.0, 400.0], &[10.0, 20.0, 32.0, 40.0], &cfg);
        let path = dir.path().join("k_curve.svg");
        write_plot(PlotData::KCurve(&kc), &path).unwrap();
        let csv = fs::read_to_string(sibling_csv(&path)).unwrap();
        assert_eq!(csv.lines().next(), Some("rating_diff,k_10,k_20,k_32,k_40"));
        assert_eq!(
            fs::read_to_string(&path)
                .unwrap()
                .matches("<polyline")
                .count(),
            4
        );
    }

    #[test]
    fn empty_plot_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_plot(PlotData::SweepBands(&[]), &dir.path().join("x.svg")).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
