//! Self-contained SVG charts: BER curves over SNR, and flop/speedup
//! curves over the system size when flop data is present.

use std::io::Write;
use std::path::{Path, PathBuf};

use isic_core::detectors::Scheme;
use isic_core::sim::BerRecord;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    /// Raw data coordinates.
    pub points: Vec<(f64, f64)>,
}

pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn axis_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw_step = span / 6.0;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 7.0)
        .unwrap_or(mag * 10.0);
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + 1e-9 * span {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mut d = lo.floor();
    while d <= hi.ceil() + 1e-9 {
        if d >= lo - 1e-9 && d <= hi + 1e-9 {
            ticks.push(d);
        }
        d += 1.0;
    }
    if ticks.is_empty() {
        ticks.push(lo);
        ticks.push(hi);
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Render a line chart. Series points must already be finite; with
/// `log_y` the y values must be positive.
pub fn render_chart(spec: &ChartSpec) -> String {
    let tx = |v: f64| v;
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &spec.series {
        for &(x, y) in &s.points {
            x_lo = x_lo.min(tx(x));
            x_hi = x_hi.max(tx(x));
            y_lo = y_lo.min(ty(y));
            y_hi = y_hi.max(ty(y));
        }
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi - x_lo < 1e-9 {
        x_hi = x_lo + 1.0;
    }
    if y_hi - y_lo < 1e-9 {
        y_hi = y_lo + 1.0;
    }
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{}</text>\n",
        WIDTH / 2.0,
        spec.title
    ));

    // Gridlines and ticks.
    let xticks = axis_ticks(x_lo, x_hi);
    let yticks = if spec.log_y {
        log_ticks(y_lo, y_hi)
    } else {
        axis_ticks(y_lo, y_hi)
    };
    for &t in &xticks {
        let x = px(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
            MARGIN_T,
            MARGIN_T + plot_h
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
            MARGIN_T + plot_h + 20.0,
            fmt_tick(t)
        ));
    }
    for &t in &yticks {
        let y = py(t);
        let label = if spec.log_y {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n",
            MARGIN_L,
            MARGIN_L + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"12\">{label}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 14.0,
        spec.x_label
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" \
         transform=\"rotate(-90 20 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        spec.y_label
    ));

    // Series.
    for (idx, s) in spec.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
            .collect();
        if path.len() > 1 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(tx(x)),
                py(ty(y))
            ));
        }
        let ly = MARGIN_T + 16.0 + 18.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            MARGIN_L + plot_w - 170.0,
            MARGIN_L + plot_w - 140.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>\n",
            MARGIN_L + plot_w - 132.0,
            ly + 4.0,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("svg");
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn write_svg(path: &Path, content: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())
}

/// Emit whatever charts the records support; returns the written
/// paths. Insufficient data for a chart skips it silently (the caller
/// warns when nothing was written).
pub fn emit_plots(records: &[BerRecord], base: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    // BER curves: one series per (scheme, shape), zero-BER points
    // dropped from the log axis.
    let mut keys: Vec<(Scheme, usize, usize, usize, usize)> = records
        .iter()
        .map(|r| (r.scheme, r.n_tx, r.n_rx, r.order, r.iterations))
        .collect();
    keys.sort();
    keys.dedup();
    let mut ber_series = Vec::new();
    let mut distinct_snrs: Vec<u64> = records.iter().map(|r| r.snr_db.to_bits()).collect();
    distinct_snrs.sort();
    distinct_snrs.dedup();
    for key in &keys {
        let mut points: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| (r.scheme, r.n_tx, r.n_rx, r.order, r.iterations) == *key)
            .filter(|r| r.ber > 0.0)
            .map(|r| (r.snr_db, r.ber))
            .collect();
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if !points.is_empty() {
            ber_series.push(Series {
                label: format!("{} {}x{} {}qam K={}", key.0, key.2, key.1, key.3, key.4),
                points,
            });
        }
    }
    if distinct_snrs.len() >= 2 && !ber_series.is_empty() {
        let chart = render_chart(&ChartSpec {
            title: "Uncoded BER vs receive SNR".into(),
            x_label: "SNR (dB), N/sigma2 convention".into(),
            y_label: "BER".into(),
            log_y: true,
            series: ber_series,
        });
        write_svg(base, &chart)?;
        written.push(base.to_path_buf());
    }

    // Flop charts need measured data over at least two sizes.
    let mut sizes: Vec<usize> = records
        .iter()
        .filter(|r| r.flops_per_iter > 0.0)
        .map(|r| r.n_tx)
        .collect();
    sizes.sort();
    sizes.dedup();
    if sizes.len() >= 2 {
        let per_iter = |scheme: Scheme, n: usize| {
            records
                .iter()
                .find(|r| r.scheme == scheme && r.n_tx == n && r.flops_per_iter > 0.0)
                .map(|r| (r.flops_init, r.flops_per_iter, r.iterations))
        };
        let mut flop_series = Vec::new();
        for scheme in Scheme::ALL {
            let points: Vec<(f64, f64)> = sizes
                .iter()
                .filter_map(|&n| per_iter(scheme, n).map(|(_, f, _)| (n as f64, f)))
                .collect();
            if points.len() >= 2 {
                flop_series.push(Series {
                    label: format!("{scheme} per iteration"),
                    points,
                });
            }
        }
        if !flop_series.is_empty() {
            let chart = render_chart(&ChartSpec {
                title: "Measured flops per iteration".into(),
                x_label: "transmit streams N".into(),
                y_label: "flops".into(),
                log_y: true,
                series: flop_series,
            });
            let path = with_suffix(base, "_flops");
            write_svg(&path, &chart)?;
            written.push(path);
        }

        // Speedup of the recursive scheme over the affine-MMSE one.
        let mut per_iter_pts = Vec::new();
        let mut total_pts = Vec::new();
        for &n in &sizes {
            if let (Some((i1, f1, k1)), Some((i2, f2, _))) =
                (per_iter(Scheme::Ammse, n), per_iter(Scheme::Recursive, n))
            {
                per_iter_pts.push((n as f64, f1 / f2));
                let k = k1 as f64;
                total_pts.push((n as f64, (i1 + k * f1) / (i2 + k * f2)));
            }
        }
        if per_iter_pts.len() >= 2 {
            let chart = render_chart(&ChartSpec {
                title: "Speedup of the recursive scheme (flops ratio)".into(),
                x_label: "transmit streams N".into(),
                y_label: "alg1 / alg2 flops".into(),
                log_y: false,
                series: vec![
                    Series {
                        label: "per iteration".into(),
                        points: per_iter_pts,
                    },
                    Series {
                        label: "init + K iterations".into(),
                        points: total_pts,
                    },
                ],
            });
            let path = with_suffix(base, "_speedup");
            write_svg(&path, &chart)?;
            written.push(path);
        }
    }
    Ok(written)
}
