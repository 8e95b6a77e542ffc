use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{read_text, write_file};
use crate::config::{overlay, require, Common};
use crate::error::{data, CliError};

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// p@k curve written by `evaluate`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportRun {
    pub curve: Option<PathBuf>,
    pub out: PathBuf,
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl Default for ReportRun {
    fn default() -> Self {
        ReportRun {
            curve: None,
            out: PathBuf::from("precision.svg"),
            title: "Precision at k".to_owned(),
            width: 720,
            height: 440,
        }
    }
}

pub fn resolve(args: &ReportArgs) -> Result<ReportRun, CliError> {
    let mut cfg: ReportRun = crate::config::load(args.common.config.as_deref())?;
    overlay!(cfg, args, curve, out, title, width, height);
    Ok(cfg)
}

type Series = Vec<(String, Vec<(f64, f64)>)>;

fn parse_curve(path: &Path) -> Result<Series, CliError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "k,system,value" => {}
        _ => {
            return Err(data(format!(
                "{}: expected header k,system,value",
                path.display()
            )))
        }
    }
    let mut series: Series = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || {
            data(format!(
                "{}:{}: malformed row {line:?}",
                path.display(),
                i + 1
            ))
        };
        let mut parts = line.split(',');
        let (Some(k), Some(sys), Some(v), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let k: f64 = k.parse().map_err(|_| bad())?;
        let v: f64 = v.parse().map_err(|_| bad())?;
        match series.iter_mut().find(|(s, _)| s == sys) {
            Some((_, pts)) => pts.push((k, v)),
            None => series.push((sys.to_owned(), vec![(k, v)])),
        }
    }
    if series.is_empty() {
        return Err(data(format!("{}: no data rows", path.display())));
    }
    Ok(series)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// "Nice" upper bound for an axis: 1, 2 or 5 times a power of ten.
fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * p)
        .find(|&c| c >= x)
        .unwrap_or(10.0 * p)
}

pub fn render_svg(series: &Series, title: &str, width: u32, height: u32) -> String {
    let (w, h) = (f64::from(width), f64::from(height));
    let (left, right, top, bottom) = (64.0, 170.0, 40.0, 48.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let pts = series.iter().flat_map(|(_, p)| p);
    let x_max = pts.clone().map(|p| p.0).fold(1.0, f64::max);
    let y_max = nice_ceiling(pts.map(|p| p.1).fold(0.0, f64::max));
    let x_min = 1.0f64.min(x_max);
    let sx = |x: f64| {
        left + if x_max > x_min {
            (x - x_min) / (x_max - x_min) * pw
        } else {
            0.0
        }
    };
    let sy = |y: f64| top + ph - y / y_max * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    for i in 0..=5 {
        let y = y_max * f64::from(i) / 5.0;
        let py = sy(y);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#e0e0e0"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.3}</text>"#,
            left - 6.0,
            py + 4.0
        );
    }
    let x_ticks = 5;
    for i in 0..=x_ticks {
        let x = (x_min + (x_max - x_min) * f64::from(i) / f64::from(x_ticks)).round();
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#333"/>"##,
            top + ph,
            top + ph + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{x}</text>"#,
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">k</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">p@k</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 12.0 + 20.0 * i as f64;
        let lx = left + pw + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn run(cfg: &ReportRun) -> Result<(), CliError> {
    let series = parse_curve(require(&cfg.curve, "curve")?)?;
    let svg = render_svg(&series, &cfg.title, cfg.width.max(320), cfg.height.max(240));
    write_file(&cfg.out, svg.as_bytes())
}
