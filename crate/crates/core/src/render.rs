//! SVG rendering of the class scatterplot matrix.
//!
//! Cell `(i, i)` holds a disc in the class color with the class name. Below
//! the diagonal, cell `(i, j)` (`i > j`) shows the discriminant scatter of
//! pair `(j, i)`; its mirror `(j, i)` shows the bootstrap ROC cell of the same
//! pair. Every cell group carries `data-row`, `data-col` and, off the
//! diagonal, `data-pair="a-b"`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{BootstrapRocSummary, ConfusionMatrix};
use crate::projection::PairProjection;
use crate::scalar::Real;

pub const DEFAULT_CELL_SIZE: f64 = 160.0;
pub const POINT_RADIUS: f64 = 2.0;
/// Neutral grey at 75% lightness for background-class points.
pub const BACKGROUND_GREY: &str = "#bfbfbf";
pub const BOOTSTRAP_RED: &str = "#ff0000";
pub const OBSERVED_BLUE: &str = "#0000ff";
pub const BOOTSTRAP_OPACITY: f64 = 0.1;

/// Qualitative palette used for the first ten classes.
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#17becf",
];

const PADDING_FRACTION: f64 = 0.06;
const FIT_MARGIN: f64 = 1.05;

/// `k` distinct colors: [`DEFAULT_PALETTE`] then evenly spaced hues.
pub fn default_palette(k: usize) -> Vec<String> {
    let mut out: Vec<String> = DEFAULT_PALETTE.iter().take(k).map(|s| s.to_string()).collect();
    let extra = k.saturating_sub(out.len());
    for i in 0..extra {
        let hue = (i as f64 + 0.5) / extra as f64 * 360.0;
        let mut attempt = 0;
        let mut color = hsl_hex(hue, 0.55, 0.45);
        while out.contains(&color) || color == BACKGROUND_GREY {
            attempt += 1;
            color = hsl_hex(hue + attempt as f64 * 0.7, 0.55, 0.45);
        }
        out.push(color);
    }
    out
}

fn hsl_hex(hue: f64, sat: f64, light: f64) -> String {
    let c = (1.0 - (2.0 * light - 1.0).abs()) * sat;
    let h = hue.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = light - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// One class pair: its projection and the bootstrap ROC summary of axis 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry<T: Real> {
    pub projection: PairProjection<T>,
    pub summary: BootstrapRocSummary<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSplomModel<T: Real> {
    pub class_names: Vec<String>,
    pub palette: Vec<String>,
    /// One entry per unordered pair, ordered `(0,1), (0,2), .., (K-2,K-1)`.
    pub pairs: Vec<PairEntry<T>>,
    pub confusion: Option<ConfusionMatrix>,
}

impl<T: Real> ClassSplomModel<T> {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn pair(&self, class_a: usize, class_b: usize) -> Option<&PairEntry<T>> {
        self.pairs
            .iter()
            .find(|p| p.projection.class_a == class_a && p.projection.class_b == class_b)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_classes();
        if k < 2 {
            return Err(Error::InvalidData(format!("model has {k} classes")));
        }
        if self.palette.len() != k {
            return Err(Error::InvalidData(format!(
                "palette has {} colors for {k} classes",
                self.palette.len()
            )));
        }
        let distinct: HashSet<&String> = self.palette.iter().collect();
        if distinct.len() != k {
            return Err(Error::InvalidData("palette colors must be distinct".into()));
        }
        if self.pairs.len() != k * (k - 1) / 2 {
            return Err(Error::InvalidData(format!(
                "model has {} pairs, expected {}",
                self.pairs.len(),
                k * (k - 1) / 2
            )));
        }
        let mut seen = HashSet::new();
        for entry in &self.pairs {
            let (a, b) = (entry.projection.class_a, entry.projection.class_b);
            if a >= b || b >= k {
                return Err(Error::InvalidData(format!("invalid pair ({a}, {b})")));
            }
            if !seen.insert((a, b)) {
                return Err(Error::InvalidData(format!("duplicate pair ({a}, {b})")));
            }
        }
        if let Some(cm) = &self.confusion {
            if cm.num_classes() != k {
                return Err(Error::InvalidData(format!(
                    "confusion matrix is {0}x{0} for {k} classes",
                    cm.num_classes()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub cell_size: f64,
    pub point_radius: f64,
    /// Write the `AUC=..  AUCBA=..±..` label inside ROC cells.
    pub annotate_auc: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            cell_size: DEFAULT_CELL_SIZE,
            point_radius: POINT_RADIUS,
            annotate_auc: true,
        }
    }
}

impl RenderOptions {
    pub fn with_cell_size(cell_size: f64) -> Self {
        Self {
            cell_size,
            ..Self::default()
        }
    }
}

/// A standalone SVG 1.1 document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgDocument {
    pub text: String,
}

impl SvgDocument {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, &self.text).map_err(|e| Error::io(path, e))
    }
}

/// Square plot box inside a cell: origin offset and side length.
fn plot_box(cell_size: f64) -> (f64, f64) {
    let pad = cell_size * PADDING_FRACTION;
    (pad, cell_size - 2.0 * pad)
}

pub fn render_scatter_cell<T: Real>(pp: &PairProjection<T>, palette: &[String], cell_size: f64) -> String {
    scatter_fragment(pp, palette, &RenderOptions::with_cell_size(cell_size))
}

fn scatter_fragment<T: Real>(pp: &PairProjection<T>, palette: &[String], opts: &RenderOptions) -> String {
    let (a, b) = (pp.class_a, pp.class_b);
    let xy = |i: usize| (pp.coords[(i, 0)].as_f64(), pp.coords[(i, 1)].as_f64());
    let pair_points: Vec<usize> = (0..pp.point_class.len())
        .filter(|&i| pp.point_class[i] == a || pp.point_class[i] == b)
        .collect();

    // Pair points fit the box with a margin; one scale for both axes.
    let count = pair_points.len().max(1) as f64;
    let (sx, sy) = pair_points.iter().fold((0.0, 0.0), |(sx, sy), &i| {
        let (x, y) = xy(i);
        (sx + x, sy + y)
    });
    let (cx, cy) = (sx / count, sy / count);
    let half = pair_points
        .iter()
        .map(|&i| {
            let (x, y) = xy(i);
            (x - cx).abs().max((y - cy).abs())
        })
        .fold(0.0f64, f64::max)
        * FIT_MARGIN;
    let half = if half > 0.0 && half.is_finite() { half } else { 1.0 };
    let (origin, side) = plot_box(opts.cell_size);
    let scale = side / 2.0 / half;
    let mid = origin + side / 2.0;

    let mut out = String::new();
    let clip = format!("clip-{a}-{b}");
    let _ = write!(
        out,
        r#"<g class="scatter-cell" data-pair="{a}-{b}"><clipPath id="{clip}"><rect x="{origin:.3}" y="{origin:.3}" width="{side:.3}" height="{side:.3}"/></clipPath><g clip-path="url(#{clip})">"#
    );
    let mut draw = |i: usize, fill: &str| {
        let (x, y) = xy(i);
        let px = mid + (x - cx) * scale;
        let py = mid - (y - cy) * scale;
        let _ = write!(
            out,
            r#"<circle cx="{px:.3}" cy="{py:.3}" r="{r}" fill="{fill}" data-class="{c}"/>"#,
            r = opts.point_radius,
            c = pp.point_class[i]
        );
    };
    let classes = &pp.point_class;
    for i in (0..classes.len()).filter(|&i| classes[i] != a && classes[i] != b) {
        draw(i, BACKGROUND_GREY);
    }
    for i in (0..classes.len()).filter(|&i| classes[i] == b) {
        draw(i, &palette[b]);
    }
    for i in (0..classes.len()).filter(|&i| classes[i] == a) {
        draw(i, &palette[a]);
    }
    out.push_str("</g></g>");
    out
}

pub fn render_roc_cell<T: Real>(summary: &BootstrapRocSummary<T>, cell_size: f64) -> String {
    roc_fragment(summary, None, &RenderOptions::with_cell_size(cell_size))
}

fn polyline_points<T: Real>(points: &[(T, T)], origin: f64, side: f64) -> String {
    let mut s = String::new();
    for (k, (fpr, tpr)) in points.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let x = origin + fpr.as_f64() * side;
        let y = origin + side - tpr.as_f64() * side;
        let _ = write!(s, "{x:.3},{y:.3}");
    }
    s
}

fn roc_fragment<T: Real>(summary: &BootstrapRocSummary<T>, pair: Option<(usize, usize)>, opts: &RenderOptions) -> String {
    let (origin, side) = plot_box(opts.cell_size);
    let mut out = String::from(r#"<g class="roc-cell""#);
    if let Some((a, b)) = pair {
        let _ = write!(out, r#" data-pair="{a}-{b}""#);
    }
    out.push('>');
    let _ = write!(
        out,
        r##"<rect x="{origin:.3}" y="{origin:.3}" width="{side:.3}" height="{side:.3}" fill="none" stroke="#888888" stroke-width="0.5"/><line x1="{origin:.3}" y1="{end:.3}" x2="{end:.3}" y2="{origin:.3}" stroke="#888888" stroke-width="0.5" stroke-dasharray="2,2"/>"##,
        end = origin + side
    );
    for curve in &summary.bootstrap_curves {
        let _ = write!(
            out,
            r#"<polyline class="roc-bootstrap" points="{}" fill="none" stroke="{BOOTSTRAP_RED}" stroke-width="1" opacity="{BOOTSTRAP_OPACITY}"/>"#,
            polyline_points(&curve.points, origin, side)
        );
    }
    let _ = write!(
        out,
        r#"<polyline class="roc-observed" points="{}" fill="none" stroke="{OBSERVED_BLUE}" stroke-width="1.5" opacity="1"/>"#,
        polyline_points(&summary.observed.points, origin, side)
    );
    if opts.annotate_auc {
        let _ = write!(
            out,
            r#"<text class="roc-label" x="{x:.3}" y="{y:.3}" text-anchor="end" font-size="{fs:.1}">{}</text>"#,
            auc_label(summary),
            x = origin + side - 2.0,
            y = origin + side - 4.0,
            fs = (opts.cell_size / 20.0).max(6.0)
        );
    }
    out.push_str("</g>");
    out
}

/// `AUC=0.94  AUCBA=0.84±0.05`.
pub fn auc_label<T: Real>(summary: &BootstrapRocSummary<T>) -> String {
    format!(
        "AUC={:.2}  AUCBA={:.2}±{:.2}",
        summary.observed.auc.as_f64(),
        summary.aucba.as_f64(),
        summary.aucba_std.as_f64()
    )
}

fn disc_fragment(name: &str, color: &str, cell_size: f64) -> String {
    let c = cell_size / 2.0;
    format!(
        r#"<g class="disc-cell"><circle class="class-disc" cx="{c:.3}" cy="{c:.3}" r="{r:.3}" fill="{color}"/><text x="{c:.3}" y="{c:.3}" text-anchor="middle" dominant-baseline="central" font-size="{fs:.1}" font-weight="bold">{}</text></g>"#,
        escape_xml(name),
        r = cell_size * 0.4,
        fs = (cell_size / 8.0).max(8.0)
    )
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

pub fn render_classsplom<T: Real>(model: &ClassSplomModel<T>, opts: &RenderOptions) -> Result<SvgDocument> {
    model.validate()?;
    if !opts.cell_size.is_finite() || opts.cell_size <= 0.0 {
        return Err(Error::Config(format!("cell size must be positive, got {}", opts.cell_size)));
    }
    let k = model.num_classes();
    let cell = opts.cell_size;
    let size = cell * k as f64;

    let mut out = String::new();
    let _ = write!(
        out,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}" data-classes="{k}" data-cell-size="{cell}">
<style>text {{ font-family: sans-serif; fill: #000000; }}</style>
<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>
"##
    );
    for row in 0..k {
        for col in 0..k {
            let body = match row.cmp(&col) {
                std::cmp::Ordering::Equal => disc_fragment(&model.class_names[row], &model.palette[row], cell),
                std::cmp::Ordering::Greater => {
                    let entry = model.pair(col, row).ok_or_else(|| {
                        Error::InvalidData(format!("missing pair ({col}, {row})"))
                    })?;
                    scatter_fragment(&entry.projection, &model.palette, opts)
                }
                std::cmp::Ordering::Less => {
                    let entry = model.pair(row, col).ok_or_else(|| {
                        Error::InvalidData(format!("missing pair ({row}, {col})"))
                    })?;
                    roc_fragment(&entry.summary, Some((row, col)), opts)
                }
            };
            let _ = writeln!(
                out,
                r##"<g class="cell" data-row="{row}" data-col="{col}" transform="translate({x},{y})"><rect class="cell-border" x="0.5" y="0.5" width="{w}" height="{w}" fill="none" stroke="#000000" stroke-width="1"/>{body}</g>"##,
                x = col as f64 * cell,
                y = row as f64 * cell,
                w = cell - 1.0
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(SvgDocument { text: out })
}
