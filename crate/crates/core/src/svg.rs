//! Deterministic SVG rendering of cross-section datasets on `[-1, 1]²`.
//!
//! Output is a fixed 800×800 canvas with `viewBox="-1 -1 2 2"`; the section's
//! `y` axis points up, so every coordinate is written with `y` negated.
//! Numbers are printed with six decimals and negative zero is normalized,
//! which makes identical datasets render to identical bytes.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const CANVAS_PX: u32 = 800;

const FRAME_STROKE: f64 = 0.006;
const AXIS_STROKE: f64 = 0.003;
const CURVE_STROKE: f64 = 0.004;
const REGION_STROKE: f64 = 0.003;
const POINT_RADIUS: f64 = 0.004;

/// Grey levels for region shades 0..=3, light to dark.
const SHADES: [&str; 4] = ["#e6e6e6", "#bfbfbf", "#999999", "#666666"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureKind {
    Partition,
    Image,
    Cones,
    Horseshoe,
}

impl FigureKind {
    pub const ALL: [FigureKind; 4] = [
        FigureKind::Partition,
        FigureKind::Image,
        FigureKind::Cones,
        FigureKind::Horseshoe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Partition => "partition",
            FigureKind::Image => "image",
            FigureKind::Cones => "cones",
            FigureKind::Horseshoe => "horseshoe",
        }
    }

    fn title(self) -> &'static str {
        match self {
            FigureKind::Partition => "Domain partition of the Poincaré map",
            FigureKind::Image => "Image of the Poincaré map",
            FigureKind::Cones => "Sectional attractor (Cantor cones)",
            FigureKind::Horseshoe => "Fat horseshoe H_N in A",
        }
    }

    fn curve_color(self) -> &'static str {
        match self {
            FigureKind::Cones => "#1f3a93",
            FigureKind::Horseshoe => "#8b0000",
            _ => "#000000",
        }
    }
}

impl FromStr for FigureKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown figure kind {s:?}"))
    }
}

/// Filled polygon. `shade` indexes a fixed grey ramp; `dotted` overlays a dot pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub shade: u8,
    #[serde(default)]
    pub dotted: bool,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    #[serde(default)]
    pub dashed: bool,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Everything a section figure draws. All fields default to empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SectionDataset {
    pub regions: Vec<Region>,
    pub rects: Vec<Rect>,
    pub curves: Vec<Curve>,
    pub points: Vec<[f64; 2]>,
}

impl SectionDataset {
    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
            && self.rects.is_empty()
            && self.curves.is_empty()
            && self.points.is_empty()
    }
}

struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = format!("{:.6}", self.0);
        if s.trim_start_matches('-')
            .bytes()
            .all(|c| c == b'0' || c == b'.')
        {
            f.write_str("0.000000")
        } else {
            f.write_str(&s)
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn path_data(points: &[[f64; 2]], close: bool) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{} {}", Num(p[0]), Num(-p[1]));
    }
    if close {
        d.push('Z');
    }
    d
}

/// Renders `dataset` as a standalone SVG document in the style of `kind`.
pub fn render_section_svg(dataset: &SectionDataset, kind: FigureKind) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_PX}" height="{CANVAS_PX}" viewBox="-1 -1 2 2">"#
    );
    let _ = writeln!(out, "<title>{}</title>", kind.title());
    let _ = writeln!(
        out,
        r##"<defs><pattern id="dots" width="0.04" height="0.04" patternUnits="userSpaceOnUse"><circle cx="0.02" cy="0.02" r="0.005" fill="#000000"/></pattern></defs>"##
    );
    let _ = writeln!(
        out,
        r##"<rect x="-1" y="-1" width="2" height="2" fill="#ffffff"/>"##
    );

    for region in &dataset.regions {
        let d = path_data(&region.points, true);
        let shade = SHADES[usize::from(region.shade).min(SHADES.len() - 1)];
        let _ = writeln!(
            out,
            r##"<path class="region" data-label="{}" d="{d}" fill="{shade}" stroke="#000000" stroke-width="{}"/>"##,
            escape(&region.label),
            Num(REGION_STROKE)
        );
        if region.dotted {
            let _ = writeln!(out, r#"<path d="{d}" fill="url(#dots)" stroke="none"/>"#);
        }
    }

    for r in &dataset.rects {
        let _ = writeln!(
            out,
            r##"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="none"/>"##,
            Num(r.x0.min(r.x1)),
            Num(-r.y0.max(r.y1)),
            Num((r.x1 - r.x0).abs()),
            Num((r.y1 - r.y0).abs()),
            SHADES[2]
        );
    }

    // frame and axes
    let _ = writeln!(
        out,
        r##"<rect x="-1" y="-1" width="2" height="2" fill="none" stroke="#000000" stroke-width="{}"/>"##,
        Num(FRAME_STROKE)
    );
    let _ = writeln!(
        out,
        r##"<path class="axis" d="M-1 0L1 0M0 -1L0 1" stroke="#000000" stroke-width="{}" fill="none"/>"##,
        Num(AXIS_STROKE)
    );

    for curve in &dataset.curves {
        if curve.points.len() < 2 {
            continue;
        }
        let dash = if curve.dashed {
            r#" stroke-dasharray="0.02 0.015""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<path class="curve" d="{}" fill="none" stroke="{}" stroke-width="{}"{dash}/>"#,
            path_data(&curve.points, false),
            kind.curve_color(),
            Num(CURVE_STROKE)
        );
    }

    for p in &dataset.points {
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            Num(p[0]),
            Num(-p[1]),
            Num(POINT_RADIUS),
            kind.curve_color()
        );
    }
    out.push_str("</svg>\n");
    out
}
