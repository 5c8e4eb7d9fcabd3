//! Marching squares on 2-D fields.
//!
//! The field is surrounded by a virtual ring of background so every contour
//! closes. Cell corners at or above the level are inside. In the two saddle
//! configurations the inside corners are kept apart, which matches
//! 4-connectivity of the foreground. Loops run counter-clockwise on screen
//! (x right, y down) with the inside on their left.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use base64::Engine as _;

use super::pnm::encode_png8;
use crate::error::{Error, Result};
use crate::field::ImageField;

/// A closed contour; the last point connects back to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
}

impl Polyline {
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let (a, b) = (self.points[k], self.points[(k + 1) % n]);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }

    /// Shoelace area in pixel coordinates: negative for outer boundaries,
    /// positive for holes.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let twice: f64 = (0..n)
            .map(|k| {
                let (a, b) = (self.points[k], self.points[(k + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        twice / 2.0
    }
}

// a cell edge is named by its lower corner (padded coordinates) and axis
type EdgeKey = (usize, usize, u8);

/// Closed iso-lines of `field` at `level`, in pixel-centre coordinates.
pub fn contour_lines(field: &ImageField, level: f64) -> Result<Vec<Polyline>> {
    if field.ndim() != 2 {
        return Err(Error::InvalidInput(format!(
            "contours need a 2-D field, got {} dimensions",
            field.ndim()
        )));
    }
    let (w, h) = (field.extents()[0], field.extents()[1]);
    // padded coordinate p maps to pixel p - 1
    let value = |px: usize, py: usize| -> f64 {
        if px == 0 || py == 0 || px > w || py > h {
            f64::NEG_INFINITY
        } else {
            field.get(&[px - 1, py - 1])
        }
    };
    let crossing = |key: EdgeKey| -> [f64; 2] {
        let (px, py, axis) = key;
        let (qx, qy) = if axis == 0 { (px + 1, py) } else { (px, py + 1) };
        let (a, b) = (value(px, py), value(qx, qy));
        // against the virtual ring the crossing sits half-way
        let t = if a.is_finite() && b.is_finite() {
            ((level - a) / (b - a)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let (x0, y0) = (px as f64 - 1.0, py as f64 - 1.0);
        if axis == 0 {
            [x0 + t, y0]
        } else {
            [x0, y0 + t]
        }
    };

    // directed segments, from where the boundary enters an inside run of
    // corners to where it leaves
    let mut next: HashMap<EdgeKey, EdgeKey> = HashMap::new();
    let mut order: Vec<EdgeKey> = Vec::new();
    for py in 0..=h {
        for px in 0..=w {
            // corners clockwise (y down): top-left, top-right, bottom-right, bottom-left
            let corners = [(px, py), (px + 1, py), (px + 1, py + 1), (px, py + 1)];
            let inside: [bool; 4] = corners.map(|(x, y)| value(x, y) >= level);
            // edge k joins corner k and corner k + 1
            let edges: [EdgeKey; 4] = [(px, py, 0), (px + 1, py, 1), (px, py + 1, 0), (px, py, 1)];
            for k in 0..4 {
                // a run starts at corner k if it is inside and its predecessor is not
                if inside[k] && !inside[(k + 3) % 4] {
                    let mut end = k;
                    while inside[(end + 1) % 4] {
                        end = (end + 1) % 4;
                    }
                    let entry = edges[(k + 3) % 4];
                    let exit = edges[end];
                    next.insert(entry, exit);
                    order.push(entry);
                }
            }
        }
    }

    let mut loops = Vec::new();
    let mut used: HashSet<EdgeKey> = HashSet::new();
    for start in order {
        if used.contains(&start) {
            continue;
        }
        let mut points = Vec::new();
        let mut key = start;
        loop {
            used.insert(key);
            points.push(crossing(key));
            key = next[&key];
            if key == start {
                break;
            }
        }
        loops.push(Polyline { points });
    }
    Ok(loops)
}

/// Contours of a binary mask at 0.5.
pub fn contour2d(mask: &ImageField) -> Result<Vec<Polyline>> {
    if !mask.is_binary() {
        return Err(Error::InvalidInput("contour2d expects a binary mask".into()));
    }
    contour_lines(mask, 0.5)
}

/// SVG with `background` embedded as a grayscale PNG and the contours drawn
/// over it. One user unit is one pixel.
pub fn contour_svg(background: &ImageField, lines: &[Polyline]) -> Result<String> {
    if background.ndim() != 2 {
        return Err(Error::InvalidInput("SVG overlay needs a 2-D image".into()));
    }
    let (w, h) = (background.extents()[0], background.extents()[1]);
    let png = base64::engine::general_purpose::STANDARD.encode(encode_png8(background));
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{w}" height="{h}" viewBox="-0.5 -0.5 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<image x="-0.5" y="-0.5" width="{w}" height="{h}" style="image-rendering:pixelated" xlink:href="data:image/png;base64,{png}"/>"#
    );
    let _ = writeln!(s, r##"<g fill="none" stroke="#ff3030" stroke-width="0.25">"##);
    for line in lines {
        let pts: Vec<String> = line.points.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
        let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
