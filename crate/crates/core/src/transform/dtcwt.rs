//! 2-D dual-tree complex wavelet transform built from four real separable
//! orthonormal transforms.
//!
//! Tree `xy` filters along x (rows) with tree `x` and along y (columns) with
//! tree `y`. With `g` = tree A and `h` = tree B, each pair of real outputs is
//! combined as
//!
//! ```text
//! (1/sqrt 8) [ I -I  0  0 ] [ A_gg ]
//!            [ I  I  0  0 ] [ A_hh ]
//!            [ 0  0  I  I ] [ A_hg ]
//!            [ 0  0  I -I ] [ A_gh ]
//! ```
//!
//! and rows (1,3) and (2,4) become the real and imaginary parts of two complex
//! subbands. Each separable transform is orthogonal (periodic filtering with
//! orthonormal filters), so the combined operator is a tight frame on the
//! padded grid. Extents that are not multiples of `2^levels` are padded by
//! half-sample mirroring at the trailing end and cropped after synthesis.

use super::conv::mirror;
use super::filters::{FilterPair, Tree};
use crate::field::map_lanes;

const INV_SQRT8: f64 = 0.353_553_390_593_273_8;

/// Real output of one separable tree.
struct TreeOutput {
    /// `details[j][o]`, orientation `o` in (x-high/y-low, x-low/y-high, x-high/y-high).
    details: Vec<[Vec<f64>; 3]>,
    low: Vec<f64>,
}

/// One complex subband of the combined transform.
pub(crate) struct ComplexBand {
    pub label: String,
    pub extents: Vec<usize>,
    pub lowpass: bool,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

pub(crate) fn padded_extents(extents: &[usize], levels: usize) -> Vec<usize> {
    let block = 1usize << levels;
    extents.iter().map(|&n| n.div_ceil(block) * block).collect()
}

pub(crate) fn band_layout(padded: &[usize], levels: usize) -> Vec<(String, Vec<usize>, bool)> {
    let mut out = Vec::new();
    for level in 1..=levels {
        let ext = vec![padded[0] >> level, padded[1] >> level];
        for o in 0..3 {
            for part in 1..=2 {
                out.push((format!("L{level}-o{o}-z{part}"), ext.clone(), false));
            }
        }
    }
    let ext = vec![padded[0] >> levels, padded[1] >> levels];
    for part in 1..=2 {
        out.push((format!("L{levels}-low-z{part}"), ext.clone(), true));
    }
    out
}

fn pad(data: &[f64], extents: &[usize], padded: &[usize]) -> Vec<f64> {
    let (nx, ny) = (extents[0], extents[1]);
    let (px, py) = (padded[0], padded[1]);
    let mut out = Vec::with_capacity(px * py);
    for y in 0..py {
        let sy = mirror(y as isize, ny);
        for x in 0..px {
            out.push(data[mirror(x as isize, nx) + nx * sy]);
        }
    }
    out
}

fn crop(data: &[f64], padded: &[usize], extents: &[usize]) -> Vec<f64> {
    let (nx, ny) = (extents[0], extents[1]);
    let px = padded[0];
    let mut out = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        out.extend_from_slice(&data[y * px..y * px + nx]);
    }
    out
}

/// Periodic two-channel analysis of an even-length lane; output is `[lo | hi]`.
/// `lo[k] = sum_n low[n] x[(2k + L/2 - n) mod N]`.
fn analysis_lane(x: &[f64], pair: &FilterPair, out: &mut [f64]) {
    let n = x.len();
    let half = n / 2;
    let offset = (pair.low.len() / 2) as isize;
    for k in 0..half {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (m, (&a, &b)) in pair.low.iter().zip(&pair.high).enumerate() {
            let i = (2 * k as isize + offset - m as isize).rem_euclid(n as isize) as usize;
            lo += a * x[i];
            hi += b * x[i];
        }
        out[k] = lo;
        out[half + k] = hi;
    }
}

/// Adjoint of [`analysis_lane`].
fn synthesis_lane(c: &[f64], pair: &FilterPair, out: &mut [f64]) {
    let n = c.len();
    let half = n / 2;
    let offset = (pair.low.len() / 2) as isize;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let (lo, hi) = (c[k], c[half + k]);
        for (m, (&a, &b)) in pair.low.iter().zip(&pair.high).enumerate() {
            let i = (2 * k as isize + offset - m as isize).rem_euclid(n as isize) as usize;
            out[i] += a * lo + b * hi;
        }
    }
}

fn quadrant(data: &[f64], w: usize, qx: usize, qy: usize) -> Vec<f64> {
    let (hw, hh) = (w / 2, data.len() / w / 2);
    let mut out = Vec::with_capacity(hw * hh);
    for y in 0..hh {
        let row = (qy * hh + y) * w + qx * hw;
        out.extend_from_slice(&data[row..row + hw]);
    }
    out
}

fn put_quadrant(data: &mut [f64], w: usize, qx: usize, qy: usize, q: &[f64]) {
    let (hw, hh) = (w / 2, data.len() / w / 2);
    for y in 0..hh {
        let row = (qy * hh + y) * w + qx * hw;
        data[row..row + hw].copy_from_slice(&q[y * hw..(y + 1) * hw]);
    }
}

fn analyze_tree(x: &[f64], padded: &[usize], levels: usize, tx: Tree, ty: Tree) -> TreeOutput {
    let mut low = x.to_vec();
    let mut ext = padded.to_vec();
    let mut details = Vec::with_capacity(levels);
    for level in 1..=levels {
        let fx = FilterPair::for_level(tx, level);
        let fy = FilterPair::for_level(ty, level);
        let (a, _) = map_lanes(&low, &ext, 0, ext[0], |i, o| analysis_lane(i, &fx, o));
        let (b, _) = map_lanes(&a, &ext, 1, ext[1], |i, o| analysis_lane(i, &fy, o));
        let w = ext[0];
        details.push([
            quadrant(&b, w, 1, 0),
            quadrant(&b, w, 0, 1),
            quadrant(&b, w, 1, 1),
        ]);
        low = quadrant(&b, w, 0, 0);
        ext = vec![ext[0] / 2, ext[1] / 2];
    }
    TreeOutput { details, low }
}

fn synthesize_tree(t: &TreeOutput, padded: &[usize], tx: Tree, ty: Tree) -> Vec<f64> {
    let levels = t.details.len();
    let mut low = t.low.clone();
    for level in (1..=levels).rev() {
        let ext = vec![padded[0] >> (level - 1), padded[1] >> (level - 1)];
        let w = ext[0];
        let mut b = vec![0.0; ext[0] * ext[1]];
        put_quadrant(&mut b, w, 0, 0, &low);
        let [d0, d1, d2] = &t.details[level - 1];
        put_quadrant(&mut b, w, 1, 0, d0);
        put_quadrant(&mut b, w, 0, 1, d1);
        put_quadrant(&mut b, w, 1, 1, d2);
        let fx = FilterPair::for_level(tx, level);
        let fy = FilterPair::for_level(ty, level);
        let (a, _) = map_lanes(&b, &ext, 1, ext[1], |i, o| synthesis_lane(i, &fy, o));
        let (x, _) = map_lanes(&a, &ext, 0, ext[0], |i, o| synthesis_lane(i, &fx, o));
        low = x;
    }
    low
}

// Tree order: gg, hh, hg, gh as (x-tree, y-tree).
const TREES: [(Tree, Tree); 4] = [
    (Tree::A, Tree::A),
    (Tree::B, Tree::B),
    (Tree::B, Tree::A),
    (Tree::A, Tree::B),
];

fn combine(gg: &[f64], hh: &[f64], hg: &[f64], gh: &[f64]) -> [(Vec<f64>, Vec<f64>); 2] {
    let n = gg.len();
    let mut z1 = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut z2 = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        z1.0.push((gg[i] - hh[i]) * INV_SQRT8);
        z2.0.push((gg[i] + hh[i]) * INV_SQRT8);
        z1.1.push((hg[i] + gh[i]) * INV_SQRT8);
        z2.1.push((hg[i] - gh[i]) * INV_SQRT8);
    }
    [z1, z2]
}

/// Transpose of [`combine`]; returns (gg, hh, hg, gh).
fn split(z1: (&[f64], &[f64]), z2: (&[f64], &[f64])) -> [Vec<f64>; 4] {
    let n = z1.0.len();
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    for i in 0..n {
        out[0].push((z1.0[i] + z2.0[i]) * INV_SQRT8);
        out[1].push((z2.0[i] - z1.0[i]) * INV_SQRT8);
        out[2].push((z1.1[i] + z2.1[i]) * INV_SQRT8);
        out[3].push((z1.1[i] - z2.1[i]) * INV_SQRT8);
    }
    out
}

pub(crate) fn analyze(data: &[f64], extents: &[usize], levels: usize) -> (Vec<usize>, Vec<ComplexBand>) {
    let padded = padded_extents(extents, levels);
    let x = pad(data, extents, &padded);
    let trees: Vec<TreeOutput> = TREES
        .iter()
        .map(|&(tx, ty)| analyze_tree(&x, &padded, levels, tx, ty))
        .collect();
    let layout = band_layout(&padded, levels);
    let mut parts = Vec::with_capacity(layout.len());
    for level in 0..levels {
        for o in 0..3 {
            let [z1, z2] = combine(
                &trees[0].details[level][o],
                &trees[1].details[level][o],
                &trees[2].details[level][o],
                &trees[3].details[level][o],
            );
            parts.push(z1);
            parts.push(z2);
        }
    }
    let [z1, z2] = combine(&trees[0].low, &trees[1].low, &trees[2].low, &trees[3].low);
    parts.push(z1);
    parts.push(z2);
    let bands = layout
        .into_iter()
        .zip(parts)
        .map(|((label, extents, lowpass), (re, im))| ComplexBand {
            label,
            extents,
            lowpass,
            re,
            im,
        })
        .collect();
    (padded, bands)
}

/// `bands` must follow [`band_layout`] for `padded` and `levels`.
pub(crate) fn synthesize(
    bands: &[(&[f64], &[f64])],
    extents: &[usize],
    padded: &[usize],
    levels: usize,
) -> Vec<f64> {
    let mut trees: Vec<TreeOutput> = (0..4)
        .map(|_| TreeOutput {
            details: Vec::with_capacity(levels),
            low: Vec::new(),
        })
        .collect();
    for level in 0..levels {
        let mut per_tree: [Vec<Vec<f64>>; 4] = Default::default();
        for o in 0..3 {
            let i = (level * 3 + o) * 2;
            for (t, v) in split(bands[i], bands[i + 1]).into_iter().enumerate() {
                per_tree[t].push(v);
            }
        }
        for (tree, mut d) in trees.iter_mut().zip(per_tree) {
            let d2 = d.pop().unwrap();
            let d1 = d.pop().unwrap();
            let d0 = d.pop().unwrap();
            tree.details.push([d0, d1, d2]);
        }
    }
    let i = levels * 6;
    for (tree, low) in trees.iter_mut().zip(split(bands[i], bands[i + 1])) {
        tree.low = low;
    }
    let mut acc = vec![0.0; padded[0] * padded[1]];
    for (t, &(tx, ty)) in trees.iter().zip(&TREES) {
        let x = synthesize_tree(t, padded, tx, ty);
        acc.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
    }
    crop(&acc, padded, extents)
}
