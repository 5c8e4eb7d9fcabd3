//! Undecimated piecewise-linear B-spline framelet, single level, any dimension.
//!
//! The d-dimensional frame is the tensor product of the 1-D system
//! `{h0, h1, h2}`; it has `3^d` subbands, each the size of the input. Subband
//! `(i_0, .., i_{d-1})` applies `h_{i_k}` along axis `k`. Subbands are stored with
//! axis 0's filter index varying slowest.

use super::conv::{conv_sym_adjoint_into, conv_sym_into};
use crate::field::map_lanes;

const SQRT2_4: f64 = std::f64::consts::SQRT_2 / 4.0;

/// `h0 = [1,2,1]/4`, `h1 = sqrt(2)/4 [1,0,-1]`, `h2 = [-1,2,-1]/4`.
pub const FILTERS: [[f64; 3]; 3] = [[0.25, 0.5, 0.25], [SQRT2_4, 0.0, -SQRT2_4], [-0.25, 0.5, -0.25]];

pub(crate) fn subband_count(ndim: usize) -> usize {
    3usize.pow(ndim as u32)
}

pub(crate) fn label(index: &[usize]) -> String {
    let digits: String = index.iter().map(|i| char::from(b'0' + *i as u8)).collect();
    format!("h{digits}")
}

pub(crate) fn multi_index(flat: usize, ndim: usize) -> Vec<usize> {
    let mut idx = vec![0; ndim];
    let mut rest = flat;
    for k in (0..ndim).rev() {
        idx[k] = rest % 3;
        rest /= 3;
    }
    idx
}

fn filter_along(data: &[f64], extents: &[usize], axis: usize, taps: &[f64]) -> Vec<f64> {
    let n = extents[axis];
    map_lanes(data, extents, axis, n, |x, y| conv_sym_into(x, taps, y)).0
}

fn adjoint_along(data: &[f64], extents: &[usize], axis: usize, taps: &[f64]) -> Vec<f64> {
    let n = extents[axis];
    map_lanes(data, extents, axis, n, |x, y| conv_sym_adjoint_into(x, taps, y)).0
}

/// All `3^d` subbands in storage order.
pub(crate) fn analyze(data: &[f64], extents: &[usize]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(subband_count(extents.len()));
    analyze_rec(data, extents, 0, &mut out);
    out
}

fn analyze_rec(data: &[f64], extents: &[usize], axis: usize, out: &mut Vec<Vec<f64>>) {
    if axis == extents.len() {
        out.push(data.to_vec());
        return;
    }
    for taps in &FILTERS {
        let c = filter_along(data, extents, axis, taps);
        analyze_rec(&c, extents, axis + 1, out);
    }
}

/// Applies the adjoint to subbands in storage order.
pub(crate) fn synthesize(subbands: &[&[f64]], extents: &[usize]) -> Vec<f64> {
    let mut next = 0;
    synthesize_rec(subbands, extents, 0, &mut next)
}

fn synthesize_rec(subbands: &[&[f64]], extents: &[usize], axis: usize, next: &mut usize) -> Vec<f64> {
    if axis == extents.len() {
        let s = subbands[*next].to_vec();
        *next += 1;
        return s;
    }
    let mut acc: Vec<f64> = Vec::new();
    for taps in &FILTERS {
        let part = synthesize_rec(subbands, extents, axis + 1, next);
        let back = adjoint_along(&part, extents, axis, taps);
        if acc.is_empty() {
            acc = back;
        } else {
            acc.iter_mut().zip(&back).for_each(|(a, b)| *a += b);
        }
    }
    acc
}

/// Analysis, per-subband shrinkage and synthesis fused depth-first, so only one
/// subband per axis is alive at a time. `shrink(flat_index, coefficients)` edits
/// a subband in place. The summation order equals `synthesize(analyze(..))`.
pub(crate) fn denoise_fused(
    data: &[f64],
    extents: &[usize],
    shrink: &mut dyn FnMut(usize, &mut [f64]),
) -> Vec<f64> {
    let mut next = 0;
    denoise_rec(data, extents, 0, &mut next, shrink)
}

fn denoise_rec(
    data: &[f64],
    extents: &[usize],
    axis: usize,
    next: &mut usize,
    shrink: &mut dyn FnMut(usize, &mut [f64]),
) -> Vec<f64> {
    if axis == extents.len() {
        let mut c = data.to_vec();
        shrink(*next, &mut c);
        *next += 1;
        return c;
    }
    let mut acc: Vec<f64> = Vec::new();
    for taps in &FILTERS {
        let c = filter_along(data, extents, axis, taps);
        let part = denoise_rec(&c, extents, axis + 1, next, shrink);
        let back = adjoint_along(&part, extents, axis, taps);
        if acc.is_empty() {
            acc = back;
        } else {
            acc.iter_mut().zip(&back).for_each(|(a, b)| *a += b);
        }
    }
    acc
}
