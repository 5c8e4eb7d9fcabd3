//! Dense scalar fields on 1-, 2- and 3-D grids.
//!
//! Storage is x-fastest: the linear index of `(x, y, z)` is
//! `x + nx * (y + ny * z)`. A 2-D image is therefore stored row-major with
//! `x` the column and `y` the row.

use crate::error::{Error, Result};

/// A d-dimensional grid of `f64` samples (d in 1..=3).
#[derive(Clone, Debug, PartialEq)]
pub struct ImageField {
    extents: Vec<usize>,
    data: Vec<f64>,
}

impl ImageField {
    pub fn new(extents: &[usize], data: Vec<f64>) -> Result<Self> {
        check_extents(extents)?;
        let len: usize = extents.iter().product();
        if data.len() != len {
            return Err(Error::InvalidArgument(format!(
                "field with extents {extents:?} needs {len} samples, got {}",
                data.len()
            )));
        }
        Ok(Self {
            extents: extents.to_vec(),
            data,
        })
    }

    pub fn zeros(extents: &[usize]) -> Result<Self> {
        Self::filled(extents, 0.0)
    }

    pub fn filled(extents: &[usize], value: f64) -> Result<Self> {
        check_extents(extents)?;
        let len = extents.iter().product();
        Ok(Self {
            extents: extents.to_vec(),
            data: vec![value; len],
        })
    }

    /// Builds a field by evaluating `f` at every grid coordinate.
    pub fn from_fn(extents: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_extents(extents)?;
        let len: usize = extents.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut coord = vec![0usize; extents.len()];
        for _ in 0..len {
            data.push(f(&coord));
            for (c, &n) in coord.iter_mut().zip(extents) {
                *c += 1;
                if *c < n {
                    break;
                }
                *c = 0;
            }
        }
        Ok(Self {
            extents: extents.to_vec(),
            data,
        })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn index(&self, coord: &[usize]) -> usize {
        linear_index(&self.extents, coord)
    }

    pub fn get(&self, coord: &[usize]) -> f64 {
        self.data[self.index(coord)]
    }

    pub fn set(&mut self, coord: &[usize], value: f64) {
        let i = self.index(coord);
        self.data[i] = value;
    }

    pub fn coord(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.extents
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c
            })
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            extents: self.extents.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.extents, other.extents);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_same_extents(&self, other: &Self) -> Result<()> {
        if self.extents != other.extents {
            return Err(Error::ExtentMismatch {
                left: self.extents.clone(),
                right: other.extents.clone(),
            });
        }
        Ok(())
    }
}

fn check_extents(extents: &[usize]) -> Result<()> {
    if extents.is_empty() || extents.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "fields have 1 to 3 dimensions, got {}",
            extents.len()
        )));
    }
    if extents.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "extents must be positive, got {extents:?}"
        )));
    }
    Ok(())
}

pub(crate) fn linear_index(extents: &[usize], coord: &[usize]) -> usize {
    debug_assert_eq!(extents.len(), coord.len());
    let mut index = 0;
    for (&c, &n) in coord.iter().zip(extents).rev() {
        debug_assert!(c < n);
        index = index * n + c;
    }
    index
}

pub(crate) fn strides(extents: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(extents.len());
    let mut acc = 1;
    for &n in extents {
        s.push(acc);
        acc *= n;
    }
    s
}

/// Applies a lane transform along `axis`, producing a field whose extent along
/// `axis` is `out_len`. `op(input_lane, output_lane)` must fill the output.
pub(crate) fn map_lanes(
    data: &[f64],
    extents: &[usize],
    axis: usize,
    out_len: usize,
    mut op: impl FnMut(&[f64], &mut [f64]),
) -> (Vec<f64>, Vec<usize>) {
    let n = extents[axis];
    let mut out_extents = extents.to_vec();
    out_extents[axis] = out_len;
    let out_total: usize = out_extents.iter().product();
    let mut out = vec![0.0; out_total];
    let out_strides = strides(&out_extents);
    let in_strides = strides(extents);
    let mut lane_in = vec![0.0; n];
    let mut lane_out = vec![0.0; out_len];

    // lanes are enumerated by their coordinates on the other axes
    let mut other: Vec<usize> = extents.to_vec();
    other[axis] = 1;
    let count: usize = other.iter().product();
    let mut coord = vec![0usize; extents.len()];
    for _ in 0..count {
        let base_in: usize = coord.iter().zip(&in_strides).map(|(c, s)| c * s).sum();
        let base_out: usize = coord.iter().zip(&out_strides).map(|(c, s)| c * s).sum();
        for (k, v) in lane_in.iter_mut().enumerate() {
            *v = data[base_in + k * in_strides[axis]];
        }
        op(&lane_in, &mut lane_out);
        for (k, &v) in lane_out.iter().enumerate() {
            out[base_out + k * out_strides[axis]] = v;
        }
        for (c, &m) in coord.iter_mut().zip(&other) {
            *c += 1;
            if *c < m {
                break;
            }
            *c = 0;
        }
    }
    (out, out_extents)
}
