//! Same-length convolution with half-sample symmetric boundary extension.
//!
//! The extension repeats the edge sample: `x[-1] = x[0]`, `x[n] = x[n-1]`,
//! and is periodic with period `2n`, so filters longer than the signal are fine.

use crate::error::{Error, Result};

/// Index into a length-`n` signal after half-sample symmetric extension.
#[inline]
pub fn mirror(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let p = i.rem_euclid(period) as usize;
    if p < n {
        p
    } else {
        2 * n - 1 - p
    }
}

/// Centre tap of a filter; for even lengths the left of the two middle taps.
#[inline]
fn centre(taps: &[f64]) -> isize {
    ((taps.len() - 1) / 2) as isize
}

/// `y[k] = sum_m taps[m] * x[mirror(k + c - m)]` with `c` the centre tap.
pub fn conv_sym(signal: &[f64], taps: &[f64]) -> Result<Vec<f64>> {
    if taps.is_empty() {
        return Err(Error::InvalidArgument("empty filter".into()));
    }
    if signal.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    let mut out = vec![0.0; signal.len()];
    conv_sym_into(signal, taps, &mut out);
    Ok(out)
}

pub(crate) fn conv_sym_into(signal: &[f64], taps: &[f64], out: &mut [f64]) {
    let n = signal.len();
    let c = centre(taps);
    for (k, y) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (m, &t) in taps.iter().enumerate() {
            acc += t * signal[mirror(k as isize + c - m as isize, n)];
        }
        *y = acc;
    }
}

/// Transpose of [`conv_sym`] as a linear map.
pub fn conv_sym_adjoint(coeffs: &[f64], taps: &[f64]) -> Result<Vec<f64>> {
    if taps.is_empty() {
        return Err(Error::InvalidArgument("empty filter".into()));
    }
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    let mut out = vec![0.0; coeffs.len()];
    conv_sym_adjoint_into(coeffs, taps, &mut out);
    Ok(out)
}

pub(crate) fn conv_sym_adjoint_into(coeffs: &[f64], taps: &[f64], out: &mut [f64]) {
    let n = coeffs.len();
    let c = centre(taps);
    out.iter_mut().for_each(|v| *v = 0.0);
    for (k, &y) in coeffs.iter().enumerate() {
        for (m, &t) in taps.iter().enumerate() {
            out[mirror(k as isize + c - m as isize, n)] += t * y;
        }
    }
}
