//! Tight-frame analysis and synthesis operators and soft-thresholding.
//!
//! Two backends are provided: the undecimated piecewise-linear B-spline
//! framelet (any dimension) and the 2-D dual-tree complex wavelet transform.
//! Both satisfy `synthesize(analyze(f)) == f` up to rounding.
//!
//! All operations are pure. Summation order is fixed (subbands in storage
//! order, lanes in increasing linear index), so results are bitwise
//! reproducible.

pub mod bspline;
pub mod conv;
pub mod dense;
pub mod dtcwt;
pub mod filters;

pub use conv::conv_sym;
pub use dense::{dense_frame_matrix, DenseMatrix, ORACLE_PIXEL_LIMIT};

use crate::error::{Error, Result};
use crate::field::ImageField;

/// Default number of dual-tree levels.
pub const DEFAULT_DTCWT_LEVELS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameBackend {
    /// Single-level undecimated B-spline framelet, `3^d` subbands.
    BSplineFramelet,
    /// Decimated 2-D dual-tree complex wavelet pyramid.
    DualTreeCwt2d { levels: usize },
}

impl FrameBackend {
    pub fn dual_tree(levels: usize) -> Self {
        FrameBackend::DualTreeCwt2d { levels }
    }

    /// Dual-tree with four levels for 2-D fields, B-spline otherwise.
    pub fn default_for(ndim: usize) -> Self {
        if ndim == 2 {
            Self::dual_tree(DEFAULT_DTCWT_LEVELS)
        } else {
            FrameBackend::BSplineFramelet
        }
    }

    pub fn levels(&self) -> usize {
        match self {
            FrameBackend::BSplineFramelet => 1,
            FrameBackend::DualTreeCwt2d { levels } => *levels,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrameBackend::BSplineFramelet => "bspline",
            FrameBackend::DualTreeCwt2d { .. } => "dtcwt",
        }
    }

    /// Fails if the backend cannot transform a field with these extents.
    pub fn check(&self, extents: &[usize]) -> Result<()> {
        match self {
            FrameBackend::BSplineFramelet => Ok(()),
            FrameBackend::DualTreeCwt2d { levels } => {
                if extents.len() != 2 {
                    return Err(Error::UnsupportedBackend(format!(
                        "dual-tree transform is 2-D only, field has {} dimensions",
                        extents.len()
                    )));
                }
                if *levels == 0 {
                    return Err(Error::InvalidArgument("dual-tree levels must be >= 1".into()));
                }
                Ok(())
            }
        }
    }
}

/// Extent bookkeeping needed to invert a transform exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub extents: Vec<usize>,
    /// Grid actually transformed; equals `extents` unless padding was needed.
    pub padded: Vec<usize>,
}

/// One subband. Complex subbands carry an imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct Subband {
    pub label: String,
    pub extents: Vec<usize>,
    pub lowpass: bool,
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
}

impl Subband {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub backend: FrameBackend,
    pub geometry: Geometry,
    pub subbands: Vec<Subband>,
}

impl CoefficientSet {
    /// Number of real coefficients (a complex coefficient counts twice).
    pub fn coefficient_count(&self) -> usize {
        self.subbands
            .iter()
            .map(|s| s.len() * if s.im.is_some() { 2 } else { 1 })
            .sum()
    }

    /// All real coefficients; per subband the real part, then the imaginary part.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coefficient_count());
        for s in &self.subbands {
            out.extend_from_slice(&s.re);
            if let Some(im) = &s.im {
                out.extend_from_slice(im);
            }
        }
        out
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.subbands {
            s.re.iter_mut().for_each(|v| *v *= k);
            if let Some(im) = &mut s.im {
                im.iter_mut().for_each(|v| *v *= k);
            }
        }
        out
    }

    fn expected_layout(&self) -> Vec<(Vec<usize>, bool)> {
        match self.backend {
            FrameBackend::BSplineFramelet => {
                let n = bspline::subband_count(self.geometry.extents.len());
                (0..n).map(|_| (self.geometry.extents.clone(), false)).collect()
            }
            FrameBackend::DualTreeCwt2d { levels } => dtcwt::band_layout(&self.geometry.padded, levels)
                .into_iter()
                .map(|(_, e, _)| (e, true))
                .collect(),
        }
    }

    fn check_geometry(&self, backend: FrameBackend) -> Result<()> {
        let mismatch = |why: String| Err(Error::InvalidArgument(format!("geometry mismatch: {why}")));
        if self.backend != backend {
            return mismatch(format!(
                "coefficients from {:?}, synthesizing with {backend:?}",
                self.backend
            ));
        }
        backend.check(&self.geometry.extents)?;
        if let FrameBackend::DualTreeCwt2d { levels } = backend {
            if dtcwt::padded_extents(&self.geometry.extents, levels) != self.geometry.padded {
                return mismatch("padded extents do not match the level count".into());
            }
        } else if self.geometry.padded != self.geometry.extents {
            return mismatch("B-spline coefficients are never padded".into());
        }
        let layout = self.expected_layout();
        if layout.len() != self.subbands.len() {
            return mismatch(format!(
                "expected {} subbands, found {}",
                layout.len(),
                self.subbands.len()
            ));
        }
        for (s, (ext, complex)) in self.subbands.iter().zip(layout) {
            let len: usize = ext.iter().product();
            if s.extents != ext || s.re.len() != len {
                return mismatch(format!("subband {} has the wrong shape", s.label));
            }
            match &s.im {
                Some(im) if complex && im.len() == len => {}
                None if !complex => {}
                _ => return mismatch(format!("subband {} has the wrong parts", s.label)),
            }
        }
        Ok(())
    }
}

/// Per-coefficient thresholds (scalar broadcast allowed).
#[derive(Clone, Debug, PartialEq)]
pub enum Thresholds {
    Scalar(f64),
    /// One vector per subband, one entry per (complex) coefficient.
    PerCoefficient(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdVector {
    pub lambda: Thresholds,
    /// Leave lowpass subbands untouched.
    pub lowpass_exempt: bool,
}

impl ThresholdVector {
    /// Scalar threshold with the lowpass exemption on.
    pub fn scalar(lambda: f64) -> Self {
        Self {
            lambda: Thresholds::Scalar(lambda),
            lowpass_exempt: true,
        }
    }

    pub fn with_lowpass_exempt(mut self, exempt: bool) -> Self {
        self.lowpass_exempt = exempt;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |v: f64| !(v >= 0.0 && v.is_finite());
        match &self.lambda {
            Thresholds::Scalar(v) if bad(*v) => Err(Error::InvalidArgument(format!(
                "threshold must be a finite nonnegative number, got {v}"
            ))),
            Thresholds::PerCoefficient(all) if all.iter().flatten().any(|&v| bad(v)) => Err(
                Error::InvalidArgument("thresholds must be finite and nonnegative".into()),
            ),
            _ => Ok(()),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self.lambda, Thresholds::Scalar(v) if v == 0.0)
    }
}

/// Real soft-threshold: `sgn(v)(|v| - lambda)` when `|v| > lambda`, else 0.
#[inline]
pub fn shrink_real(v: f64, lambda: f64) -> f64 {
    if v.abs() > lambda {
        if v > 0.0 {
            v - lambda
        } else {
            v + lambda
        }
    } else {
        0.0
    }
}

/// Complex soft-threshold: magnitude shrinks by `lambda`, phase is kept.
#[inline]
pub fn shrink_complex(re: f64, im: f64, lambda: f64) -> (f64, f64) {
    let mag = re.hypot(im);
    if mag > lambda {
        let k = (mag - lambda) / mag;
        (re * k, im * k)
    } else {
        (0.0, 0.0)
    }
}

pub fn analyze(f: &ImageField, backend: FrameBackend) -> Result<CoefficientSet> {
    backend.check(f.extents())?;
    if f.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("field contains non-finite values".into()));
    }
    let extents = f.extents().to_vec();
    match backend {
        FrameBackend::BSplineFramelet => {
            let ndim = extents.len();
            let subbands = bspline::analyze(f.data(), &extents)
                .into_iter()
                .enumerate()
                .map(|(i, re)| Subband {
                    label: bspline::label(&bspline::multi_index(i, ndim)),
                    extents: extents.clone(),
                    lowpass: i == 0,
                    re,
                    im: None,
                })
                .collect();
            Ok(CoefficientSet {
                backend,
                geometry: Geometry {
                    padded: extents.clone(),
                    extents,
                },
                subbands,
            })
        }
        FrameBackend::DualTreeCwt2d { levels } => {
            let (padded, bands) = dtcwt::analyze(f.data(), &extents, levels);
            let subbands = bands
                .into_iter()
                .map(|b| Subband {
                    label: b.label,
                    extents: b.extents,
                    lowpass: b.lowpass,
                    re: b.re,
                    im: Some(b.im),
                })
                .collect();
            Ok(CoefficientSet {
                backend,
                geometry: Geometry { extents, padded },
                subbands,
            })
        }
    }
}

pub fn synthesize(c: &CoefficientSet, backend: FrameBackend) -> Result<ImageField> {
    c.check_geometry(backend)?;
    let extents = &c.geometry.extents;
    let data = match backend {
        FrameBackend::BSplineFramelet => {
            let parts: Vec<&[f64]> = c.subbands.iter().map(|s| s.re.as_slice()).collect();
            bspline::synthesize(&parts, extents)
        }
        FrameBackend::DualTreeCwt2d { levels } => {
            let parts: Vec<(&[f64], &[f64])> = c
                .subbands
                .iter()
                .map(|s| (s.re.as_slice(), s.im.as_deref().unwrap_or(&[])))
                .collect();
            dtcwt::synthesize(&parts, extents, &c.geometry.padded, levels)
        }
    };
    ImageField::new(extents, data)
}

pub fn soft_threshold(c: &CoefficientSet, t: &ThresholdVector) -> Result<CoefficientSet> {
    t.validate()?;
    if let Thresholds::PerCoefficient(all) = &t.lambda {
        let shapes_ok =
            all.len() == c.subbands.len() && all.iter().zip(&c.subbands).all(|(l, s)| l.len() == s.len());
        if !shapes_ok {
            return Err(Error::InvalidArgument(
                "per-coefficient thresholds do not match the coefficient layout".into(),
            ));
        }
    }
    let mut out = c.clone();
    for (k, s) in out.subbands.iter_mut().enumerate() {
        if s.lowpass && t.lowpass_exempt {
            continue;
        }
        let lambda_at = |i: usize| match &t.lambda {
            Thresholds::Scalar(v) => *v,
            Thresholds::PerCoefficient(all) => all[k][i],
        };
        match &mut s.im {
            None => {
                for (i, v) in s.re.iter_mut().enumerate() {
                    *v = shrink_real(*v, lambda_at(i));
                }
            }
            Some(im) => {
                for (i, (r, m)) in s.re.iter_mut().zip(im.iter_mut()).enumerate() {
                    (*r, *m) = shrink_complex(*r, *m, lambda_at(i));
                }
            }
        }
    }
    Ok(out)
}

/// `A^T T_lambda(A f)`.
pub fn denoise(f: &ImageField, backend: FrameBackend, t: &ThresholdVector) -> Result<ImageField> {
    t.validate()?;
    match (backend, &t.lambda) {
        (FrameBackend::BSplineFramelet, Thresholds::Scalar(lambda)) => {
            backend.check(f.extents())?;
            if f.data().iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("field contains non-finite values".into()));
            }
            let lambda = *lambda;
            let exempt = t.lowpass_exempt;
            let zero = t.is_zero();
            let data = bspline::denoise_fused(f.data(), f.extents(), &mut |band, c| {
                if zero || (band == 0 && exempt) {
                    return;
                }
                c.iter_mut().for_each(|v| *v = shrink_real(*v, lambda));
            });
            ImageField::new(f.extents(), data)
        }
        _ => {
            let c = analyze(f, backend)?;
            synthesize(&soft_threshold(&c, t)?, backend)
        }
    }
}
