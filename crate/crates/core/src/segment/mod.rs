//! Iterative tight-frame segmentation.
//!
//! Starting from the normalized image and the set of pixels whose gradient
//! 1-norm reaches `epsilon`, each iteration
//!
//! 1. estimates an intensity range `[alpha, beta]` from the candidate pixels,
//! 2. thresholds the whole image to 0 below the range and 1 above it, and
//!    stretches the in-range values linearly onto `[0, 1]`,
//! 3. stops if the result is binary, otherwise takes the pixels strictly
//!    between 0 and 1 as the next candidate set, and
//! 4. replaces the candidate pixels by their tight-frame denoised values.
//!
//! Every non-final iteration sends at least the largest in-range candidate to
//! 1, and pixels that reached 0 or 1 never change again, so the loop ends at a
//! binary image.

mod stats;

pub use stats::{IterationRecord, IterationStats};

use web_time::Instant;

use crate::error::{Error, Result};
use crate::field::{strides, ImageField};
use crate::transform::{denoise, FrameBackend, ThresholdVector};

/// Gradient threshold used for 2-D images.
pub const DEFAULT_EPSILON_2D: f64 = 0.003;
/// Gradient threshold used for 3-D volumes.
pub const DEFAULT_EPSILON_3D: f64 = 0.06;
/// Soft-threshold level for every frame coefficient.
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// Pixels still to be classified, as a mask aligned with the image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    extents: Vec<usize>,
    mask: Vec<bool>,
    count: usize,
}

impl CandidateSet {
    pub fn from_mask(extents: &[usize], mask: Vec<bool>) -> Self {
        assert_eq!(extents.iter().product::<usize>(), mask.len());
        let count = mask.iter().filter(|&&b| b).count();
        Self {
            extents: extents.to_vec(),
            mask,
            count,
        }
    }

    pub fn empty(extents: &[usize]) -> Self {
        let n = extents.iter().product();
        Self::from_mask(extents, vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Candidate-set statistics of one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeEstimate {
    pub mu: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Largest candidate value inside `[alpha, beta]`; set by [`threshold_stretch`].
    pub max_in_range: Option<f64>,
    /// Smallest candidate value inside `[alpha, beta]`; set by [`threshold_stretch`].
    pub min_in_range: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub backend: FrameBackend,
    /// Iteration cap; `None` means `|Omega| + 1`, which can never be reached.
    pub max_iters: Option<usize>,
    pub lowpass_exempt: bool,
}

impl SegmentParams {
    /// `epsilon` 0.003 (2-D) or 0.06 (3-D), `lambda` 0.1, dual-tree with four
    /// levels in 2-D and the B-spline framelet otherwise.
    pub fn defaults_for(ndim: usize) -> Self {
        Self {
            epsilon: if ndim == 3 {
                DEFAULT_EPSILON_3D
            } else {
                DEFAULT_EPSILON_2D
            },
            lambda: DEFAULT_LAMBDA,
            backend: FrameBackend::default_for(ndim),
            max_iters: None,
            lowpass_exempt: true,
        }
    }

    pub fn thresholds(&self) -> ThresholdVector {
        ThresholdVector::scalar(self.lambda).with_lowpass_exempt(self.lowpass_exempt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.backend.levels() == 0 {
            return Err(Error::InvalidArgument("levels must be at least 1".into()));
        }
        Ok(())
    }
}

/// Affine min-max map onto `[0, 1]`; a constant image maps to all zeros.
pub fn normalize_dynamic_range(f: &ImageField) -> Result<ImageField> {
    if let Some(i) = f.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "pixel {:?} is not finite",
            f.coord(i)
        )));
    }
    let (lo, hi) = f.min_max();
    if lo == 0.0 && hi == 1.0 {
        return Ok(f.clone());
    }
    if hi == lo {
        return Ok(f.map(|_| 0.0));
    }
    let span = hi - lo;
    Ok(f.map(|v| ((v - lo) / span).clamp(0.0, 1.0)))
}

/// Sum over axes of `|f(j + e_k) - f(j)|`; the trailing sample is replicated,
/// so the difference is 0 on the last slice of each axis.
pub fn gradient_l1(f: &ImageField) -> ImageField {
    let extents = f.extents();
    let st = strides(extents);
    let data = f.data();
    let mut out = vec![0.0; data.len()];
    for (j, g) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (axis, &n) in extents.iter().enumerate() {
            let c = (j / st[axis]) % n;
            if c + 1 < n {
                acc += (data[j + st[axis]] - data[j]).abs();
            }
        }
        *g = acc;
    }
    ImageField::new(extents, out).expect("same extents")
}

/// Pixels whose gradient 1-norm is at least `epsilon`.
pub fn init_candidates(f: &ImageField, epsilon: f64) -> Result<CandidateSet> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let g = gradient_l1(f);
    let set = CandidateSet::from_mask(f.extents(), g.data().iter().map(|&v| v >= epsilon).collect());
    if set.is_empty() {
        return Err(Error::NoCandidates { epsilon });
    }
    Ok(set)
}

#[inline]
fn saturate(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Mean of the candidate values, the means of the candidates at or below and
/// at or above it, and the range `alpha = max((mu + mu_-)/2, 0)`,
/// `beta = min((mu + mu_+)/2, 1)`.
///
/// Candidate values outside `[0, 1]` (masked denoising can overshoot) enter
/// saturated, which keeps `0 <= alpha <= mu <= beta <= 1`.
pub fn compute_range(f: &ImageField, candidates: &CandidateSet) -> Result<RangeEstimate> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "range estimate needs a nonempty candidate set".into(),
        ));
    }
    let data = f.data();
    let values = || candidates.indices().map(|j| saturate(data[j]));
    let (lo, hi) = values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    // a sample equal to the mean must count on both sides, so the mean is
    // computed accurately and kept inside the sample range
    let mu = mean(values()).clamp(lo, hi);
    let mu_minus = mean(values().filter(|&v| v <= mu)).min(mu);
    let mu_plus = mean(values().filter(|&v| v >= mu)).max(mu);
    Ok(RangeEstimate {
        mu,
        mu_minus,
        mu_plus,
        alpha: ((mu + mu_minus) / 2.0).max(0.0),
        beta: ((mu + mu_plus) / 2.0).min(1.0),
        max_in_range: None,
        min_in_range: None,
    })
}

/// Compensated mean, rounded once at the end.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut hi, mut lo, mut n) = (0.0f64, 0.0f64, 0usize);
    for v in values {
        let t = hi + v;
        lo += if hi.abs() >= v.abs() {
            (hi - t) + v
        } else {
            (v - t) + hi
        };
        hi = t;
        n += 1;
    }
    let n = n as f64;
    let q = hi / n;
    q + ((-q).mul_add(n, hi) + lo) / n
}

/// Maps every pixel: at or below `alpha` to 0, at or above `beta` to 1, and
/// in-between values to `clamp((f - m)/(M - m), 0, 1)` where `M`, `m` are the
/// extreme candidate values inside `[alpha, beta]`.
///
/// Values are saturated to `[0, 1]` first, so 0 and 1 are fixed points.
/// Degenerate cases: if `M == m` every in-between pixel goes to 1; if no
/// candidate lies in the range the in-between pixels are thresholded at `mu`,
/// so the output is binary.
pub fn threshold_stretch(
    f: &ImageField,
    candidates: &CandidateSet,
    range: &RangeEstimate,
) -> (ImageField, RangeEstimate) {
    let data = f.data();
    let (alpha, beta) = (range.alpha, range.beta);
    let mut extremes: Option<(f64, f64)> = None;
    for j in candidates.indices() {
        let v = saturate(data[j]);
        if alpha <= v && v <= beta {
            extremes = Some(match extremes {
                None => (v, v),
                Some((m, big_m)) => (m.min(v), big_m.max(v)),
            });
        }
    }
    let stretch = |raw: f64| -> f64 {
        let v = saturate(raw);
        if v >= 1.0 {
            return 1.0;
        }
        if v <= alpha {
            return 0.0;
        }
        if v >= beta {
            return 1.0;
        }
        match extremes {
            Some((m, big_m)) if big_m > m => ((v - m) / (big_m - m)).clamp(0.0, 1.0),
            Some(_) => 1.0,
            None => {
                if v >= range.mu {
                    1.0
                } else {
                    0.0
                }
            }
        }
    };
    let out = f.map(stretch);
    let mut filled = *range;
    filled.min_in_range = extremes.map(|e| e.0);
    filled.max_in_range = extremes.map(|e| e.1);
    (out, filled)
}

/// Pixels with `0 < f < 1`, compared exactly.
pub fn next_candidates(f_half: &ImageField) -> CandidateSet {
    CandidateSet::from_mask(
        f_half.extents(),
        f_half.data().iter().map(|&v| v > 0.0 && v < 1.0).collect(),
    )
}

/// `(I - P) f + P A^T T(A f)` with `P` the projection onto `candidates`.
/// Pixels outside the candidate set are returned bit-identical; candidate
/// values are not clamped.
pub fn masked_denoise(
    f_half: &ImageField,
    candidates: &CandidateSet,
    backend: FrameBackend,
    thresholds: &ThresholdVector,
) -> Result<ImageField> {
    if candidates.extents() != f_half.extents() {
        return Err(Error::ExtentMismatch {
            left: f_half.extents().to_vec(),
            right: candidates.extents().to_vec(),
        });
    }
    if candidates.is_empty() {
        return Ok(f_half.clone());
    }
    let smoothed = denoise(f_half, backend, thresholds)?;
    let mut out = f_half.clone();
    for j in candidates.indices() {
        out.data_mut()[j] = smoothed.data()[j];
    }
    Ok(out)
}

/// One unmasked pass of `A^T T(A .)` over a binary mask, for display.
pub fn smooth_binary(
    mask: &ImageField,
    backend: FrameBackend,
    thresholds: &ThresholdVector,
) -> Result<ImageField> {
    if !mask.is_binary() {
        return Err(Error::InvalidInput("smoothing expects a binary mask".into()));
    }
    denoise(mask, backend, thresholds)
}

/// Outcome of [`Segmenter::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Converged,
}

/// Final mask plus per-iteration statistics.
#[derive(Clone, Debug)]
pub struct Segmentation {
    pub mask: ImageField,
    pub stats: IterationStats,
}

/// Step-by-step driver, exposing the intermediate images.
#[derive(Clone, Debug)]
pub struct Segmenter {
    params: SegmentParams,
    max_iters: usize,
    current: ImageField,
    candidates: CandidateSet,
    half: Option<ImageField>,
    stats: IterationStats,
    done: bool,
}

impl Segmenter {
    /// Normalizes `raw` and builds the initial candidate set.
    pub fn new(raw: &ImageField, params: &SegmentParams) -> Result<Self> {
        params.validate()?;
        params.backend.check(raw.extents())?;
        let f = normalize_dynamic_range(raw)?;
        let candidates = init_candidates(&f, params.epsilon)?;
        Ok(Self {
            params: params.clone(),
            max_iters: params.max_iters.unwrap_or(f.len() + 1),
            stats: IterationStats::new(f.len(), f.ndim()),
            current: f,
            candidates,
            half: None,
            done: false,
        })
    }

    /// Current image `f^(i)`; the final mask once converged.
    pub fn current(&self) -> &ImageField {
        &self.current
    }

    /// Candidate set for the next iteration.
    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    /// Thresholded and stretched image of the last completed iteration.
    pub fn half_image(&self) -> Option<&ImageField> {
        self.half.as_ref()
    }

    pub fn stats(&self) -> &IterationStats {
        &self.stats
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.done {
            return Ok(StepOutcome::Converged);
        }
        if self.stats.iterations() >= self.max_iters {
            return Err(Error::IterationCapExceeded {
                max_iters: self.max_iters,
                remaining: self.candidates.len(),
            });
        }
        let start = Instant::now();
        let range = compute_range(&self.current, &self.candidates)?;
        let (half, range) = threshold_stretch(&self.current, &self.candidates, &range);
        let next = next_candidates(&half);
        let recruited = next.indices().filter(|&j| !self.candidates.contains(j)).count();
        let record = IterationRecord {
            iteration: self.stats.iterations(),
            candidates: self.candidates.len(),
            recruited,
            range,
            elapsed: start.elapsed(),
        };
        if next.is_empty() {
            self.stats.push(IterationRecord {
                elapsed: start.elapsed(),
                ..record
            });
            self.current = half.clone();
            self.half = Some(half);
            self.candidates = next;
            self.done = true;
            return Ok(StepOutcome::Converged);
        }
        let updated = masked_denoise(&half, &next, self.params.backend, &self.params.thresholds())?;
        self.stats.push(IterationRecord {
            elapsed: start.elapsed(),
            ..record
        });
        self.current = updated;
        self.half = Some(half);
        self.candidates = next;
        Ok(StepOutcome::Continue)
    }

    pub fn run(mut self) -> Result<Segmentation> {
        while self.step()? == StepOutcome::Continue {}
        Ok(Segmentation {
            mask: self.current,
            stats: self.stats,
        })
    }
}

/// Segments `raw` into a binary mask.
pub fn segment(raw: &ImageField, params: &SegmentParams) -> Result<Segmentation> {
    Segmenter::new(raw, params)?.run()
}
