//! Browser demo: a noisy branching phantom that can be denoised and
//! segmented with adjustable parameters. Images cross into JS as RGBA bytes
//! ready for `ImageData`.

use tfseg::phantom::{self, Phantom};
use tfseg::segment::{self, SegmentParams};
use tfseg::transform::{denoise, FrameBackend, ThresholdVector};
use tfseg::ImageField;
use wasm_bindgen::prelude::*;

fn backend(name: &str, levels: u32) -> tfseg::Result<FrameBackend> {
    match name {
        "bspline" => Ok(FrameBackend::BSplineFramelet),
        "dtcwt" => Ok(FrameBackend::dual_tree(levels as usize)),
        other => Err(tfseg::Error::UnsupportedBackend(other.to_string())),
    }
}

fn gray_rgba(f: &ImageField) -> Vec<u8> {
    let mut out = Vec::with_capacity(f.len() * 4);
    for &v in f.data() {
        let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        out.extend_from_slice(&[g, g, g, 255]);
    }
    out
}

/// Image in gray; hits red, false alarms yellow, misses cyan.
fn overlay_rgba(image: &ImageField, mask: &ImageField, truth: &ImageField) -> Vec<u8> {
    let mut out = gray_rgba(image);
    for (j, px) in out.chunks_exact_mut(4).enumerate() {
        let (m, t) = (mask.data()[j] != 0.0, truth.data()[j] != 0.0);
        let tint = match (m, t) {
            (true, true) => [230, 40, 40],
            (true, false) => [240, 210, 0],
            (false, true) => [0, 200, 220],
            (false, false) => continue,
        };
        for c in 0..3 {
            px[c] = ((px[c] as u16 + 2 * tint[c] as u16) / 3) as u8;
        }
    }
    out
}

#[wasm_bindgen]
pub struct Demo {
    phantom: Phantom,
    counts: Vec<u32>,
    dice: f64,
}

impl Demo {
    pub fn generate(sigma: f64, seed: u32) -> tfseg::Result<Demo> {
        let mut spec = phantom::bundled("branching_y_2d").expect("bundled phantom");
        spec.noise.sigma = sigma;
        spec.noise.seed = seed as u64;
        Ok(Demo {
            phantom: spec.generate()?,
            counts: Vec::new(),
            dice: f64::NAN,
        })
    }

    pub fn denoised(&self, lambda: f64, backend_name: &str, levels: u32) -> tfseg::Result<Vec<u8>> {
        let b = backend(backend_name, levels)?;
        let f = denoise(&self.phantom.image, b, &ThresholdVector::scalar(lambda))?;
        Ok(gray_rgba(&f))
    }

    pub fn segmented(
        &mut self,
        epsilon: f64,
        lambda: f64,
        backend_name: &str,
        levels: u32,
    ) -> tfseg::Result<Vec<u8>> {
        let mut params = SegmentParams::defaults_for(2);
        params.epsilon = epsilon;
        params.lambda = lambda;
        params.backend = backend(backend_name, levels)?;
        let seg = segment::segment(&self.phantom.image, &params)?;
        self.counts = seg.stats.cardinalities().into_iter().map(|c| c as u32).collect();
        self.dice = phantom::dice(&seg.mask, &self.phantom.truth)?;
        Ok(overlay_rgba(&self.phantom.image, &seg.mask, &self.phantom.truth))
    }
}

fn js(e: tfseg::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(sigma: f64, seed: u32) -> Result<Demo, JsError> {
        Demo::generate(sigma, seed).map_err(js)
    }

    pub fn width(&self) -> u32 {
        self.phantom.image.extents()[0] as u32
    }

    pub fn height(&self) -> u32 {
        self.phantom.image.extents()[1] as u32
    }

    pub fn image(&self) -> Vec<u8> {
        gray_rgba(&self.phantom.image)
    }

    pub fn truth(&self) -> Vec<u8> {
        gray_rgba(&self.phantom.truth)
    }

    /// One pass of frame shrinkage over the whole image.
    pub fn denoise(&self, lambda: f64, backend: &str, levels: u32) -> Result<Vec<u8>, JsError> {
        self.denoised(lambda, backend, levels).map_err(js)
    }

    /// Runs the segmentation and returns the overlay; see [`Demo::counts`]
    /// and [`Demo::dice`] for the numbers.
    pub fn segment(
        &mut self,
        epsilon: f64,
        lambda: f64,
        backend: &str,
        levels: u32,
    ) -> Result<Vec<u8>, JsError> {
        self.segmented(epsilon, lambda, backend, levels).map_err(js)
    }

    /// Candidate counts per iteration of the last segmentation, ending in 0.
    pub fn counts(&self) -> Vec<u32> {
        self.counts.clone()
    }

    pub fn dice(&self) -> f64 {
        self.dice
    }
}
