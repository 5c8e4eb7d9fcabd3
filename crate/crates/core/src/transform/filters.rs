//! Orthonormal filter tables for the 2-D dual-tree complex wavelet transform.
//!
//! Level 1 uses the Farras pair (Abdelnour & Selesnick), whose lowpass taps
//! have the closed form `a = sqrt(2)/16`, `b = sqrt(2)/4 + sqrt(30)/16`,
//! `c = sqrt(2)/4 - sqrt(30)/16`. Levels >= 2 use Kingsbury's 10-tap Q-shift
//! pair as distributed with Selesnick's dual-tree software; the published values
//! carry 8 digits, so the taps below are the nearest exactly-orthonormal filter
//! (minimum-norm projection onto the orthonormality and unit-DC constraints,
//! every tap moves by less than 4e-9).
//!
//! In each pair tree `b`'s lowpass is the time reverse of tree `a`'s. Highpass
//! filters come from the alternating flip `g[n] = (-1)^n h[L-1-n]`.
//!
//! Table version 1.

/// Farras lowpass, tree a.
pub const FARRAS_A: [f64; 10] = [
    0.0,
    -0.088_388_347_648_318_44,
    0.088_388_347_648_318_44,
    0.695_879_989_034_002_6,
    0.695_879_989_034_002_6,
    0.088_388_347_648_318_44,
    -0.088_388_347_648_318_44,
    0.011_226_792_152_544_941,
    0.011_226_792_152_544_941,
    0.0,
];

/// Farras lowpass, tree b.
pub const FARRAS_B: [f64; 10] = [
    0.011_226_792_152_544_941,
    0.011_226_792_152_544_941,
    -0.088_388_347_648_318_44,
    0.088_388_347_648_318_44,
    0.695_879_989_034_002_6,
    0.695_879_989_034_002_6,
    0.088_388_347_648_318_44,
    -0.088_388_347_648_318_44,
    0.0,
    0.0,
];

/// Q-shift lowpass, tree a.
pub const QSHIFT_A: [f64; 10] = [
    0.035_163_837_344_447_82,
    0.0,
    -0.088_329_423_060_222_13,
    0.233_890_320_311_910_57,
    0.760_272_366_902_321_8,
    0.587_518_300_350_420_5,
    0.0,
    -0.114_301_839_475_783_55,
    0.0,
    0.0,
];

/// Q-shift lowpass, tree b.
pub const QSHIFT_B: [f64; 10] = [
    0.0,
    0.0,
    -0.114_301_839_475_783_55,
    0.0,
    0.587_518_300_350_420_5,
    0.760_272_366_902_321_8,
    0.233_890_320_311_910_57,
    -0.088_329_423_060_222_13,
    0.0,
    0.035_163_837_344_447_82,
];

/// Which of the two trees a filter pair belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tree {
    A,
    B,
}

/// A lowpass/highpass analysis pair.
#[derive(Clone, Debug)]
pub struct FilterPair {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl FilterPair {
    fn from_lowpass(low: &[f64]) -> Self {
        let len = low.len();
        let high = (0..len)
            .map(|n| {
                let v = low[len - 1 - n];
                if n % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Self {
            low: low.to_vec(),
            high,
        }
    }

    /// Filters for `tree` at decomposition `level` (1-based).
    pub fn for_level(tree: Tree, level: usize) -> Self {
        let low: &[f64] = match (level <= 1, tree) {
            (true, Tree::A) => &FARRAS_A,
            (true, Tree::B) => &FARRAS_B,
            (false, Tree::A) => &QSHIFT_A,
            (false, Tree::B) => &QSHIFT_B,
        };
        Self::from_lowpass(low)
    }
}
