//! Tight-frame segmentation of tubular structures.
//!
//! The crate is organised as
//!
//! * [`transform`]: tight-frame analysis/synthesis (B-spline framelet and 2-D
//!   dual-tree complex wavelets) and soft-thresholding;
//! * [`segment`]: the iterative range-estimation / threshold-stretch /
//!   masked-denoise loop that drives an image to a binary mask;
//! * [`imaging`]: PGM/PNG and raw-volume input, mask output, contour (SVG) and
//!   isosurface (OBJ) export;
//! * [`phantom`]: synthetic tube phantoms and the Dice overlap score.

pub mod error;
pub mod field;
pub mod imaging;
pub mod phantom;
pub mod segment;
pub mod transform;

pub use error::{Error, Result};
pub use field::ImageField;
