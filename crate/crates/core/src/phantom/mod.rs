//! Synthetic tube phantoms with known ground truth, and the Dice score.
//!
//! A tube is a centerline with a radius that varies linearly along its arc
//! length. Ground truth is the set of pixel centres within one radius of the
//! centerline. The image blends foreground into background over a one-pixel
//! ramp centred on the tube wall, so a pixel is in the truth exactly when its
//! noise-free intensity is at least halfway between the two levels.

mod config;

pub use config::{bundled, PhantomSpec, BUNDLED};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::ImageField;

/// Helix samples per turn when flattening it to a polyline.
const HELIX_SEGMENTS_PER_TURN: usize = 64;

/// Radius at the start and end of a centerline, interpolated by arc length.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RadiusProfile {
    Constant(f64),
    Linear([f64; 2]),
}

impl RadiusProfile {
    fn at(&self, t: f64) -> f64 {
        match *self {
            RadiusProfile::Constant(r) => r,
            RadiusProfile::Linear([a, b]) => a + (b - a) * t,
        }
    }

    fn min(&self) -> f64 {
        match *self {
            RadiusProfile::Constant(r) => r,
            RadiusProfile::Linear([a, b]) => a.min(b),
        }
    }
}

/// Centerline templates. Coordinates are in pixels, `[x, y]` or `[x, y, z]`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Centerline {
    Polyline {
        points: Vec<Vec<f64>>,
        radius: RadiusProfile,
    },
    /// Helix around the z axis through `center`, climbing `pitch` per turn.
    Helix {
        center: Vec<f64>,
        helix_radius: f64,
        pitch: f64,
        turns: f64,
        #[serde(default)]
        phase_deg: f64,
        radius: RadiusProfile,
    },
    /// A trunk that splits into two branches `angle_deg` apart. Branch `k`
    /// starts with radius `branch_radii[k]` and narrows to `taper` times that.
    BranchingY {
        root: Vec<f64>,
        direction: Vec<f64>,
        trunk_length: f64,
        branch_length: f64,
        angle_deg: f64,
        trunk_radius: f64,
        branch_radii: [f64; 2],
        #[serde(default = "unit")]
        taper: f64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct TubeSpec {
    pub centerline: Centerline,
    /// Intensity inside the tube, in `(0, 1]`.
    pub foreground: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    pub image: ImageField,
    pub truth: ImageField,
    /// Tubes that leave the grid; they are clipped.
    pub warnings: Vec<String>,
}

/// A straight piece of tube with linearly varying radius.
#[derive(Clone, Copy, Debug)]
struct Piece {
    a: [f64; 3],
    b: [f64; 3],
    ra: f64,
    rb: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn point(v: &[f64], ndim: usize, what: &str) -> Result<[f64; 3]> {
    if v.len() != ndim {
        return Err(Error::InvalidArgument(format!(
            "{what} has {} coordinates, the grid has {ndim} dimensions",
            v.len()
        )));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} is not finite")));
    }
    let mut p = [0.0; 3];
    p[..ndim].copy_from_slice(v);
    Ok(p)
}

/// Splits a point path into pieces, spreading the radius by arc length.
fn path_pieces(path: &[[f64; 3]], radius: RadiusProfile, out: &mut Vec<Piece>) {
    let lengths: Vec<f64> = path.windows(2).map(|w| norm(sub(w[1], w[0]))).collect();
    let total: f64 = lengths.iter().sum();
    let mut walked = 0.0;
    for (w, len) in path.windows(2).zip(&lengths) {
        let t0 = if total > 0.0 { walked / total } else { 0.0 };
        walked += len;
        let t1 = if total > 0.0 { walked / total } else { 1.0 };
        out.push(Piece {
            a: w[0],
            b: w[1],
            ra: radius.at(t0),
            rb: radius.at(t1),
        });
    }
}

fn rotate_in_plane(d: [f64; 3], u: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * d[0] + s * u[0], c * d[1] + s * u[1], c * d[2] + s * u[2]]
}

impl Centerline {
    fn pieces(&self, ndim: usize) -> Result<Vec<Piece>> {
        let mut out = Vec::new();
        match self {
            Centerline::Polyline { points, radius } => {
                check_radius(radius.min())?;
                if points.len() < 2 {
                    return Err(Error::InvalidArgument(
                        "a polyline needs at least two points".into(),
                    ));
                }
                let path = points
                    .iter()
                    .map(|p| point(p, ndim, "polyline point"))
                    .collect::<Result<Vec<_>>>()?;
                path_pieces(&path, *radius, &mut out);
            }
            Centerline::Helix {
                center,
                helix_radius,
                pitch,
                turns,
                phase_deg,
                radius,
            } => {
                check_radius(radius.min())?;
                if ndim != 3 {
                    return Err(Error::InvalidArgument("a helix needs a 3-D grid".into()));
                }
                if !(*turns > 0.0 && *helix_radius > 0.0) {
                    return Err(Error::InvalidArgument(
                        "helix turns and helix_radius must be positive".into(),
                    ));
                }
                let c = point(center, 3, "helix center")?;
                let steps = ((turns * HELIX_SEGMENTS_PER_TURN as f64).ceil() as usize).max(1);
                let path: Vec<[f64; 3]> = (0..=steps)
                    .map(|k| {
                        let t = k as f64 / steps as f64 * turns;
                        let theta = phase_deg.to_radians() + std::f64::consts::TAU * t;
                        [
                            c[0] + helix_radius * theta.cos(),
                            c[1] + helix_radius * theta.sin(),
                            c[2] + pitch * t,
                        ]
                    })
                    .collect();
                path_pieces(&path, *radius, &mut out);
            }
            Centerline::BranchingY {
                root,
                direction,
                trunk_length,
                branch_length,
                angle_deg,
                trunk_radius,
                branch_radii,
                taper,
            } => {
                check_radius(*trunk_radius)?;
                for r in branch_radii {
                    check_radius(*r)?;
                }
                if taper.is_nan() || *taper <= 0.0 {
                    return Err(Error::InvalidArgument("taper must be positive".into()));
                }
                let p0 = point(root, ndim, "branching_y root")?;
                let d = point(direction, ndim, "branching_y direction")?;
                let len = norm(d);
                if len == 0.0 {
                    return Err(Error::InvalidArgument("branching_y direction is zero".into()));
                }
                let d = [d[0] / len, d[1] / len, d[2] / len];
                // branches open in the plane of d and the axis least aligned with it
                let axis = if d[0].abs() <= d[1].abs() {
                    [1.0, 0.0, 0.0]
                } else {
                    [0.0, 1.0, 0.0]
                };
                let along = dot(axis, d);
                let u = sub(axis, [along * d[0], along * d[1], along * d[2]]);
                let ul = norm(u);
                let u = [u[0] / ul, u[1] / ul, u[2] / ul];
                let fork = [
                    p0[0] + trunk_length * d[0],
                    p0[1] + trunk_length * d[1],
                    p0[2] + trunk_length * d[2],
                ];
                out.push(Piece {
                    a: p0,
                    b: fork,
                    ra: *trunk_radius,
                    rb: *trunk_radius,
                });
                let half = angle_deg.to_radians() / 2.0;
                for (sign, r) in [(1.0, branch_radii[0]), (-1.0, branch_radii[1])] {
                    let bd = rotate_in_plane(d, u, sign * half);
                    let end = [
                        fork[0] + branch_length * bd[0],
                        fork[1] + branch_length * bd[1],
                        fork[2] + branch_length * bd[2],
                    ];
                    out.push(Piece {
                        a: fork,
                        b: end,
                        ra: r,
                        rb: r * taper,
                    });
                }
            }
        }
        Ok(out)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tube radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Distance from `p` to the piece and the radius at the closest point.
fn distance(piece: &Piece, p: [f64; 3]) -> (f64, f64) {
    let ab = sub(piece.b, piece.a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, piece.a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [
        piece.a[0] + t * ab[0],
        piece.a[1] + t * ab[1],
        piece.a[2] + t * ab[2],
    ];
    (norm(sub(p, q)), piece.ra + (piece.rb - piece.ra) * t)
}

/// Renders the tubes on `extents` and adds clipped Gaussian noise.
pub fn gen_phantom(
    tubes: &[TubeSpec],
    extents: &[usize],
    background: f64,
    noise: &NoiseSpec,
) -> Result<Phantom> {
    if extents.len() < 2 || extents.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "phantoms are 2-D or 3-D, got extents {extents:?}"
        )));
    }
    if !(0.0..1.0).contains(&background) {
        return Err(Error::InvalidArgument(format!(
            "background must lie in [0, 1), got {background}"
        )));
    }
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be nonnegative, got {}",
            noise.sigma
        )));
    }
    let ndim = extents.len();
    let mut truth = ImageField::zeros(extents)?;
    let mut coverage = ImageField::zeros(extents)?;
    let mut warnings = Vec::new();

    for (k, tube) in tubes.iter().enumerate() {
        if !(tube.foreground > background && tube.foreground <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tube {k}: foreground {} must lie in (background, 1]",
                tube.foreground
            )));
        }
        let contrast = tube.foreground - background;
        let pieces = tube.centerline.pieces(ndim)?;
        let mut clipped = false;
        for piece in &pieces {
            let r = piece.ra.max(piece.rb);
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for axis in 0..3 {
                let n = if axis < ndim { extents[axis] } else { 1 };
                let (a, b) = (piece.a[axis].min(piece.b[axis]), piece.a[axis].max(piece.b[axis]));
                if axis < ndim && (a - r < -0.5 || b + r > n as f64 - 0.5) {
                    clipped = true;
                }
                // the intensity ramp reaches half a pixel past the wall
                let (a, b) = (a - r - 1.0, b + r + 1.0);
                lo[axis] = a.ceil().clamp(0.0, n as f64) as usize;
                hi[axis] = (b.floor() + 1.0).clamp(0.0, n as f64) as usize;
            }
            for z in lo[2]..hi[2] {
                for y in lo[1]..hi[1] {
                    for x in lo[0]..hi[0] {
                        let (d, r) = distance(piece, [x as f64, y as f64, z as f64]);
                        let cover = (r - d + 0.5).clamp(0.0, 1.0) * contrast;
                        let coord = [x, y, z];
                        let j = truth.index(&coord[..ndim]);
                        if d <= r {
                            truth.data_mut()[j] = 1.0;
                        }
                        let c = &mut coverage.data_mut()[j];
                        *c = c.max(cover);
                    }
                }
            }
        }
        if clipped {
            let msg = format!("tube {k} extends past the grid and is clipped");
            warn!("{msg}");
            warnings.push(msg);
        }
    }

    let mut image = coverage.map(|c| background + c);
    if noise.sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let normal = Normal::new(0.0, noise.sigma).expect("sigma checked above");
        for v in image.data_mut() {
            *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    Ok(Phantom {
        image,
        truth,
        warnings,
    })
}

/// `2|a & b| / (|a| + |b|)`, 1 when both masks are empty. Nonzero pixels
/// count as foreground.
pub fn dice(a: &ImageField, b: &ImageField) -> Result<f64> {
    a.check_same_extents(b)?;
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (x, y) = (x != 0.0, y != 0.0);
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}
