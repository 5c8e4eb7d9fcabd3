//! TOML phantom descriptions.
//!
//! ```toml
//! extents = [256, 256]
//! foreground = 0.8
//! background = 0.2
//!
//! [noise]
//! sigma = 0.05
//! seed = 7
//!
//! [[tube]]
//! kind = "polyline"
//! points = [[20, 20], [200, 60]]
//! radius = [4.0, 2.0]
//! ```
//!
//! `kind` is one of `polyline`, `helix` or `branching_y`; see
//! [`Centerline`] for the keys of each.

use std::path::Path;

use serde::Deserialize;

use super::{gen_phantom, Centerline, NoiseSpec, Phantom, TubeSpec};
use crate::error::{Error, Result};

/// Phantoms shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "branching_y_2d",
        include_str!("../../phantoms/branching_y_2d.toml"),
    ),
    ("helix_3d", include_str!("../../phantoms/helix_3d.toml")),
];

pub fn bundled(name: &str) -> Option<PhantomSpec> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| PhantomSpec::parse(text, Path::new(n)).expect("bundled phantom parses"))
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    extents: Vec<usize>,
    #[serde(default = "default_foreground")]
    foreground: f64,
    #[serde(default = "default_background")]
    background: f64,
    #[serde(default = "NoiseSpec::none")]
    noise: NoiseSpec,
    #[serde(default)]
    tube: Vec<Centerline>,
}

fn default_foreground() -> f64 {
    0.8
}

fn default_background() -> f64 {
    0.2
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub extents: Vec<usize>,
    pub background: f64,
    pub noise: NoiseSpec,
    pub tubes: Vec<TubeSpec>,
}

impl PhantomSpec {
    /// `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        if raw.tube.is_empty() {
            return Err(Error::Config {
                path: path.to_path_buf(),
                message: "no [[tube]] entries".into(),
            });
        }
        Ok(Self {
            extents: raw.extents,
            background: raw.background,
            noise: raw.noise,
            tubes: raw
                .tube
                .into_iter()
                .map(|centerline| TubeSpec {
                    centerline,
                    foreground: raw.foreground,
                })
                .collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn generate(&self) -> Result<Phantom> {
        gen_phantom(&self.tubes, &self.extents, self.background, &self.noise)
    }
}
