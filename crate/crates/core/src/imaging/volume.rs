//! Raw volumes with a plain-text sidecar header.
//!
//! The header is a list of `key: value` lines; blank lines and `#` comments
//! are ignored.
//!
//! ```text
//! extents: 64 64 48      # x y [z], x varies fastest in the payload
//! type: u16              # u8 | u16 | f32
//! endian: little         # little | big (default little)
//! spacing: 0.5 0.5 1.0   # optional voxel size, one value per axis
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ImageField;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementType {
    U8,
    U16,
    F32,
}

impl ElementType {
    pub fn size(self) -> usize {
        match self {
            ElementType::U8 => 1,
            ElementType::U16 => 2,
            ElementType::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementType::U8 => "u8",
            ElementType::U16 => "u16",
            ElementType::F32 => "f32",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeHeader {
    pub extents: Vec<usize>,
    pub element: ElementType,
    pub endian: Endian,
    pub spacing: Option<Vec<f64>>,
}

impl VolumeHeader {
    pub fn new(extents: &[usize], element: ElementType) -> Self {
        Self {
            extents: extents.to_vec(),
            element,
            endian: Endian::Little,
            spacing: None,
        }
    }

    pub fn payload_len(&self) -> usize {
        self.extents.iter().product::<usize>() * self.element.size()
    }

    /// Spacing per axis, 1 where absent.
    pub fn spacing_or_unit(&self) -> Vec<f64> {
        self.spacing
            .clone()
            .unwrap_or_else(|| vec![1.0; self.extents.len()])
    }

    /// `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, reason: String| Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("line {line}: {reason}"),
        };
        let (mut extents, mut element, mut endian, mut spacing) = (None, None, None, None);
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once(':')
                .ok_or_else(|| bad(line, format!("expected `key: value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "extents" => {
                    let v = value
                        .split_whitespace()
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad(line, format!("bad extents `{value}`")))?;
                    if v.len() < 2 || v.len() > 3 || v.contains(&0) {
                        return Err(bad(line, format!("need 2 or 3 positive extents, got `{value}`")));
                    }
                    extents = Some(v);
                }
                "type" => {
                    element = Some(match value {
                        "u8" | "uint8" => ElementType::U8,
                        "u16" | "uint16" => ElementType::U16,
                        "f32" | "float32" => ElementType::F32,
                        other => {
                            return Err(Error::UnknownElementType {
                                path: path.to_path_buf(),
                                name: other.to_string(),
                            })
                        }
                    });
                }
                "endian" => {
                    endian = Some(match value {
                        "little" => Endian::Little,
                        "big" => Endian::Big,
                        other => return Err(bad(line, format!("unknown endianness `{other}`"))),
                    });
                }
                "spacing" => {
                    let v = value
                        .split_whitespace()
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad(line, format!("bad spacing `{value}`")))?;
                    if v.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                        return Err(bad(line, format!("spacing must be positive, got `{value}`")));
                    }
                    spacing = Some(v);
                }
                other => return Err(bad(line, format!("unknown key `{other}`"))),
            }
        }
        let extents = extents.ok_or_else(|| bad(0, "missing `extents`".into()))?;
        let element = element.ok_or_else(|| bad(0, "missing `type`".into()))?;
        if let Some(s) = &spacing {
            if s.len() != extents.len() {
                return Err(bad(
                    0,
                    format!("{} spacing values for {} extents", s.len(), extents.len()),
                ));
            }
        }
        Ok(Self {
            extents,
            element,
            endian: endian.unwrap_or(Endian::Little),
            spacing,
        })
    }

    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(" ");
        let mut s = String::new();
        let _ = writeln!(
            s,
            "extents: {}",
            join(self.extents.iter().map(|e| e.to_string()).collect())
        );
        let _ = writeln!(s, "type: {}", self.element.name());
        let _ = writeln!(
            s,
            "endian: {}",
            match self.endian {
                Endian::Little => "little",
                Endian::Big => "big",
            }
        );
        if let Some(sp) = &self.spacing {
            let _ = writeln!(s, "spacing: {}", join(sp.iter().map(|v| v.to_string()).collect()));
        }
        s
    }
}

/// `scan.raw` -> `scan.hdr`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("hdr")
}

pub(crate) fn decode_payload(bytes: &[u8], header: &VolumeHeader, path: &Path) -> Result<ImageField> {
    let expected = header.payload_len();
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    let big = header.endian == Endian::Big;
    let data: Vec<f64> = match header.element {
        ElementType::U8 => bytes.iter().map(|&b| b as f64).collect(),
        ElementType::U16 => bytes
            .chunks_exact(2)
            .map(|b| {
                let a = [b[0], b[1]];
                (if big {
                    u16::from_be_bytes(a)
                } else {
                    u16::from_le_bytes(a)
                }) as f64
            })
            .collect(),
        ElementType::F32 => bytes
            .chunks_exact(4)
            .map(|b| {
                let a = [b[0], b[1], b[2], b[3]];
                (if big {
                    f32::from_be_bytes(a)
                } else {
                    f32::from_le_bytes(a)
                }) as f64
            })
            .collect(),
    };
    ImageField::new(&header.extents, data)
}

/// Integer types are rounded and clamped to their range.
pub(crate) fn encode_payload(f: &ImageField, header: &VolumeHeader) -> Vec<u8> {
    let big = header.endian == Endian::Big;
    let mut out = Vec::with_capacity(header.payload_len());
    for &v in f.data() {
        match header.element {
            ElementType::U8 => out.push(v.round().clamp(0.0, 255.0) as u8),
            ElementType::U16 => {
                let q = v.round().clamp(0.0, 65535.0) as u16;
                out.extend_from_slice(&if big { q.to_be_bytes() } else { q.to_le_bytes() });
            }
            ElementType::F32 => {
                let q = v as f32;
                out.extend_from_slice(&if big { q.to_be_bytes() } else { q.to_le_bytes() });
            }
        }
    }
    out
}
