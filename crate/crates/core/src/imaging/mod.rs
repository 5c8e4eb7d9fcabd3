//! Reading images and volumes, writing masks, contours and meshes.
//!
//! Readers return raw intensities; normalization happens in
//! [`segment`](crate::segment).

mod contour;
mod mesh;
mod pnm;
mod volume;

pub use contour::{contour2d, contour_lines, contour_svg, Polyline};
pub use mesh::{isosurface3d, Mesh};
pub use volume::{sidecar_path, ElementType, Endian, VolumeHeader};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ImageField;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Decodes PGM (P2/P5, 8 or 16 bit) or grayscale PNG, chosen by magic bytes.
pub fn decode_image2d(bytes: &[u8], path: &Path) -> Result<ImageField> {
    if bytes.starts_with(b"\x89PNG") {
        pnm::decode_png(bytes, path)
    } else {
        pnm::decode_pgm(bytes, path)
    }
}

pub fn read_image2d(path: &Path) -> Result<ImageField> {
    decode_image2d(&read_bytes(path)?, path)
}

/// Reads a raw payload described by `header_path`, or by the sidecar next to
/// `path` when `None`.
pub fn read_volume3d(path: &Path, header_path: Option<&Path>) -> Result<ImageField> {
    Ok(read_volume_with_header(path, header_path)?.0)
}

pub fn read_volume_with_header(
    path: &Path,
    header_path: Option<&Path>,
) -> Result<(ImageField, VolumeHeader)> {
    let hpath = header_path.map_or_else(|| sidecar_path(path), Path::to_path_buf);
    let text = std::fs::read_to_string(&hpath).map_err(|e| Error::io(&hpath, e))?;
    let header = VolumeHeader::parse(&text, &hpath)?;
    let field = volume::decode_payload(&read_bytes(path)?, &header, path)?;
    Ok((field, header))
}

/// Writes `field` as a raw payload plus its sidecar header. Returns both paths.
pub fn write_volume(field: &ImageField, path: &Path, header: &VolumeHeader) -> Result<[PathBuf; 2]> {
    if header.extents != field.extents() {
        return Err(Error::ExtentMismatch {
            left: field.extents().to_vec(),
            right: header.extents.clone(),
        });
    }
    let hpath = sidecar_path(path);
    write_bytes(path, &volume::encode_payload(field, header))?;
    write_bytes(&hpath, header.to_text().as_bytes())?;
    Ok([path.to_path_buf(), hpath])
}

/// Binary PGM with samples `0..=maxval` (16-bit when `maxval > 255`).
pub fn write_pgm(field: &ImageField, path: &Path, maxval: u16) -> Result<()> {
    if field.ndim() != 2 {
        return Err(Error::InvalidInput("PGM output needs a 2-D field".into()));
    }
    write_bytes(path, &pnm::encode_pgm(field, maxval))
}

/// 2-D masks go to PGM with values {0, 255}; 3-D masks to raw u8 {0, 255}
/// plus sidecar. Returns the files written.
pub fn write_mask(mask: &ImageField, path: &Path) -> Result<Vec<PathBuf>> {
    if !mask.is_binary() {
        return Err(Error::InvalidInput("write_mask expects a binary field".into()));
    }
    let scaled = mask.map(|v| v * 255.0);
    match mask.ndim() {
        2 => {
            write_pgm(&scaled, path, 255)?;
            Ok(vec![path.to_path_buf()])
        }
        3 => {
            let header = VolumeHeader::new(mask.extents(), ElementType::U8);
            Ok(write_volume(&scaled, path, &header)?.to_vec())
        }
        d => Err(Error::InvalidInput(format!(
            "masks are 2-D or 3-D, got {d} dimensions"
        ))),
    }
}

/// Reads a mask written by [`write_mask`]; nonzero samples become 1.
pub fn read_mask(path: &Path, ndim: usize) -> Result<ImageField> {
    let raw = if ndim == 3 {
        read_volume3d(path, None)?
    } else {
        read_image2d(path)?
    };
    Ok(raw.map(|v| if v != 0.0 { 1.0 } else { 0.0 }))
}
