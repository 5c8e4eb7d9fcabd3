//! PGM (P2/P5) and grayscale PNG.

use std::io::{BufReader, Cursor};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ImageField;

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Header tokenizer: whitespace separated, `#` comments run to end of line.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn number(&mut self, path: &Path, what: &str) -> Result<usize> {
        let tok = self
            .next()
            .ok_or_else(|| malformed(path, format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                malformed(
                    path,
                    format!("{what} `{}` is not a number", String::from_utf8_lossy(tok)),
                )
            })
    }
}

pub(crate) fn decode_pgm(bytes: &[u8], path: &Path) -> Result<ImageField> {
    let mut t = Tokens { bytes, pos: 0 };
    let magic = t.next().ok_or_else(|| malformed(path, "empty file"))?;
    let ascii = match magic {
        b"P2" => true,
        b"P5" => false,
        b"P3" | b"P6" => {
            return Err(Error::NotGrayscale {
                path: path.to_path_buf(),
                found: "PPM color".into(),
            })
        }
        other => {
            return Err(malformed(
                path,
                format!("unknown magic `{}`", String::from_utf8_lossy(other)),
            ))
        }
    };
    let width = t.number(path, "width")?;
    let height = t.number(path, "height")?;
    let maxval = t.number(path, "maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(path, format!("zero extent {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(path, format!("maxval {maxval} outside 1..=65535")));
    }
    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if ascii {
        for k in 0..n {
            let v = match t.next() {
                Some(tok) => std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| malformed(path, format!("sample {k} is not a number")))?,
                None => {
                    return Err(Error::TruncatedPayload {
                        path: path.to_path_buf(),
                        expected: n,
                        actual: k,
                    })
                }
            };
            if v > maxval {
                return Err(malformed(
                    path,
                    format!("sample {k} = {v} exceeds maxval {maxval}"),
                ));
            }
            data.push(v as f64);
        }
    } else {
        // exactly one whitespace byte separates maxval from the raster
        let start = t.pos + 1;
        let wide = maxval > 255;
        let expected = n * if wide { 2 } else { 1 };
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < expected {
            return Err(Error::TruncatedPayload {
                path: path.to_path_buf(),
                expected,
                actual: payload.len(),
            });
        }
        if wide {
            data.extend(
                payload[..expected]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64),
            );
        } else {
            data.extend(payload[..expected].iter().map(|&b| b as f64));
        }
    }
    ImageField::new(&[width, height], data)
}

pub(crate) fn decode_png(bytes: &[u8], path: &Path) -> Result<ImageField> {
    let bad = |e: png::DecodingError| malformed(path, e.to_string());
    let mut decoder = png::Decoder::new(BufReader::new(Cursor::new(bytes)));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(bad)?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale {
        return Err(Error::NotGrayscale {
            path: path.to_path_buf(),
            found: format!("PNG {color:?}"),
        });
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| malformed(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data: Vec<f64> = match depth {
        png::BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(info.line_size)
            .flat_map(|row| {
                row[..2 * w]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64)
            })
            .collect(),
        _ => buf[..info.buffer_size()]
            .chunks_exact(info.line_size)
            .flat_map(|row| row[..w].iter().map(|&b| b as f64))
            .collect(),
    };
    ImageField::new(&[w, h], data)
}

/// 8-bit grayscale PNG of `f` mapped from `[lo, hi]` onto `0..=255`.
pub(crate) fn encode_png8(f: &ImageField) -> Vec<u8> {
    let (w, h) = (f.extents()[0], f.extents()[1]);
    let (lo, hi) = f.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels: Vec<u8> = f
        .data()
        .iter()
        .map(|&v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(&pixels).expect("in-memory PNG data");
    }
    out
}

/// Binary PGM; 16-bit when `maxval > 255`. Values are rounded and clamped
/// to `0..=maxval`.
pub(crate) fn encode_pgm(f: &ImageField, maxval: u16) -> Vec<u8> {
    let (w, h) = (f.extents()[0], f.extents()[1]);
    let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    let top = maxval as f64;
    for &v in f.data() {
        let q = v.round().clamp(0.0, top) as u16;
        if maxval > 255 {
            out.extend_from_slice(&q.to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}
