//! Image files: PNG (8/16-bit gray or color) and binary PGM in, 16-bit
//! grayscale PNG out. Samples map to `[0, 1]` by the format's full range.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use geosep_core::RasterImage;

use crate::error::{CliError, Result};

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Luma weights for color input.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

fn corrupt(path: &Path, reason: impl Into<String>) -> CliError {
    CliError::Corrupt {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn unsupported(path: &Path, reason: impl Into<String>) -> CliError {
    CliError::Unsupported {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a PNG or P5 PGM file, sniffing the format from its first bytes.
pub fn load_image(path: &Path) -> Result<RasterImage> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(&PNG_MAGIC) {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(path, &bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(unsupported(path, "only binary (P5) PGM is supported"))
    } else {
        Err(unsupported(path, "expected PNG or binary PGM"))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<RasterImage> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| corrupt(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| unsupported(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| corrupt(path, e.to_string()))?;
    let (color, depth) = (frame.color_type, frame.bit_depth);
    let (height, width) = (frame.height as usize, frame.width as usize);
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(unsupported(path, "palette was not expanded")),
    };
    let (bytes_per_sample, full) = match depth {
        png::BitDepth::Eight => (1, 255.0),
        png::BitDepth::Sixteen => (2, 65535.0),
        other => return Err(unsupported(path, format!("bit depth {other:?} after expansion"))),
    };
    let sample = |i: usize| -> f64 {
        let v = if bytes_per_sample == 1 {
            buf[i] as f64
        } else {
            u16::from_be_bytes([buf[2 * i], buf[2 * i + 1]]) as f64
        };
        v / full
    };
    let mut data = Vec::with_capacity(height * width);
    for r in 0..height {
        let row_start = r * frame.line_size / bytes_per_sample;
        for c in 0..width {
            let base = row_start + c * channels;
            let v = if channels >= 3 {
                LUMA[0] * sample(base) + LUMA[1] * sample(base + 1) + LUMA[2] * sample(base + 2)
            } else {
                sample(base)
            };
            data.push(v);
        }
    }
    RasterImage::new(height, width, data).map_err(|e| corrupt(path, e.to_string()))
}

/// Header fields of a P5 file and the offset of the raster.
fn pgm_header(bytes: &[u8]) -> Option<([usize; 3], usize)> {
    let mut fields = [0usize; 3];
    let mut pos = 2;
    for field in &mut fields {
        loop {
            match bytes.get(pos)? {
                b'#' => {
                    while *bytes.get(pos)? != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos]).ok()?.parse().ok()?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos)?.is_ascii_whitespace() {
        return None;
    }
    Some((fields, pos + 1))
}

fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<RasterImage> {
    let ([width, height, maxval], offset) = pgm_header(bytes).ok_or_else(|| corrupt(path, "malformed PGM header"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(corrupt(path, format!("maxval {maxval} outside 1..=65535")));
    }
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let raster = &bytes[offset..];
    if raster.len() < need {
        return Err(corrupt(path, format!("raster has {} bytes, expected {need}", raster.len())));
    }
    let full = maxval as f64;
    let data = (0..width * height)
        .map(|i| {
            let v = if wide {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as f64
            } else {
                raster[i] as f64
            };
            (v / full).min(1.0)
        })
        .collect();
    RasterImage::new(height, width, data).map_err(|e| corrupt(path, e.to_string()))
}

/// 16-bit samples of `img` clamped to `[0, 1]`, big-endian.
pub fn quantize16(img: &RasterImage) -> Vec<u8> {
    img.data()
        .iter()
        .flat_map(|&v| {
            let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            q.to_be_bytes()
        })
        .collect()
}

/// Writes `img` as a 16-bit grayscale PNG, clamping to `[0, 1]`.
pub fn save_image(img: &RasterImage, path: &Path) -> Result<()> {
    if !img.is_finite() {
        return Err(CliError::Numeric(geosep_core::Error::NonFinite {
            stage: "save",
            iteration: 0,
        }));
    }
    write_png(path, img.width(), img.height(), png::ColorType::Grayscale, png::BitDepth::Sixteen, &quantize16(img))
}

/// Encodes raw samples; used for the 16-bit gray outputs and the RGB plots.
pub(crate) fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let to_io = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(other)),
    };
    let mut writer = encoder.write_header().map_err(to_io)?;
    writer.write_image_data(data).map_err(to_io)?;
    writer.finish().map_err(to_io)
}

/// Opens `path` for buffered reading.
pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}
