//! Image and JSON writers. Floats in JSON carry 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use super::{CenterRecord, PixelTag};

/// Compact JSON with every float in scientific notation with 17
/// significant digits, which round-trips exactly.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("serializing to memory does not fail");
    let mut s = String::from_utf8(buf).expect("serde_json writes UTF-8");
    s.push('\n');
    s
}

pub fn centers_json(centers: &[CenterRecord]) -> String {
    to_json(centers)
}

/// Interleaved RGB bytes, row-major from the top-left pixel.
pub fn rgb_buffer(tags: &[PixelTag]) -> Vec<u8> {
    tags.iter().flat_map(|t| t.rgb()).collect()
}

/// Binary PPM (`P6`, maxval 255).
pub fn ppm_bytes(cols: usize, rows: usize, tags: &[PixelTag]) -> Vec<u8> {
    assert_eq!(tags.len(), cols * rows, "pixel count does not match the image size");
    let mut out = format!("P6\n{cols} {rows}\n255\n").into_bytes();
    out.extend(rgb_buffer(tags));
    out
}

pub fn write_ppm<W: Write>(mut w: W, cols: usize, rows: usize, tags: &[PixelTag]) -> io::Result<()> {
    w.write_all(&ppm_bytes(cols, rows, tags))
}
