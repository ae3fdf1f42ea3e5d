use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Output sample depth for [`save_netpbm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Eight,
    Sixteen,
}

impl Depth {
    pub fn maxval(&self) -> u32 {
        match self {
            Depth::Eight => 255,
            Depth::Sixteen => 65535,
        }
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token()?;
        let s = std::str::from_utf8(tok)
            .map_err(|_| Error::MalformedHeader(format!("non-ascii {what}")))?;
        s.parse::<u32>()
            .map_err(|_| Error::MalformedHeader(format!("bad {what} {s:?}")))
    }
}

/// Loads a binary P5 (one channel) or P6 (three channel) netpbm file.
/// Samples map to [0, 1] by dividing by maxval; 16-bit samples are
/// big-endian per the format.
pub fn load_netpbm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = fs::read(path)?;
    parse_netpbm(&bytes)
}

pub fn parse_netpbm(bytes: &[u8]) -> Result<Image> {
    let mut r = HeaderReader::new(bytes);
    let magic = r.token()?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::UnsupportedMagic(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };
    let width = r.number("width")? as usize;
    let height = r.number("height")? as usize;
    let maxval = r.number("maxval")?;
    if maxval != 255 && maxval != 65535 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero dimension".into()));
    }
    // Exactly one whitespace byte separates the maxval from the payload.
    if r.pos >= bytes.len() || !bytes[r.pos].is_ascii_whitespace() {
        return Err(Error::MalformedHeader(
            "missing separator before payload".into(),
        ));
    }
    let payload = &bytes[r.pos + 1..];
    let samples = width * height * channels;
    let bytes_per = if maxval == 255 { 1 } else { 2 };
    let expected = samples * bytes_per;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            got: payload.len(),
        });
    }
    let scale = 1.0 / maxval as f64;
    let mut data = Vec::with_capacity(samples);
    if maxval == 255 {
        data.extend(payload[..expected].iter().map(|b| *b as f64 * scale));
    } else {
        for pair in payload[..expected].chunks_exact(2) {
            let v = u16::from_be_bytes([pair[0], pair[1]]);
            data.push(v as f64 * scale);
        }
    }
    Image::new(height, width, channels, data)
}

fn quantize(v: f64, maxval: u32) -> u32 {
    let clamped = v.clamp(0.0, 1.0);
    // Round half away from zero; values are nonnegative after clamping.
    let q = (clamped * maxval as f64 + 0.5).floor();
    (q as u32).min(maxval)
}

/// Saves as binary P5 (one channel) or P6 (three channels) depending on
/// the image's channel count. Values are clamped to [0, 1] here only.
pub fn save_netpbm(path: impl AsRef<Path>, image: &Image, depth: Depth) -> Result<()> {
    let bytes = encode_netpbm(image, depth);
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn encode_netpbm(image: &Image, depth: Depth) -> Vec<u8> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    let maxval = depth.maxval();
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", image.width(), image.height())
        .into_bytes();
    match depth {
        Depth::Eight => {
            out.extend(image.data().iter().map(|v| quantize(*v, maxval) as u8));
        }
        Depth::Sixteen => {
            for v in image.data() {
                let q = quantize(*v, maxval) as u16;
                out.extend_from_slice(&q.to_be_bytes());
            }
        }
    }
    out
}
