//! Portable Float Map reader/writer.
//!
//! Files are written as `PF`/`Pf`, `<w> <h>`, scale `-1.0` (little-endian),
//! followed by rows bottom to top. The reader also accepts big-endian files
//! (positive scale).

use std::fs;
use std::path::Path;

use super::image::{ImageRgb, ImageScalar};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PfmImage {
    Rgb(ImageRgb),
    Scalar(ImageScalar),
}

impl PfmImage {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            PfmImage::Rgb(img) => img.dims(),
            PfmImage::Scalar(img) => img.dims(),
        }
    }

    fn channels(&self) -> usize {
        match self {
            PfmImage::Rgb(_) => 3,
            PfmImage::Scalar(_) => 1,
        }
    }

    fn samples(&self) -> &[f32] {
        match self {
            PfmImage::Rgb(img) => img.data(),
            PfmImage::Scalar(img) => img.data(),
        }
    }
}

impl From<ImageRgb> for PfmImage {
    fn from(img: ImageRgb) -> Self {
        PfmImage::Rgb(img)
    }
}

impl From<ImageScalar> for PfmImage {
    fn from(img: ImageScalar) -> Self {
        PfmImage::Scalar(img)
    }
}

pub(crate) fn encode_pfm(img: &PfmImage) -> Result<Vec<u8>> {
    let (w, h) = img.dims();
    let channels = img.channels();
    let samples = img.samples();
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let magic = if channels == 3 { "PF" } else { "Pf" };
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(samples.len() * 4);
    let row_len = w * channels;
    for y in (0..h).rev() {
        for v in &samples[y * row_len..(y + 1) * row_len] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_pfm(path: impl AsRef<Path>, img: &PfmImage) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pfm(img)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn token(&mut self, what: &str) -> Result<&'a str> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedPfm(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::MalformedPfm(format!("non-ASCII {what}")))
    }

    /// Consumes the single whitespace byte that separates header and payload.
    fn end_of_header(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            _ => Err(Error::MalformedPfm("header not terminated by whitespace".into())),
        }
    }
}

pub(crate) fn decode_pfm(bytes: &[u8]) -> Result<PfmImage> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let channels = match cursor.token("magic")? {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(Error::MalformedPfm(format!("unknown magic {other:?}"))),
    };
    let parse_dim = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::MalformedPfm(format!("invalid {what} {s:?}")))
    };
    let w = parse_dim(cursor.token("width")?, "width")?;
    let h = parse_dim(cursor.token("height")?, "height")?;
    let scale_token = cursor.token("scale")?;
    let scale: f32 = scale_token
        .parse()
        .ok()
        .filter(|s: &f32| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::MalformedPfm(format!("invalid scale {scale_token:?}")))?;
    let little_endian = scale < 0.0;
    let start = cursor.end_of_header()?;

    let count = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::MalformedPfm("dimensions overflow".into()))?;
    let expected = count * 4;
    let payload = &bytes[start..];
    if payload.len() < expected {
        return Err(Error::TruncatedPfm {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::MalformedPfm(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }

    let mut data = vec![0f32; count];
    let row_len = w * channels;
    for (file_row, chunk) in payload.chunks_exact(row_len * 4).enumerate() {
        let y = h - 1 - file_row;
        for (x, b) in chunk.chunks_exact(4).enumerate() {
            let b = [b[0], b[1], b[2], b[3]];
            data[y * row_len + x] = if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
        }
    }
    Ok(if channels == 3 {
        PfmImage::Rgb(ImageRgb::linear(w, h, data)?)
    } else {
        PfmImage::Scalar(ImageScalar::new(w, h, data)?)
    })
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<PfmImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes)
}

/// Reads a three-channel PFM.
pub fn read_pfm_rgb(path: impl AsRef<Path>) -> Result<ImageRgb> {
    match read_pfm(path.as_ref())? {
        PfmImage::Rgb(img) => Ok(img),
        PfmImage::Scalar(_) => Err(Error::MalformedPfm(format!(
            "{}: expected an RGB (PF) file, found greyscale",
            path.as_ref().display()
        ))),
    }
}

/// Reads a single-channel PFM.
pub fn read_pfm_scalar(path: impl AsRef<Path>) -> Result<ImageScalar> {
    match read_pfm(path.as_ref())? {
        PfmImage::Scalar(img) => Ok(img),
        PfmImage::Rgb(_) => Err(Error::MalformedPfm(format!(
            "{}: expected a greyscale (Pf) file, found RGB",
            path.as_ref().display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_rgb_pixel_layout() {
        let img = PfmImage::Rgb(ImageRgb::linear(1, 1, vec![0.5, 0.25, 1.0]).unwrap());
        let bytes = encode_pfm(&img).unwrap();
        let header = b"PF\n1 1\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 12);
        assert_eq!(&bytes[header.len()..header.len() + 4], &0.5f32.to_le_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap(), img);
    }

    #[test]
    fn zero_scalar_round_trip() {
        let img = PfmImage::Scalar(ImageScalar::filled(2, 2, 0.0));
        let bytes = encode_pfm(&img).unwrap();
        assert!(bytes.starts_with(b"Pf\n2 2\n-1.0\n"));
        assert_eq!(decode_pfm(&bytes).unwrap(), img);
    }

    #[test]
    fn rows_are_stored_bottom_up() {
        let img = ImageScalar::new(1, 2, vec![1.0, 2.0]).unwrap();
        let bytes = encode_pfm(&PfmImage::Scalar(img)).unwrap();
        let payload = &bytes[bytes.len() - 8..];
        assert_eq!(&payload[..4], &2.0f32.to_le_bytes());
        assert_eq!(&payload[4..], &1.0f32.to_le_bytes());
    }

    #[test]
    fn reads_big_endian() {
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&3.5f32.to_be_bytes());
        bytes.extend_from_slice(&(-1.0f32).to_be_bytes());
        match decode_pfm(&bytes).unwrap() {
            PfmImage::Scalar(img) => assert_eq!(img.data(), &[3.5, -1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(decode_pfm(b"P6\n1 1\n-1.0\n"), Err(Error::MalformedPfm(_))));
        assert!(matches!(decode_pfm(b"PF\n1\n"), Err(Error::MalformedPfm(_))));
        assert!(matches!(decode_pfm(b"PF\n0 1\n-1.0\n"), Err(Error::MalformedPfm(_))));
        assert!(matches!(decode_pfm(b"PF\n1 1\nabc\n"), Err(Error::MalformedPfm(_))));
        assert!(matches!(
            decode_pfm(b"PF\n1 1\n-1.0\n\0\0\0\0"),
            Err(Error::TruncatedPfm {
                expected: 12,
                found: 4
            })
        ));
        let mut nan = b"Pf\n1 1\n-1.0\n".to_vec();
        nan.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_pfm(&nan), Err(Error::NonFinite(0))));
    }

    #[test]
    fn write_rejects_non_finite() {
        let img = ImageScalar::new_unchecked(2, 1, vec![1.0, f32::INFINITY]);
        assert!(matches!(encode_pfm(&PfmImage::Scalar(img)), Err(Error::NonFinite(1))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_images_round_trip_bit_exact(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f32> = (0..64 * 64 * 3)
                .map(|_| f32::from_bits(rng.gen::<u32>()))
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            let img = PfmImage::Rgb(ImageRgb::linear(64, 64, data).unwrap());
            let back = decode_pfm(&encode_pfm(&img).unwrap()).unwrap();
            let (PfmImage::Rgb(a), PfmImage::Rgb(b)) = (&img, &back) else { panic!() };
            prop_assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
