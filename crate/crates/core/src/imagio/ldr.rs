//! 8-bit PNG interchange for gamma-encoded composites.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::image::{Encoding, ImageRgb};
use super::units::STORAGE_GAMMA;
use crate::{Error, Result};

pub(crate) fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a gamma-encoded image as 8-bit RGB PNG.
pub fn write_png(path: impl AsRef<Path>, img: &ImageRgb) -> Result<()> {
    let path = path.as_ref();
    if img.encoding() == Encoding::Linear {
        return Err(Error::InvalidArgument(
            "refusing to write a linear image as 8-bit PNG; gamma-encode it first".into(),
        ));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width() as u32, img.height() as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let png_err = |e: png::EncodingError| Error::Png(format!("{}: {e}", path.display()));
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&bytes).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// Reads an 8-bit PNG (grey, grey+alpha, RGB or RGBA) as a γ = 2.0 image.
/// Alpha is discarded; 16-bit files are reduced to 8 bits.
pub fn read_png(path: impl AsRef<Path>) -> Result<ImageRgb> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let png_err = |e: png::DecodingError| Error::Png(format!("{}: {e}", path.display()));
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Png(format!("{}: image too large", path.display())))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(Error::Png(format!("{}: unexpanded palette image", path.display())))
        }
    };
    let mut data = Vec::with_capacity(w * h * 3);
    for row in buf[..info.buffer_size()].chunks_exact(info.line_size) {
        for px in row[..w * channels].chunks_exact(channels) {
            let rgb = if channels < 3 { [px[0]; 3] } else { [px[0], px[1], px[2]] };
            data.extend(rgb.iter().map(|&b| b as f32 / 255.0));
        }
    }
    ImageRgb::new(w, h, data, Encoding::Gamma(STORAGE_GAMMA))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_rounds_to_nearest() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(2.0), 255);
        assert_eq!(quantize(-0.5), 0);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(10.4 / 255.0), 10);
    }

    #[test]
    fn png_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = ImageRgb::from_fn(5, 3, |x, y| [x as f32 / 4.0, y as f32 / 2.0, 0.3])
            .with_encoding(Encoding::Gamma(2.0));
        write_png(&path, &img).unwrap();
        let back = read_png(&path).unwrap();
        assert_eq!(back.dims(), (5, 3));
        assert_eq!(back.encoding(), Encoding::Gamma(2.0));
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-7);
        }
    }

    #[test]
    fn linear_images_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageRgb::filled(1, 1, [0.5; 3]);
        assert!(write_png(dir.path().join("x.png"), &img).is_err());
    }
}
