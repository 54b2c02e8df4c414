use crate::{Error, Result};

/// How the samples of an [`ImageRgb`] relate to radiance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Encoding {
    Linear,
    /// Samples are `v^(1/γ)` of a linear value in `[0, 1]`.
    Gamma(f32),
}

/// Row-major RGB image, top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    data: Vec<f32>,
    encoding: Encoding,
}

/// Row-major single-channel image, top row first.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageScalar {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

fn check_finite(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, data: Vec<f32>, encoding: Encoding) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} RGB image needs {} samples, got {}",
                width * height * 3,
                data.len()
            )));
        }
        check_finite(&data)?;
        if let Encoding::Gamma(g) = encoding {
            if !(g > 0.0) {
                return Err(Error::InvalidArgument(format!("gamma must be positive, got {g}")));
            }
            if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidArgument(format!(
                    "gamma-encoded sample {i} outside [0, 1]: {}",
                    data[i]
                )));
            }
        }
        Ok(Self {
            width,
            height,
            data,
            encoding,
        })
    }

    pub fn linear(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        Self::new(width, height, data, Encoding::Linear)
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let data = std::iter::repeat_n(rgb, width * height).flatten().collect();
        Self {
            width,
            height,
            data,
            encoding: Encoding::Linear,
        }
    }

    /// Builds a linear image from a per-pixel function of `(x, y)`.
    ///
    /// Panics if `f` returns a non-finite sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                assert!(px.iter().all(|v| v.is_finite()), "non-finite pixel at ({x}, {y})");
                data.extend_from_slice(&px);
            }
        }
        Self {
            width,
            height,
            data,
            encoding: Encoding::Linear,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> [f32; 3] {
        let i = index * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [f32; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Applies `f` to every pixel, keeping the encoding tag.
    ///
    /// Panics if `f` produces a non-finite sample.
    pub fn map_pixels(&self, mut f: impl FnMut([f32; 3]) -> [f32; 3]) -> Self {
        let data: Vec<f32> = self.pixels().flat_map(&mut f).collect();
        assert!(data.iter().all(|v| v.is_finite()), "map_pixels produced a non-finite sample");
        Self {
            width: self.width,
            height: self.height,
            data,
            encoding: self.encoding,
        }
    }

    pub(crate) fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn min_max(&self) -> (f32, f32) {
        min_max(&self.data)
    }
}

impl ImageScalar {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} scalar image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(width: usize, height: usize, data: Vec<f32>) -> Self {
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v.is_finite(), "non-finite value at ({x}, {y})");
                data.push(v);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f32, f32) {
        min_max(&self.data)
    }

    /// Replicates the scalar into all three channels.
    pub fn to_rgb(&self) -> ImageRgb {
        ImageRgb {
            width: self.width,
            height: self.height,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            encoding: Encoding::Linear,
        }
    }
}

fn min_max(data: &[f32]) -> (f32, f32) {
    data.iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        assert!(matches!(
            ImageRgb::linear(2, 2, vec![0.0; 11]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            ImageScalar::new(1, 2, vec![0.0, f32::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn gamma_images_must_be_in_unit_range() {
        assert!(ImageRgb::new(1, 1, vec![0.2, 0.5, 1.5], Encoding::Gamma(2.0)).is_err());
        assert!(ImageRgb::new(1, 1, vec![0.2, 0.5, 1.0], Encoding::Gamma(2.0)).is_ok());
        assert!(ImageRgb::new(1, 1, vec![0.2, 0.5, 1.0], Encoding::Gamma(0.0)).is_err());
    }

    #[test]
    fn pixel_accessors_are_row_major() {
        let img = ImageRgb::from_fn(3, 2, |x, y| [x as f32, y as f32, 0.0]);
        assert_eq!(img.get(2, 1), [2.0, 1.0, 0.0]);
        assert_eq!(img.pixel(4), [1.0, 1.0, 0.0]);
    }
}
