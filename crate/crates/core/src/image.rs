//! 8-bit grayscale rasters and binary masks.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("raster dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} samples for a {width}x{height} raster, got {actual}")]
    LengthMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("mask values must be 0 or 1, found {0}")]
    NonBinary(u8),
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 {
        return Err(RasterError::EmptyDimensions { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(RasterError::LengthMismatch {
            width,
            height,
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// Single-channel 8-bit image, row-major with the origin at the top-left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image with every pixel set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("positive dimensions")
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels).expect("positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every pixel, keeping the dimensions.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Number of non-zero pixels.
    pub fn count_nonzero(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }
}

/// Binary raster marking foreground pixels with 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, RasterError> {
        check_dims(width, height, bits.len())?;
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(RasterError::NonBinary(bad));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0; width * height]).expect("positive dimensions")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                bits.push(u8::from(f(r, c)));
            }
        }
        Self::new(width, height, bits).expect("positive dimensions")
    }

    /// Mask of pixels satisfying `pred`.
    pub fn from_image(image: &Image, pred: impl Fn(u8) -> bool) -> Self {
        Mask {
            width: image.width,
            height: image.height,
            bits: image.pixels.iter().map(|&p| u8::from(pred(p))).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col] != 0
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// Foreground as 255, background as 0.
    pub fn to_image(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b != 0 { 255 } else { 0 }).collect(),
        }
    }

    /// Dice overlap `2|A∩B| / (|A|+|B|)`; two empty masks score 1.
    ///
    /// Panics if the dimensions differ.
    pub fn dice(&self, other: &Mask) -> f64 {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "dice requires equal dimensions"
        );
        let both = self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a != 0 && b != 0)
            .count();
        let total = self.count() + other.count();
        if total == 0 {
            1.0
        } else {
            2.0 * both as f64 / total as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_length_mismatch() {
        assert!(matches!(
            Image::new(2, 2, vec![0; 3]),
            Err(RasterError::LengthMismatch { expected: 4, .. })
        ));
        assert!(matches!(
            Image::new(0, 2, vec![]),
            Err(RasterError::EmptyDimensions { .. })
        ));
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert_eq!(Mask::new(1, 1, vec![2]), Err(RasterError::NonBinary(2)));
    }

    #[test]
    fn mask_maps_to_black_and_white() {
        let m = Mask::new(2, 1, vec![1, 0]).unwrap();
        assert_eq!(m.to_image().pixels(), &[255, 0]);
    }

    #[test]
    fn dice_of_partial_overlap() {
        let a = Mask::new(4, 1, vec![1, 1, 0, 0]).unwrap();
        let b = Mask::new(4, 1, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(a.dice(&b), 0.5);
        assert_eq!(a.dice(&a), 1.0);
        assert_eq!(Mask::empty(4, 1).dice(&Mask::empty(4, 1)), 1.0);
    }
}
