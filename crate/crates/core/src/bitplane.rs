//! Bit-plane slicing.
//!
//! Planes are numbered 1..=8 with plane `k` holding bit `k - 1`, so plane 8
//! is the most significant bit. The segmentation keeps planes 7 and 8 only,
//! which quantises the image to {0, 64, 128, 192} and leaves only the
//! brightest structures distinguishable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{Image, Mask};

pub const PLANE_COUNT: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlaneSelectionError {
    #[error("plane {0} outside 1..=8")]
    OutOfRange(u32),
    #[error("plane list is empty")]
    Empty,
    #[error("cannot parse plane list {0:?}")]
    Parse(String),
}

/// Subset of planes 1..=8, stored as a bit mask over pixel values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct PlaneSelection(u8);

impl PlaneSelection {
    pub const ALL: PlaneSelection = PlaneSelection(0xFF);
    /// Planes 7 and 8.
    pub const MSB_PAIR: PlaneSelection = PlaneSelection(0b1100_0000);

    /// Builds a selection from 1-based plane numbers. Empty lists are
    /// rejected.
    pub fn new(planes: impl IntoIterator<Item = u32>) -> Result<Self, PlaneSelectionError> {
        let mut bits = 0u8;
        for k in planes {
            if !(1..=8).contains(&k) {
                return Err(PlaneSelectionError::OutOfRange(k));
            }
            bits |= 1 << (k - 1);
        }
        if bits == 0 {
            return Err(PlaneSelectionError::Empty);
        }
        Ok(PlaneSelection(bits))
    }

    /// Value mask: bit `k - 1` set for every kept plane `k`.
    pub fn value_mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, plane: u32) -> bool {
        (1..=8).contains(&plane) && self.0 & (1 << (plane - 1)) != 0
    }

    /// Kept planes in ascending order.
    pub fn planes(self) -> Vec<u32> {
        (1..=8).filter(|&k| self.contains(k)).collect()
    }

    pub fn is_subset_of(self, other: PlaneSelection) -> bool {
        self.0 & !other.0 == 0
    }
}

impl Default for PlaneSelection {
    fn default() -> Self {
        Self::MSB_PAIR
    }
}

impl TryFrom<Vec<u32>> for PlaneSelection {
    type Error = PlaneSelectionError;

    fn try_from(planes: Vec<u32>) -> Result<Self, Self::Error> {
        Self::new(planes)
    }
}

impl From<PlaneSelection> for Vec<u32> {
    fn from(sel: PlaneSelection) -> Self {
        sel.planes()
    }
}

impl FromStr for PlaneSelection {
    type Err = PlaneSelectionError;

    /// Comma-separated plane numbers, e.g. `"7,8"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let planes = s
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u32>().map_err(|_| PlaneSelectionError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(planes)
    }
}

impl fmt::Display for PlaneSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.planes().iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// The eight binary planes of an image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneSet {
    planes: Vec<Mask>,
}

impl PlaneSet {
    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    /// Plane `k` for `k` in 1..=8.
    ///
    /// Panics when `k` is out of range.
    pub fn plane(&self, k: u32) -> &Mask {
        assert!((1..=8).contains(&k), "plane index {k} outside 1..=8");
        &self.planes[k as usize - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Mask)> {
        (1u32..).zip(self.planes.iter())
    }
}

pub fn decompose(image: &Image) -> PlaneSet {
    let planes = (0..PLANE_COUNT)
        .map(|bit| Mask::from_image(image, |p| (p >> bit) & 1 == 1))
        .collect();
    PlaneSet { planes }
}

/// Sum of `plane_k(p) * 2^(k-1)` over the selected planes.
pub fn recompose(planes: &PlaneSet, selection: PlaneSelection) -> Image {
    let (w, h) = (planes.width(), planes.height());
    let mut pixels = vec![0u8; w * h];
    for (k, plane) in planes.iter() {
        if !selection.contains(k) {
            continue;
        }
        let weight = 1u8 << (k - 1);
        for (px, &bit) in pixels.iter_mut().zip(plane.bits()) {
            *px |= bit * weight;
        }
    }
    Image::new(w, h, pixels).expect("planes share dimensions")
}

/// Keeps only the selected planes, without materialising them.
pub fn select_planes(image: &Image, selection: PlaneSelection) -> Image {
    let m = selection.value_mask();
    image.map(|p| p & m)
}

/// Planes 7 and 8 only: every output pixel is one of 0, 64, 128, 192.
pub fn msb_filter(image: &Image) -> Image {
    select_planes(image, PlaneSelection::MSB_PAIR)
}
