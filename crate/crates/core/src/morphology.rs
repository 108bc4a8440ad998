//! Flat grayscale morphology: erosion, dilation, opening and white top-hat.
//!
//! Erosion pads out-of-bounds neighbours with 255 and dilation with 0, so
//! constant images are fixed points and `erode(x, se) == 255 - dilate(255 - x,
//! reflect(se))` holds up to the border.
//!
//! Each row of a structuring element is split into horizontal runs. For every
//! distinct run length a 1-D sliding min/max (van Herk / Gil-Werman) is taken
//! along each image row, and the output pixel combines one lookup per run.
//! A radius-r disk therefore costs O(r) per pixel instead of O(r²).

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::image::Image;

pub const MAX_DISK_RADIUS: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphologyError {
    #[error("disk radius {0} exceeds the maximum of {MAX_DISK_RADIUS}")]
    RadiusTooLarge(usize),
    #[error("invalid structuring element: {0}")]
    InvalidElement(String),
}

/// Binary neighbourhood footprint with an anchor cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    footprint: Vec<bool>,
    anchor: (usize, usize),
}

impl StructuringElement {
    /// `footprint` is row-major; `anchor` is `(row, col)` and must be set.
    pub fn new(
        width: usize,
        height: usize,
        footprint: Vec<bool>,
        anchor: (usize, usize),
    ) -> Result<Self, MorphologyError> {
        if width == 0 || height == 0 || footprint.len() != width * height {
            return Err(MorphologyError::InvalidElement(format!(
                "{width}x{height} footprint with {} cells",
                footprint.len()
            )));
        }
        let (ar, ac) = anchor;
        if ar >= height || ac >= width {
            return Err(MorphologyError::InvalidElement(format!(
                "anchor ({ar}, {ac}) outside {width}x{height} footprint"
            )));
        }
        if !footprint[ar * width + ac] {
            return Err(MorphologyError::InvalidElement(
                "anchor cell is not part of the footprint".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            footprint,
            anchor,
        })
    }

    /// Disk of the given radius: cell `(i, j)` is set iff
    /// `(i - r)² + (j - r)² <= r²`. Anchored at the centre.
    pub fn disk(radius: usize) -> Result<Self, MorphologyError> {
        if radius > MAX_DISK_RADIUS {
            return Err(MorphologyError::RadiusTooLarge(radius));
        }
        let side = 2 * radius + 1;
        let r = radius as i64;
        let footprint = (0..side * side)
            .map(|idx| {
                let di = (idx / side) as i64 - r;
                let dj = (idx % side) as i64 - r;
                di * di + dj * dj <= r * r
            })
            .collect();
        Self::new(side, side, footprint, (radius, radius))
    }

    /// Full rectangle anchored at its centre (rounded towards the origin).
    pub fn rect(width: usize, height: usize) -> Result<Self, MorphologyError> {
        if width == 0 || height == 0 {
            return Err(MorphologyError::InvalidElement(format!(
                "{width}x{height} rectangle"
            )));
        }
        Self::new(
            width,
            height,
            vec![true; width * height],
            ((height - 1) / 2, (width - 1) / 2),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.footprint[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.footprint.iter().filter(|&&b| b).count()
    }

    /// Point reflection through the anchor.
    pub fn reflect(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let footprint = (0..w * h)
            .map(|idx| {
                let (i, j) = (idx / w, idx % w);
                self.footprint[(h - 1 - i) * w + (w - 1 - j)]
            })
            .collect();
        Self {
            width: w,
            height: h,
            footprint,
            anchor: (h - 1 - self.anchor.0, w - 1 - self.anchor.1),
        }
    }

    /// Offsets `(drow, dcol)` of every set cell relative to the anchor.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (ar, ac) = (self.anchor.0 as isize, self.anchor.1 as isize);
        (0..self.height)
            .flat_map(|i| (0..self.width).map(move |j| (i, j)))
            .filter(|&(i, j)| self.contains(i, j))
            .map(|(i, j)| (i as isize - ar, j as isize - ac))
            .collect()
    }

    /// Horizontal runs of set cells as `(drow, first dcol, length)`.
    fn runs(&self) -> Vec<Run> {
        let (ar, ac) = (self.anchor.0 as isize, self.anchor.1 as isize);
        let mut runs = Vec::new();
        for i in 0..self.height {
            let mut j = 0;
            while j < self.width {
                if !self.contains(i, j) {
                    j += 1;
                    continue;
                }
                let start = j;
                while j < self.width && self.contains(i, j) {
                    j += 1;
                }
                runs.push(Run {
                    drow: i as isize - ar,
                    dcol: start as isize - ac,
                    len: j - start,
                });
            }
        }
        runs
    }
}

#[derive(Clone, Copy, Debug)]
struct Run {
    drow: isize,
    dcol: isize,
    len: usize,
}

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

impl Extremum {
    #[inline]
    fn pick(self, a: u8, b: u8) -> u8 {
        match self {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        }
    }

    fn pad(self) -> u8 {
        match self {
            Extremum::Min => 255,
            Extremum::Max => 0,
        }
    }
}

/// Sliding extremum over windows of `len` of `row` padded by `len - 1` pad
/// values on both sides. Entry `s` covers columns `s - (len - 1) ..= s`.
fn sliding(row: &[u8], len: usize, op: Extremum, out: &mut Vec<u8>) {
    let pad = op.pad();
    let n = row.len() + 2 * (len - 1);
    let padded = |i: usize| -> u8 {
        if i < len - 1 || i >= len - 1 + row.len() {
            pad
        } else {
            row[i - (len - 1)]
        }
    };
    // prefix extremum within each block of `len`, suffix extremum likewise
    let mut prefix = vec![pad; n];
    let mut suffix = vec![pad; n];
    for i in 0..n {
        let v = padded(i);
        prefix[i] = if i % len == 0 { v } else { op.pick(prefix[i - 1], v) };
    }
    for i in (0..n).rev() {
        let v = padded(i);
        suffix[i] = if i % len == len - 1 || i == n - 1 {
            v
        } else {
            op.pick(suffix[i + 1], v)
        };
    }
    out.clear();
    out.extend((0..=n - len).map(|s| op.pick(suffix[s], prefix[s + len - 1])));
}

/// `out[p] = op over runs of the window starting at p + (drow, dcol)`.
fn run_filter(image: &Image, runs: &[Run], op: Extremum) -> Image {
    let (w, h) = (image.width(), image.height());
    let pad = op.pad();
    let lengths: Vec<usize> = {
        let mut l: Vec<usize> = runs.iter().map(|r| r.len).collect();
        l.sort_unstable();
        l.dedup();
        l
    };
    // per run length: one sliding-extremum table per image row
    let tables: BTreeMap<usize, Vec<Vec<u8>>> = lengths
        .par_iter()
        .map(|&len| {
            let rows = (0..h)
                .map(|r| {
                    let mut buf = Vec::new();
                    sliding(image.row(r), len, op, &mut buf);
                    buf
                })
                .collect();
            (len, rows)
        })
        .collect();

    let mut out = vec![pad; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(r, out_row)| {
        for run in runs {
            let src = r as isize + run.drow;
            if src < 0 || src >= h as isize {
                continue;
            }
            let table = &tables[&run.len][src as usize];
            let shift = run.dcol + run.len as isize - 1;
            for (c, o) in out_row.iter_mut().enumerate() {
                let s = c as isize + shift;
                if s >= 0 && (s as usize) < table.len() {
                    *o = op.pick(*o, table[s as usize]);
                }
            }
        }
    });
    Image::new(w, h, out).expect("dimensions preserved")
}

/// Minimum over the footprint translated to each pixel.
pub fn erode(image: &Image, se: &StructuringElement) -> Image {
    run_filter(image, &se.runs(), Extremum::Min)
}

/// Maximum over the footprint reflected through its anchor.
pub fn dilate(image: &Image, se: &StructuringElement) -> Image {
    run_filter(image, &se.reflect().runs(), Extremum::Max)
}

/// Erosion followed by dilation with the same element.
pub fn open(image: &Image, se: &StructuringElement) -> Image {
    dilate(&erode(image, se), se)
}

/// `image - open(image, se)`; keeps bright details smaller than `se`.
pub fn white_tophat(image: &Image, se: &StructuringElement) -> Image {
    let opened = open(image, se);
    let pixels = image
        .pixels()
        .iter()
        .zip(opened.pixels())
        .map(|(&x, &o)| x - o)
        .collect();
    Image::new(image.width(), image.height(), pixels).expect("dimensions preserved")
}
