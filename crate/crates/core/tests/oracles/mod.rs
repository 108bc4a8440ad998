//! Brute-force reference implementations used by the test suites.
//!
//! These are written directly from the definitions and share no code with
//! the library beyond its public data types.

#![allow(dead_code)]

use std::collections::VecDeque;

use fillseg_core::morphology::StructuringElement;
use fillseg_core::{Image, Mask};
use num_bigint::BigInt;
use num_rational::BigRational;

fn footprint_offsets(se: &StructuringElement) -> Vec<(isize, isize)> {
    let (ar, ac) = se.anchor();
    let mut out = Vec::new();
    for i in 0..se.height() {
        for j in 0..se.width() {
            if se.contains(i, j) {
                out.push((i as isize - ar as isize, j as isize - ac as isize));
            }
        }
    }
    out
}

fn sample(img: &Image, r: isize, c: isize, pad: u8) -> u8 {
    if r < 0 || c < 0 || r >= img.height() as isize || c >= img.width() as isize {
        pad
    } else {
        img.get(r as usize, c as usize)
    }
}

/// Nested-loop minimum over `p + d` for every footprint offset `d`.
pub fn erode(img: &Image, se: &StructuringElement) -> Image {
    let offs = footprint_offsets(se);
    Image::from_fn(img.width(), img.height(), |r, c| {
        offs.iter()
            .map(|&(dr, dc)| sample(img, r as isize + dr, c as isize + dc, 255))
            .min()
            .unwrap()
    })
}

/// Nested-loop maximum over `p - d` for every footprint offset `d`.
pub fn dilate(img: &Image, se: &StructuringElement) -> Image {
    let offs = footprint_offsets(se);
    Image::from_fn(img.width(), img.height(), |r, c| {
        offs.iter()
            .map(|&(dr, dc)| sample(img, r as isize - dr, c as isize - dc, 0))
            .max()
            .unwrap()
    })
}

pub fn open(img: &Image, se: &StructuringElement) -> Image {
    dilate(&erode(img, se), se)
}

pub fn tophat(img: &Image, se: &StructuringElement) -> Image {
    let o = open(img, se);
    Image::from_fn(img.width(), img.height(), |r, c| img.get(r, c) - o.get(r, c))
}

/// Exhaustive Otsu: the smallest `t` in 0..=254 with the largest
/// `ω0·ω1·(μ0 − μ1)²`, evaluated in exact rationals. `None` when fewer than
/// two bins are occupied.
pub fn otsu(counts: &[u64; 256]) -> Option<u8> {
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total: u64 = counts.iter().sum();
    let big = |x: u64| BigRational::from_integer(BigInt::from(x));
    let mut best: Option<(u8, BigRational)> = None;
    for t in 0..255usize {
        let n0: u64 = counts[..=t].iter().sum();
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: u64 = (0..=t).map(|v| v as u64 * counts[v]).sum();
        let s1: u64 = (t + 1..256).map(|v| v as u64 * counts[v]).sum();
        let w0 = big(n0) / big(total);
        let w1 = big(n1) / big(total);
        let m0 = big(s0) / big(n0);
        let m1 = big(s1) / big(n1);
        let d = m0 - m1;
        let var = w0 * w1 * d.clone() * d;
        if best.as_ref().is_none_or(|(_, b)| var > *b) {
            best = Some((t as u8, var));
        }
    }
    best.map(|(t, _)| t)
}

/// Breadth-first flood fill; labels are assigned in raster order of each
/// component's first pixel.
pub fn flood_fill(mask: &Mask, eight: bool) -> (Vec<u32>, u32) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    let neighbours: Vec<(isize, isize)> = if eight {
        vec![(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    } else {
        vec![(-1, 0), (0, -1), (0, 1), (1, 0)]
    };
    for start in 0..w * h {
        if mask.bits()[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (r, c) = ((p / w) as isize, (p % w) as isize);
            for &(dr, dc) in &neighbours {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let q = nr as usize * w + nc as usize;
                if mask.bits()[q] == 1 && labels[q] == 0 {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (labels, next)
}

/// Minimum within-cluster SSE over every cut `values <= c | values > c`,
/// with the first cut achieving it.
pub fn optimal_two_means(counts: &[u64; 256]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for cut in 0..255 {
        let sse = |range: std::ops::Range<usize>| -> Option<f64> {
            let n: u64 = range.clone().map(|v| counts[v]).sum();
            if n == 0 {
                return None;
            }
            let mean = range.clone().map(|v| v as f64 * counts[v] as f64).sum::<f64>() / n as f64;
            Some(range.map(|v| counts[v] as f64 * (v as f64 - mean).powi(2)).sum())
        };
        if let (Some(a), Some(b)) = (sse(0..cut + 1), sse(cut + 1..256)) {
            if a + b < best.0 {
                best = (a + b, cut);
            }
        }
    }
    best
}

/// Pixel count of an axis-aligned ellipse by direct enumeration.
pub fn ellipse_pixels(w: usize, h: usize, cy: f64, cx: f64, ry: f64, rx: f64) -> Mask {
    Mask::from_fn(w, h, |r, c| {
        let y = r as f64 - cy;
        let x = c as f64 - cx;
        // cross-multiplied form of (y/ry)² + (x/rx)² <= 1
        y * y * rx * rx + x * x * ry * ry <= rx * rx * ry * ry
    })
}
