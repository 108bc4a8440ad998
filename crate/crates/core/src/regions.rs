//! Connected-component labelling and per-region area statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::Mask;

/// Physical area of one pixel at a 0.28 mm pitch.
pub const DEFAULT_PIXEL_AREA_MM2: f64 = 0.0784;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("connectivity must be 4 or 8, got {0}")]
pub struct ConnectivityError(pub String);

/// Pixel adjacency used for labelling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = ConnectivityError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(ConnectivityError(other.to_string())),
        }
    }
}

impl FromStr for Connectivity {
    type Err = ConnectivityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .map_err(|_| ConnectivityError(s.to_string()))
            .and_then(Connectivity::try_from)
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// Disjoint-set forest over provisional labels.
#[derive(Debug, Default)]
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so roots stay in creation order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Per-pixel component labels, 0 for background and 1..=count otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Pixel count per label; index 0 is background.
    pub fn areas(&self) -> Vec<u64> {
        let mut areas = vec![0u64; self.count as usize + 1];
        for &l in &self.labels {
            areas[l as usize] += 1;
        }
        areas
    }

    pub fn to_mask(&self) -> Mask {
        let bits = self.labels.iter().map(|&l| u8::from(l != 0)).collect();
        Mask::new(self.width, self.height, bits).expect("same dimensions")
    }
}

/// Two-pass union-find labelling. Components are numbered in raster order of
/// their first pixel.
pub fn label_components(mask: &Mask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let mut provisional = vec![u32::MAX; w * h];
    let mut sets = UnionFind::default();

    // already-visited neighbours: W, then NW, N, NE for 8-connectivity
    let back: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(0, -1), (-1, 0)],
        Connectivity::Eight => &[(0, -1), (-1, -1), (-1, 0), (-1, 1)],
    };

    for r in 0..h {
        for c in 0..w {
            if !mask.get(r, c) {
                continue;
            }
            let mut assigned: Option<u32> = None;
            for &(dr, dc) in back {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nc >= w as isize {
                    continue;
                }
                let n = provisional[nr as usize * w + nc as usize];
                if n == u32::MAX {
                    continue;
                }
                match assigned {
                    None => assigned = Some(n),
                    Some(a) => sets.union(a, n),
                }
            }
            provisional[r * w + c] = assigned.unwrap_or_else(|| sets.make_set());
        }
    }

    let mut dense = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    let labels = provisional
        .into_iter()
        .map(|p| {
            if p == u32::MAX {
                return 0;
            }
            let root = sets.find(p) as usize;
            if dense[root] == 0 {
                count += 1;
                dense[root] = count;
            }
            dense[root]
        })
        .collect();
    LabelMap {
        width: w,
        height: h,
        labels,
        count,
    }
}

/// Drops components smaller than `min_px` and renumbers the rest in order.
pub fn filter_small(labels: &LabelMap, min_px: u64) -> LabelMap {
    let areas = labels.areas();
    let mut remap = vec![0u32; areas.len()];
    let mut count = 0u32;
    for (label, &area) in areas.iter().enumerate().skip(1) {
        if area >= min_px {
            count += 1;
            remap[label] = count;
        }
    }
    LabelMap {
        width: labels.width,
        height: labels.height,
        labels: labels.labels.iter().map(|&l| remap[l as usize]).collect(),
        count,
    }
}

/// Inclusive pixel bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

/// Statistics of one labelled component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: u32,
    pub area_px: u64,
    #[serde(serialize_with = "crate::pipeline::serialize_rounded")]
    pub area_mm2: f64,
    pub bbox: BoundingBox,
    /// `(row, col)` mean of the member pixel coordinates.
    #[serde(serialize_with = "crate::pipeline::serialize_rounded_pair")]
    pub centroid: (f64, f64),
}

/// One region per label, ordered by label.
pub fn region_stats(labels: &LabelMap, pixel_area_mm2: f64) -> Vec<Region> {
    let n = labels.count as usize;
    let mut area = vec![0u64; n];
    let mut row_sum = vec![0u64; n];
    let mut col_sum = vec![0u64; n];
    let mut bbox = vec![
        BoundingBox {
            min_row: usize::MAX,
            min_col: usize::MAX,
            max_row: 0,
            max_col: 0,
        };
        n
    ];
    for r in 0..labels.height {
        for c in 0..labels.width {
            let l = labels.get(r, c);
            if l == 0 {
                continue;
            }
            let i = l as usize - 1;
            area[i] += 1;
            row_sum[i] += r as u64;
            col_sum[i] += c as u64;
            let b = &mut bbox[i];
            b.min_row = b.min_row.min(r);
            b.min_col = b.min_col.min(c);
            b.max_row = b.max_row.max(r);
            b.max_col = b.max_col.max(c);
        }
    }
    (0..n)
        .map(|i| Region {
            label: i as u32 + 1,
            area_px: area[i],
            area_mm2: area[i] as f64 * pixel_area_mm2,
            bbox: bbox[i],
            centroid: (
                row_sum[i] as f64 / area[i] as f64,
                col_sum[i] as f64 / area[i] as f64,
            ),
        })
        .collect()
}

pub fn total_area_mm2(regions: &[Region]) -> f64 {
    regions.iter().map(|r| r.area_mm2).sum()
}

/// Absolute difference between a measured and a reference area.
pub fn area_error(predicted_mm2: f64, manual_mm2: f64) -> f64 {
    (predicted_mm2 - manual_mm2).abs()
}
