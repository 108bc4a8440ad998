//! Histogram-weighted 1-D k-means on pixel intensities.
//!
//! Clustering runs on the 256-bin histogram, so each Lloyd step costs
//! O(256·k) regardless of image size. Centroids start at the quantiles
//! `(2i + 1) / 2k` of the sorted pixel values, which keeps the result
//! deterministic.

use thiserror::Error;

use crate::image::{Image, Mask};
use crate::threshold::Histogram;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KmeansError {
    #[error("need at least {k} distinct intensities for k = {k}, found {distinct}")]
    TooFewDistinctValues { k: usize, distinct: usize },
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
}

/// Converged clustering of an image's intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    /// Ascending cluster centres.
    pub centroids: Vec<f64>,
    /// Cluster index of every histogram bin.
    pub bin_assignment: [u8; 256],
    /// Cluster index of every pixel, row-major.
    pub assignments: Vec<u8>,
    pub iterations: usize,
    /// Within-cluster sum of squared deviations after initialisation and
    /// after each update step.
    pub sse_history: Vec<f64>,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn sse(&self) -> f64 {
        *self.sse_history.last().expect("history is never empty")
    }
}

/// Index of the nearest centroid, ties to the lower index.
fn nearest(value: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centroids.iter().enumerate() {
        let d = (value - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn assign(counts: &[u64; 256], centroids: &[f64]) -> [u8; 256] {
    let mut out = [0u8; 256];
    for (v, slot) in out.iter_mut().enumerate() {
        if counts[v] > 0 {
            *slot = nearest(v as f64, centroids) as u8;
        }
    }
    out
}

fn sse(counts: &[u64; 256], centroids: &[f64], assignment: &[u8; 256]) -> f64 {
    (0..256)
        .filter(|&v| counts[v] > 0)
        .map(|v| {
            let d = v as f64 - centroids[assignment[v] as usize];
            counts[v] as f64 * d * d
        })
        .sum()
}

/// Value at sorted position `idx` of the multiset described by `counts`.
fn value_at_rank(counts: &[u64; 256], idx: u64) -> u8 {
    let mut seen = 0;
    for (v, &c) in counts.iter().enumerate() {
        seen += c;
        if idx < seen {
            return v as u8;
        }
    }
    255
}

fn initial_centroids(counts: &[u64; 256], k: usize) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    let quantile = |i: usize, total: u64| ((2 * i as u64 + 1) * total / (2 * k as u64)).min(total - 1);
    let mut init: Vec<u8> = (0..k).map(|i| value_at_rank(counts, quantile(i, n))).collect();
    if init.windows(2).any(|w| w[0] == w[1]) {
        // a dominant intensity swallowed several quantiles: fall back to
        // quantiles over the distinct values
        let distinct: Vec<u8> = (0..=255u8).filter(|&v| counts[v as usize] > 0).collect();
        init = (0..k)
            .map(|i| distinct[quantile(i, distinct.len() as u64) as usize])
            .collect();
    }
    init.into_iter().map(f64::from).collect()
}

/// Lloyd iterations from quantile seeds until assignments stop changing or
/// `max_iters` updates have run. Empty clusters keep their previous centre.
pub fn kmeans_1d(image: &Image, k: usize, max_iters: usize) -> Result<ClusterModel, KmeansError> {
    let clusters = kmeans_histogram(&Histogram::of(image), k, max_iters)?;
    let assignments = image
        .pixels()
        .iter()
        .map(|&p| clusters.bin_assignment[p as usize])
        .collect();
    Ok(ClusterModel {
        centroids: clusters.centroids,
        bin_assignment: clusters.bin_assignment,
        assignments,
        iterations: clusters.iterations,
        sse_history: clusters.sse_history,
    })
}

/// Clustering of a bare histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramClusters {
    pub centroids: Vec<f64>,
    pub bin_assignment: [u8; 256],
    pub iterations: usize,
    pub sse_history: Vec<f64>,
}

pub fn kmeans_histogram(
    hist: &Histogram,
    k: usize,
    max_iters: usize,
) -> Result<HistogramClusters, KmeansError> {
    if k < 2 || k > 256 {
        return Err(KmeansError::InvalidK(k));
    }
    let counts = hist.counts();
    let distinct = hist.occupied();
    if distinct < k {
        return Err(KmeansError::TooFewDistinctValues { k, distinct });
    }

    let mut centroids = initial_centroids(counts, k);
    let mut assignment = assign(counts, &centroids);
    let mut history = vec![sse(counts, &centroids, &assignment)];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut weight = vec![0u64; k];
        let mut sum = vec![0u64; k];
        for v in 0..256 {
            let c = assignment[v] as usize;
            weight[c] += counts[v];
            sum[c] += v as u64 * counts[v];
        }
        for i in 0..k {
            if weight[i] > 0 {
                centroids[i] = sum[i] as f64 / weight[i] as f64;
            }
        }
        history.push(sse(counts, &centroids, &assignment));
        let next = assign(counts, &centroids);
        if next == assignment {
            break;
        }
        assignment = next;
    }

    // Lloyd in one dimension keeps centroids ordered; sort defensively and
    // remap assignments if not.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        let mut rank = vec![0u8; k];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new as u8;
        }
        for a in assignment.iter_mut() {
            *a = rank[*a as usize];
        }
        centroids = order.iter().map(|&o| centroids[o]).collect();
    }
    Ok(HistogramClusters {
        centroids,
        bin_assignment: assignment,
        iterations,
        sse_history: history,
    })
}

/// Pixels belonging to the brightest cluster.
pub fn kmeans_segment(image: &Image, k: usize) -> Result<Mask, KmeansError> {
    let model = kmeans_1d(image, k, DEFAULT_MAX_ITERS)?;
    Ok(brightest_cluster(image, &model))
}

pub fn brightest_cluster(image: &Image, model: &ClusterModel) -> Mask {
    let top = (model.k() - 1) as u8;
    let bits = model.assignments.iter().map(|&a| u8::from(a == top)).collect();
    Mask::new(image.width(), image.height(), bits).expect("one assignment per pixel")
}

/// Image where each pixel is replaced by its rounded cluster centre.
pub fn quantize(image: &Image, model: &ClusterModel) -> Image {
    let levels: Vec<u8> = model
        .centroids
        .iter()
        .map(|c| c.round().clamp(0.0, 255.0) as u8)
        .collect();
    image.map(|p| levels[model.bin_assignment[p as usize] as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_levels_split_perfectly() {
        let img = Image::new(4, 1, vec![0, 255, 255, 0]).unwrap();
        let m = kmeans_1d(&img, 2, 50).unwrap();
        assert_eq!(m.centroids, vec![0.0, 255.0]);
        assert_eq!(m.assignments, vec![0, 1, 1, 0]);
        assert_eq!(kmeans_segment(&img, 2).unwrap().bits(), &[0, 1, 1, 0]);
    }

    #[test]
    fn four_values_two_clusters() {
        let img = Image::new(4, 1, vec![0, 10, 200, 210]).unwrap();
        let m = kmeans_1d(&img, 2, 50).unwrap();
        assert_eq!(m.centroids, vec![5.0, 205.0]);
        assert_eq!(m.sse(), 100.0);
    }

    #[test]
    fn too_few_values() {
        let img = Image::filled(3, 3, 90);
        assert_eq!(
            kmeans_segment(&img, 3),
            Err(KmeansError::TooFewDistinctValues { k: 3, distinct: 1 })
        );
        let img = Image::new(2, 1, vec![1, 2]).unwrap();
        assert!(matches!(
            kmeans_1d(&img, 3, 10),
            Err(KmeansError::TooFewDistinctValues { .. })
        ));
        assert_eq!(kmeans_1d(&img, 1, 10), Err(KmeansError::InvalidK(1)));
    }

    #[test]
    fn dominant_value_falls_back_to_distinct_quantiles() {
        let mut px = vec![40u8; 1000];
        px.extend([120; 100]);
        px.extend([230; 5]);
        let img = Image::new(px.len(), 1, px).unwrap();
        let m = kmeans_1d(&img, 3, 50).unwrap();
        assert_eq!(m.centroids, vec![40.0, 120.0, 230.0]);
        assert_eq!(kmeans_segment(&img, 3).unwrap().count(), 5);
    }

    #[test]
    fn nearest_prefers_lower_index_on_ties() {
        assert_eq!(nearest(5.0, &[0.0, 10.0]), 0);
        assert_eq!(nearest(6.0, &[0.0, 10.0]), 1);
    }
}
