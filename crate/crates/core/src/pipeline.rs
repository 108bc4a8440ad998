//! End-to-end segmentation: method → labelling → speckle filter → areas.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::baselines::DEFAULT_K;
use crate::bitplane::PlaneSelection;
use crate::image::{Image, Mask};
use crate::method::{BitPlaneMethod, MethodError, SegmentationMethod, StageImage};
use crate::morphology::MAX_DISK_RADIUS;
use crate::regions::{
    filter_small, label_components, region_stats, total_area_mm2, Connectivity, LabelMap, Region,
    DEFAULT_PIXEL_AREA_MM2,
};

pub use crate::threshold::ThresholdMode;

pub const DEFAULT_SE_RADIUS: usize = 12;
pub const DEFAULT_MIN_REGION_PX: u64 = 5;

/// Rounds to 6 decimal places.
pub fn round6(x: f64) -> f64 {
    // `+ 0.0` folds -0.0 (e.g. an empty f64 sum) into 0.0
    (x * 1e6).round() / 1e6 + 0.0
}

pub(crate) fn serialize_rounded<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round6(*x))
}

pub(crate) fn serialize_rounded_pair<S: Serializer>(
    pair: &(f64, f64),
    s: S,
) -> Result<S::Ok, S::Error> {
    (round6(pair.0), round6(pair.1)).serialize(s)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Method(#[from] MethodError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub se_radius: usize,
    pub keep_planes: PlaneSelection,
    pub threshold_mode: ThresholdMode,
    pub connectivity: Connectivity,
    pub min_region_px: u64,
    pub pixel_area_mm2: f64,
    /// Cluster count for the k-means baseline.
    pub kmeans_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            se_radius: DEFAULT_SE_RADIUS,
            keep_planes: PlaneSelection::MSB_PAIR,
            threshold_mode: ThresholdMode::Auto,
            connectivity: Connectivity::Eight,
            min_region_px: DEFAULT_MIN_REGION_PX,
            pixel_area_mm2: DEFAULT_PIXEL_AREA_MM2,
            kmeans_k: DEFAULT_K,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.pixel_area_mm2.is_finite() && self.pixel_area_mm2 > 0.0) {
            return Err(PipelineError::InvalidConfig(format!(
                "pixel_area_mm2 must be positive, got {}",
                self.pixel_area_mm2
            )));
        }
        if self.se_radius > MAX_DISK_RADIUS {
            return Err(PipelineError::InvalidConfig(format!(
                "se_radius must be at most {MAX_DISK_RADIUS}, got {}",
                self.se_radius
            )));
        }
        if self.kmeans_k < 2 {
            return Err(PipelineError::InvalidConfig(format!(
                "kmeans_k must be at least 2, got {}",
                self.kmeans_k
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "ok")]
    Ok,
    EmptySegmentation,
}

/// Provenance of one pipeline stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Non-zero pixels in the stage output.
    pub nonzero_px: u64,
    /// File the stage output was written to, when dumped.
    pub output: Option<String>,
}

/// Everything needed to reproduce and audit one segmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub source: String,
    pub method: String,
    pub config: PipelineConfig,
    pub status: Status,
    pub threshold_used: Option<u8>,
    pub stages: Vec<StageRecord>,
    pub regions: Vec<Region>,
    #[serde(serialize_with = "serialize_rounded")]
    pub total_area_mm2: f64,
    pub diagnostic: Option<String>,
}

impl Report {
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }
}

/// A report together with the rasters behind it.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub report: Report,
    /// Final mask after speckle filtering.
    pub mask: Mask,
    pub labels: LabelMap,
    pub stages: Vec<StageImage>,
}

/// Runs the bit-plane method.
pub fn run_pipeline(
    source: &str,
    image: &Image,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    run_method(&BitPlaneMethod, source, image, config)
}

/// Runs `method`, then labels, filters and measures its foreground.
pub fn run_method(
    method: &dyn SegmentationMethod,
    source: &str,
    image: &Image,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    config.validate()?;
    let seg = method.segment(image, config)?;

    let raw = label_components(&seg.mask, config.connectivity);
    let labels = filter_small(&raw, config.min_region_px);
    let regions = region_stats(&labels, config.pixel_area_mm2);
    let mask = labels.to_mask();

    let mut stages: Vec<StageRecord> = seg
        .stages
        .iter()
        .map(|s| StageRecord {
            stage: s.name.to_string(),
            nonzero_px: s.image.count_nonzero() as u64,
            output: None,
        })
        .collect();
    stages.push(StageRecord {
        stage: "threshold".into(),
        nonzero_px: seg.mask.count() as u64,
        output: None,
    });
    stages.push(StageRecord {
        stage: "mask".into(),
        nonzero_px: mask.count() as u64,
        output: None,
    });

    let diagnostic = seg.diagnostic.or_else(|| {
        regions.is_empty().then(|| {
            format!(
                "EmptySegmentation: no region of at least {} px survived",
                config.min_region_px
            )
        })
    });
    let status = if regions.is_empty() {
        Status::EmptySegmentation
    } else {
        Status::Ok
    };
    let report = Report {
        source: source.to_string(),
        method: method.name().to_string(),
        config: config.clone(),
        status,
        threshold_used: seg.threshold_used,
        stages,
        total_area_mm2: total_area_mm2(&regions),
        regions,
        diagnostic,
    };
    Ok(PipelineRun {
        report,
        mask,
        labels,
        stages: seg.stages,
    })
}
