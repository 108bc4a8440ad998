//! Segmentation of radiopaque dental fillings in panoramic (OPG) radiographs.
//!
//! The default method chains a white top-hat transform, bit-plane slicing that
//! keeps the two most significant planes, a global threshold and
//! connected-component labelling, then reports per-region areas in mm².
//! A histogram k-means baseline is registered alongside it so the two can be
//! compared on the same inputs.

pub mod baselines;
pub mod bitplane;
pub mod emit;
pub mod evaluate;
pub mod image;
pub mod io;
pub mod method;
pub mod morphology;
pub mod phantom;
pub mod pipeline;
pub mod regions;
pub mod threshold;

pub use crate::image::{Image, Mask};
pub use crate::method::{MethodRegistry, SegmentationMethod};
pub use crate::pipeline::{run_pipeline, PipelineConfig, Report, ThresholdMode};
