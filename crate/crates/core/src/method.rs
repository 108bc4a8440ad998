//! Segmentation methods behind a common trait, registered by name.
//!
//! The CLI selects a method with `--method <name>` and the comparison
//! harness runs every registered method in registration order.

use std::sync::Arc;

use thiserror::Error;

use crate::baselines::{self, KmeansError};
use crate::bitplane::select_planes;
use crate::image::{Image, Mask};
use crate::morphology::{white_tophat, MorphologyError, StructuringElement};
use crate::pipeline::PipelineConfig;
use crate::threshold::binarize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MethodError {
    #[error(transparent)]
    Kmeans(#[from] KmeansError),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
}

impl MethodError {
    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            MethodError::Kmeans(KmeansError::TooFewDistinctValues { .. }) => "TooFewDistinctValues",
            MethodError::Kmeans(KmeansError::InvalidK(_)) => "InvalidK",
            MethodError::Morphology(MorphologyError::RadiusTooLarge(_)) => "RadiusTooLarge",
            MethodError::Morphology(MorphologyError::InvalidElement(_)) => "InvalidElement",
        }
    }
}

/// Intermediate raster produced by a method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageImage {
    pub name: &'static str,
    pub image: Image,
}

/// Foreground mask plus whatever the method wants to record about how it
/// got there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segmentation {
    pub mask: Mask,
    pub threshold_used: Option<u8>,
    pub stages: Vec<StageImage>,
    /// Set when the method could not find any foreground to separate.
    pub diagnostic: Option<String>,
}

pub trait SegmentationMethod: Send + Sync {
    /// Registry key, e.g. `bitplane`.
    fn name(&self) -> &'static str;

    /// Human-readable algorithm name used in comparison tables.
    fn algorithm(&self) -> &'static str;

    fn segment(&self, image: &Image, config: &PipelineConfig) -> Result<Segmentation, MethodError>;
}

/// White top-hat, plane selection, then a global threshold.
#[derive(Clone, Copy, Debug, Default)]
pub struct BitPlaneMethod;

impl SegmentationMethod for BitPlaneMethod {
    fn name(&self) -> &'static str {
        "bitplane"
    }

    fn algorithm(&self) -> &'static str {
        "Bit-Plane Algorithm"
    }

    fn segment(&self, image: &Image, config: &PipelineConfig) -> Result<Segmentation, MethodError> {
        let se = StructuringElement::disk(config.se_radius)?;
        let tophat = white_tophat(image, &se);
        let planes = select_planes(&tophat, config.keep_planes);
        let (mask, threshold_used, diagnostic) = match config.threshold_mode.resolve(&planes) {
            Ok(t) => (binarize(&planes, t), Some(t), None),
            Err(e) => (
                Mask::empty(image.width(), image.height()),
                None,
                Some(format!("EmptySegmentation: {e} after plane selection")),
            ),
        };
        Ok(Segmentation {
            mask,
            threshold_used,
            stages: vec![
                StageImage {
                    name: "tophat",
                    image: tophat,
                },
                StageImage {
                    name: "bitplane",
                    image: planes,
                },
            ],
            diagnostic,
        })
    }
}

/// Brightest cluster of a histogram k-means on raw intensities.
#[derive(Clone, Copy, Debug, Default)]
pub struct KmeansMethod;

impl SegmentationMethod for KmeansMethod {
    fn name(&self) -> &'static str {
        "kmeans"
    }

    fn algorithm(&self) -> &'static str {
        "K_means Algorithm"
    }

    fn segment(&self, image: &Image, config: &PipelineConfig) -> Result<Segmentation, MethodError> {
        let model = baselines::kmeans_1d(image, config.kmeans_k, baselines::DEFAULT_MAX_ITERS)?;
        let mask = baselines::brightest_cluster(image, &model);
        Ok(Segmentation {
            mask,
            threshold_used: None,
            stages: vec![StageImage {
                name: "clusters",
                image: baselines::quantize(image, &model),
            }],
            diagnostic: None,
        })
    }
}

/// Ordered name → method table.
#[derive(Clone, Default)]
pub struct MethodRegistry {
    methods: Vec<Arc<dyn SegmentationMethod>>,
}

impl MethodRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `bitplane` then `kmeans`.
    pub fn builtin() -> Self {
        let mut registry = Self::new();
        registry.register(Arc::new(BitPlaneMethod));
        registry.register(Arc::new(KmeansMethod));
        registry
    }

    /// Adds a method, replacing any existing one with the same name in place.
    pub fn register(&mut self, method: Arc<dyn SegmentationMethod>) {
        match self.methods.iter_mut().find(|m| m.name() == method.name()) {
            Some(slot) => *slot = method,
            None => self.methods.push(method),
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn SegmentationMethod>> {
        self.methods.iter().find(|m| m.name() == name).cloned()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn SegmentationMethod>> {
        self.methods.iter()
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }
}

impl std::fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Everything;

    impl SegmentationMethod for Everything {
        fn name(&self) -> &'static str {
            "kmeans"
        }
        fn algorithm(&self) -> &'static str {
            "everything"
        }
        fn segment(&self, image: &Image, _: &PipelineConfig) -> Result<Segmentation, MethodError> {
            Ok(Segmentation {
                mask: Mask::from_image(image, |_| true),
                threshold_used: None,
                stages: Vec::new(),
                diagnostic: None,
            })
        }
    }

    #[test]
    fn builtin_order_and_lookup() {
        let r = MethodRegistry::builtin();
        assert_eq!(r.names(), vec!["bitplane", "kmeans"]);
        assert_eq!(r.get("kmeans").unwrap().algorithm(), "K_means Algorithm");
        assert!(r.get("watershed").is_none());
    }

    #[test]
    fn register_replaces_by_name() {
        let mut r = MethodRegistry::builtin();
        r.register(Arc::new(Everything));
        assert_eq!(r.len(), 2);
        assert_eq!(r.get("kmeans").unwrap().algorithm(), "everything");
    }

    #[test]
    fn bitplane_on_constant_image_is_empty_with_diagnostic() {
        let seg = BitPlaneMethod
            .segment(&Image::filled(8, 8, 77), &PipelineConfig::default())
            .unwrap();
        assert_eq!(seg.mask.count(), 0);
        assert!(seg.diagnostic.unwrap().starts_with("EmptySegmentation"));
        assert_eq!(seg.threshold_used, None);
    }

    #[test]
    fn kmeans_on_constant_image_fails() {
        let err = KmeansMethod
            .segment(&Image::filled(8, 8, 77), &PipelineConfig::default())
            .unwrap_err();
        assert_eq!(err.kind(), "TooFewDistinctValues");
    }
}
