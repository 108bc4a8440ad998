//! Ground-truth evaluation and cross-method comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::Image;
use crate::method::MethodRegistry;
use crate::pipeline::{run_method, serialize_rounded, PipelineConfig, PipelineError, Report, Status};
use crate::regions::area_error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("MissingGroundTruth: no manual area for image {0:?}")]
    MissingGroundTruth(String),
}

/// Predicted versus manually measured area for one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub image: String,
    #[serde(serialize_with = "serialize_rounded")]
    pub predicted_mm2: f64,
    #[serde(serialize_with = "serialize_rounded")]
    pub manual_mm2: f64,
    #[serde(serialize_with = "serialize_rounded")]
    pub error_mm2: f64,
    /// Pixel overlap with a ground-truth mask, when one was supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dice: Option<f64>,
}

impl EvalRow {
    pub fn new(image: impl Into<String>, predicted_mm2: f64, manual_mm2: f64) -> Self {
        Self {
            image: image.into(),
            predicted_mm2,
            manual_mm2,
            error_mm2: area_error(predicted_mm2, manual_mm2),
            dice: None,
        }
    }
}

/// Per-image rows followed by a column-mean row when non-empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub rows: Vec<EvalRow>,
    pub mean: Option<EvalRow>,
}

impl EvalTable {
    pub fn from_rows(rows: Vec<EvalRow>) -> Self {
        let mean = (!rows.is_empty()).then(|| {
            let n = rows.len() as f64;
            let avg = |f: fn(&EvalRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
            let dice = rows
                .iter()
                .map(|r| r.dice)
                .collect::<Option<Vec<f64>>>()
                .map(|d| d.iter().sum::<f64>() / n);
            EvalRow {
                image: "mean".into(),
                predicted_mm2: avg(|r| r.predicted_mm2),
                manual_mm2: avg(|r| r.manual_mm2),
                error_mm2: avg(|r| r.error_mm2),
                dice,
            }
        });
        Self { rows, mean }
    }

    pub fn has_dice(&self) -> bool {
        self.rows.iter().any(|r| r.dice.is_some())
    }
}

/// Pairs `(image id, predicted mm²)` with manual areas.
pub fn evaluate_areas<'a>(
    predicted: impl IntoIterator<Item = (&'a str, f64)>,
    manual_areas: &BTreeMap<String, f64>,
) -> Result<EvalTable, EvalError> {
    let rows = predicted
        .into_iter()
        .map(|(id, area)| {
            manual_areas
                .get(id)
                .map(|&manual| EvalRow::new(id, area, manual))
                .ok_or_else(|| EvalError::MissingGroundTruth(id.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalTable::from_rows(rows))
}

/// Table-1 style evaluation of pipeline reports.
pub fn evaluate(reports: &[Report], manual_areas: &BTreeMap<String, f64>) -> Result<EvalTable, EvalError> {
    evaluate_areas(
        reports.iter().map(|r| (r.source.as_str(), r.total_area_mm2)),
        manual_areas,
    )
}

/// One method's outcome on one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub algorithm: String,
    /// `ok`, `EmptySegmentation`, or the error kind.
    pub status: String,
    pub total_area_mm2: Option<f64>,
    pub region_count: usize,
    pub detail: Option<String>,
}

impl MethodOutcome {
    /// Whether the method produced a measurement (possibly zero).
    pub fn measured(&self) -> bool {
        self.total_area_mm2.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub source: String,
    pub methods: Vec<MethodOutcome>,
}

/// Runs every registered method on the same image. A failing method is
/// recorded in its row and does not stop the others.
pub fn compare_methods(
    registry: &MethodRegistry,
    source: &str,
    image: &Image,
    config: &PipelineConfig,
) -> Result<ComparisonRecord, PipelineError> {
    config.validate()?;
    let methods = registry
        .iter()
        .map(|m| match run_method(m.as_ref(), source, image, config) {
            Ok(run) => MethodOutcome {
                method: m.name().into(),
                algorithm: m.algorithm().into(),
                status: match run.report.status {
                    Status::Ok => "ok".into(),
                    Status::EmptySegmentation => "EmptySegmentation".into(),
                },
                total_area_mm2: Some(run.report.total_area_mm2),
                region_count: run.report.regions.len(),
                detail: run.report.diagnostic,
            },
            Err(e) => {
                let kind = match &e {
                    PipelineError::Method(me) => me.kind(),
                    PipelineError::InvalidConfig(_) => "InvalidConfig",
                };
                MethodOutcome {
                    method: m.name().into(),
                    algorithm: m.algorithm().into(),
                    status: kind.into(),
                    total_area_mm2: None,
                    region_count: 0,
                    detail: Some(e.to_string()),
                }
            }
        })
        .collect();
    Ok(ComparisonRecord {
        source: source.into(),
        methods,
    })
}

/// Table-2 style row: one method's mean area over a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub algorithm: String,
    /// Mean over images where the method produced a measurement.
    pub mean_area_mm2: Option<f64>,
    pub images: usize,
}

/// Per-method means, in the order methods first appear.
pub fn summarize(records: &[ComparisonRecord]) -> Vec<MethodSummary> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut areas: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in records {
        for o in &rec.methods {
            if !order.iter().any(|(m, _)| m == &o.method) {
                order.push((o.method.clone(), o.algorithm.clone()));
            }
            let entry = areas.entry(o.method.clone()).or_default();
            if let Some(a) = o.total_area_mm2 {
                entry.push(a);
            }
        }
    }
    order
        .into_iter()
        .map(|(method, algorithm)| {
            let values = &areas[&method];
            MethodSummary {
                mean_area_mm2: (!values.is_empty())
                    .then(|| values.iter().sum::<f64>() / values.len() as f64),
                images: values.len(),
                method,
                algorithm,
            }
        })
        .collect()
}
