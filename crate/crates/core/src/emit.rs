//! JSON and CSV renderings of reports and tables.
//!
//! JSON keys follow struct declaration order and measured quantities carry
//! at most six decimals, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::evaluate::{ComparisonRecord, EvalRow, EvalTable, MethodSummary};
use crate::pipeline::{round6, Report};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

pub const EVAL_HEADER: &str = "image,predicted_mm2,manual_mm2,error_mm2";
pub const SUMMARY_HEADER: &str = "method,algorithm,mean_area_mm2,images";
pub const REGION_HEADER: &str =
    "source,label,area_px,area_mm2,min_row,min_col,max_row,max_col,centroid_row,centroid_col";

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types always serialise");
    out.push(b'\n');
    out
}

/// Number formatted with at most six decimals.
pub fn num(x: f64) -> String {
    format!("{}", round6(x))
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn eval_line(out: &mut String, row: &EvalRow, with_dice: bool) {
    write!(
        out,
        "{},{},{},{}",
        row.image,
        num(row.predicted_mm2),
        num(row.manual_mm2),
        num(row.error_mm2)
    )
    .unwrap();
    if with_dice {
        write!(out, ",{}", opt_num(row.dice)).unwrap();
    }
    out.push('\n');
}

/// Per-image rows then the `mean` row. A `dice` column is appended only when
/// mask overlaps were computed.
pub fn eval_csv(table: &EvalTable) -> String {
    let with_dice = table.has_dice();
    let mut out = String::from(EVAL_HEADER);
    if with_dice {
        out.push_str(",dice");
    }
    out.push('\n');
    for row in table.rows.iter().chain(table.mean.as_ref()) {
        eval_line(&mut out, row, with_dice);
    }
    out
}

pub fn summary_csv(summary: &[MethodSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in summary {
        writeln!(
            out,
            "{},{},{},{}",
            s.method,
            s.algorithm,
            opt_num(s.mean_area_mm2),
            s.images
        )
        .unwrap();
    }
    out
}

/// One row per method per image.
pub fn comparison_csv(records: &[ComparisonRecord]) -> String {
    let mut out = String::from("image,method,algorithm,status,total_area_mm2,regions\n");
    for rec in records {
        for m in &rec.methods {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                rec.source,
                m.method,
                m.algorithm,
                m.status,
                opt_num(m.total_area_mm2),
                m.region_count
            )
            .unwrap();
        }
    }
    out
}

pub fn regions_csv(reports: &[Report]) -> String {
    let mut out = format!("{REGION_HEADER}\n");
    for rep in reports {
        for r in &rep.regions {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                rep.source,
                r.label,
                r.area_px,
                num(r.area_mm2),
                r.bbox.min_row,
                r.bbox.min_col,
                r.bbox.max_row,
                r.bbox.max_col,
                num(r.centroid.0),
                num(r.centroid.1)
            )
            .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::EvalRow;

    #[test]
    fn eval_csv_layout() {
        let t = EvalTable::from_rows(vec![EvalRow::new("a", 2.4304, 1.96)]);
        assert_eq!(
            eval_csv(&t),
            "image,predicted_mm2,manual_mm2,error_mm2\na,2.4304,1.96,0.4704\nmean,2.4304,1.96,0.4704\n"
        );
        assert_eq!(eval_csv(&EvalTable::default()), format!("{EVAL_HEADER}\n"));
    }

    #[test]
    fn numbers_are_rounded() {
        assert_eq!(num(1.0 / 3.0), "0.333333");
        assert_eq!(num(31.0 * 0.0784), "2.4304");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse(), Ok(Format::Csv));
        assert!("xml".parse::<Format>().is_err());
    }
}
