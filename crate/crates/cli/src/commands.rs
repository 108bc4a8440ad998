use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use fillseg_core::bitplane::{decompose, recompose, PlaneSelection};
use fillseg_core::emit::{self, Format};
use fillseg_core::evaluate::{compare_methods, evaluate, summarize, EvalTable};
use fillseg_core::io::{load_image, load_mask, save_image, save_mask, write_atomic};
use fillseg_core::phantom::PhantomSpec;
use fillseg_core::pipeline::{run_method, PipelineConfig, PipelineRun, Report, Status};
use fillseg_core::{Image, MethodRegistry, SegmentationMethod};
use rayon::prelude::*;

use crate::{Command, RunArgs};

pub const EXIT_EMPTY: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

pub fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Segment { input, run } => segment(&input, &run),
        Command::Planes {
            input,
            out,
            keep_planes,
        } => planes(&input, &out, keep_planes),
        Command::Compare {
            inputs,
            config,
            format,
            per_image,
        } => compare(&inputs, &PipelineConfig::from(&config), format, per_image),
        Command::Evaluate {
            reports,
            ground_truth,
            format,
            gt_masks,
        } => evaluate_cmd(&reports, &ground_truth, format, gt_masks.as_deref()),
        Command::Batch { inputs, synth, run } => batch(inputs, synth, &run),
    }
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .with_context(|| format!("cannot derive an image id from {}", path.display()))
}

fn lookup_method(name: &str) -> Result<std::sync::Arc<dyn SegmentationMethod>> {
    let registry = MethodRegistry::builtin();
    registry.get(name).with_context(|| {
        format!(
            "unknown method {name:?}; available: {}",
            registry.names().join(", ")
        )
    })
}

fn print_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

/// Writes mask, report and optional stage dumps for one finished run.
fn write_outputs(id: &str, run: &mut PipelineRun, args: &RunArgs) -> Result<()> {
    let out = &args.out;
    if args.dump_stages {
        for stage in &run.stages {
            let name = format!("{id}.{}.png", stage.name);
            save_image(&stage.image, out.join(&name))?;
            if let Some(rec) = run.report.stages.iter_mut().find(|r| r.stage == stage.name) {
                rec.output = Some(name);
            }
        }
    }
    let mask_name = format!("{id}.mask.png");
    save_mask(&run.mask, out.join(&mask_name))?;
    if let Some(rec) = run.report.stages.iter_mut().find(|r| r.stage == "mask") {
        rec.output = Some(mask_name);
    }
    write_atomic(&out.join(format!("{id}.report.json")), &emit::to_json(&run.report))?;
    if args.format == Format::Csv {
        let csv = emit::regions_csv(std::slice::from_ref(&run.report));
        write_atomic(&out.join(format!("{id}.regions.csv")), csv.as_bytes())?;
    }
    Ok(())
}

fn segment(input: &Path, args: &RunArgs) -> Result<ExitCode> {
    let config = PipelineConfig::from(&args.config);
    let method = lookup_method(&args.method)?;
    let image = load_image(input)?;
    let id = stem(input)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut run = run_method(method.as_ref(), &id, &image, &config)?;
    write_outputs(&id, &mut run, args)?;
    if let Some(d) = &run.report.diagnostic {
        eprintln!("{id}: {d}");
    }
    print_stdout(format!("total_area_mm2={}\n", emit::num(run.report.total_area_mm2)).as_bytes())?;
    Ok(match run.report.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::EmptySegmentation => ExitCode::from(EXIT_EMPTY),
    })
}

fn planes(input: &Path, out: &Path, keep: PlaneSelection) -> Result<ExitCode> {
    let image = load_image(input)?;
    let id = stem(input)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let set = decompose(&image);
    for (k, plane) in set.iter() {
        save_mask(plane, out.join(format!("{id}.plane{k}.png")))?;
    }
    save_image(&recompose(&set, keep), out.join(format!("{id}.recomposed.png")))?;
    Ok(ExitCode::SUCCESS)
}

fn is_image_file(path: &Path) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("pgm" | "png"))
}

/// Files as given; directories expand to their PGM/PNG entries sorted by name.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("cannot read {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image_file(p))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn load_all(paths: &[PathBuf]) -> Vec<Result<(String, Image)>> {
    paths
        .par_iter()
        .map(|p| Ok((stem(p)?, load_image(p)?)))
        .collect()
}

fn compare(inputs: &[PathBuf], config: &PipelineConfig, format: Format, per_image: bool) -> Result<ExitCode> {
    config.validate()?;
    let registry = MethodRegistry::builtin();
    let files = expand_inputs(inputs)?;
    let mut records = Vec::with_capacity(files.len());
    for loaded in load_all(&files) {
        let (id, image) = loaded?;
        records.push((id, image));
    }
    let records: Vec<_> = records
        .par_iter()
        .map(|(id, image)| compare_methods(&registry, id, image, config))
        .collect::<Result<_, _>>()?;
    let summary = summarize(&records);
    let bytes = match (format, per_image) {
        (Format::Csv, false) => emit::summary_csv(&summary).into_bytes(),
        (Format::Csv, true) => emit::comparison_csv(&records).into_bytes(),
        (Format::Json, _) => emit::to_json(&serde_json::json!({
            "images": records,
            "summary": summary,
        })),
    };
    print_stdout(&bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn read_ground_truth(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read ground truth {}", path.display()))?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize::<(String, f64)>() {
        let (id, area) = row.with_context(|| format!("malformed row in {}", path.display()))?;
        out.insert(id, area);
    }
    Ok(out)
}

fn read_reports(dir: &Path) -> Result<Vec<Report>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read reports directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_str().is_some_and(|s| s.ends_with(".report.json")))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_slice(&bytes).with_context(|| format!("malformed report {}", p.display()))
        })
        .collect()
}

fn find_mask(dir: &Path, id: &str) -> Result<PathBuf> {
    [format!("{id}.mask.png"), format!("{id}.png"), format!("{id}.pgm")]
        .into_iter()
        .map(|n| dir.join(n))
        .find(|p| p.is_file())
        .with_context(|| format!("no ground-truth mask for {id:?} in {}", dir.display()))
}

fn evaluate_cmd(reports_dir: &Path, gt: &Path, format: Format, gt_masks: Option<&Path>) -> Result<ExitCode> {
    let manual = read_ground_truth(gt)?;
    let reports = read_reports(reports_dir)?;
    let mut table: EvalTable = evaluate(&reports, &manual)?;
    if let Some(mask_dir) = gt_masks {
        let mut rows = std::mem::take(&mut table.rows);
        for row in &mut rows {
            let predicted = load_mask(reports_dir.join(format!("{}.mask.png", row.image)))?;
            let truth = load_mask(find_mask(mask_dir, &row.image)?)?;
            if (truth.width(), truth.height()) != (predicted.width(), predicted.height()) {
                bail!("ground-truth mask for {:?} has different dimensions", row.image);
            }
            row.dice = Some(predicted.dice(&truth));
        }
        table = EvalTable::from_rows(rows);
    }
    let bytes = match format {
        Format::Csv => emit::eval_csv(&table).into_bytes(),
        Format::Json => emit::to_json(&table),
    };
    print_stdout(&bytes)?;
    Ok(ExitCode::SUCCESS)
}

/// Writes `n` reproducible phantoms and their analytic areas into `out`.
fn synthesize(n: usize, out: &Path, pixel_area_mm2: f64) -> Result<Vec<PathBuf>> {
    let mut gt = String::from("image,manual_mm2\n");
    let mut paths = Vec::with_capacity(n);
    for i in 0..n {
        let phantom = PhantomSpec::series(i).generate();
        let id = format!("phantom_{i:03}");
        let path = out.join(format!("{id}.pgm"));
        save_image(&phantom.image, &path)?;
        save_mask(&phantom.truth, out.join(format!("{id}.truth.png")))?;
        gt.push_str(&format!("{id},{}\n", emit::num(phantom.area_mm2(pixel_area_mm2))));
        paths.push(path);
    }
    write_atomic(&out.join("ground_truth.csv"), gt.as_bytes())?;
    Ok(paths)
}

fn batch(inputs: Vec<PathBuf>, synth: Option<usize>, args: &RunArgs) -> Result<ExitCode> {
    let config = PipelineConfig::from(&args.config);
    config.validate()?;
    let method = lookup_method(&args.method)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;

    let mut files = expand_inputs(&inputs)?;
    if let Some(n) = synth {
        files.extend(synthesize(n, &args.out, config.pixel_area_mm2)?);
    }
    if files.is_empty() {
        bail!("no input images given");
    }
    let mut seen = BTreeMap::new();
    for f in &files {
        if let Some(prev) = seen.insert(stem(f)?, f.clone()) {
            bail!("{} and {} share the output name {:?}", prev.display(), f.display(), stem(f)?);
        }
    }

    let results: Vec<Result<Report>> = files
        .par_iter()
        .map(|path| {
            let id = stem(path)?;
            let image = load_image(path)?;
            let mut run = run_method(method.as_ref(), &id, &image, &config)?;
            write_outputs(&id, &mut run, args)?;
            Ok(run.report)
        })
        .collect();

    let mut table = String::from("image,status,regions,total_area_mm2\n");
    let mut failed = false;
    for (path, result) in files.iter().zip(results) {
        match result {
            Ok(r) => {
                let status = match r.status {
                    Status::Ok => "ok",
                    Status::EmptySegmentation => "EmptySegmentation",
                };
                table.push_str(&format!(
                    "{},{},{},{}\n",
                    r.source,
                    status,
                    r.regions.len(),
                    emit::num(r.total_area_mm2)
                ));
            }
            Err(e) => {
                failed = true;
                eprintln!("{}: {e:#}", path.display());
            }
        }
    }
    print_stdout(table.as_bytes())?;
    Ok(if failed {
        ExitCode::from(EXIT_INPUT)
    } else {
        ExitCode::SUCCESS
    })
}
