//! Command-line entry points.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 when a valid
//! run fails.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::counterfactual::{pdsi_sweep, sweep, sweep_csv, Scenario};
use crate::error::{Error, Result};
use crate::eval::{confusion, cross_validate, metrics, render_table, train_test_split};
use crate::features::{assemble_dynamic, assemble_static, AssemblyConfig, DynamicSample, FeatureTable, TableSidecar, Task};
use crate::geojson;
use crate::grid::{CellId, GridSpec};
use crate::ingest::generate_synthetic_region;
use crate::models::{TrainSpec, TrainedModel, Variant};
use crate::region::{self, RegionData};
use crate::seed;
use crate::service::{self, SessionState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const RISK_GEOJSON: &str = "risk.geojson";
pub const SUMMARY_JSON: &str = "summary.json";
pub const RUN_JSON: &str = "run.json";

#[derive(Debug, Parser)]
#[command(name = "wildrisk", version, about = "Grid-based wildfire risk assessment")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cell size in degrees when gridding a land mask.
    #[arg(long, global = true)]
    pub grid_cell_size: Option<f64>,
    /// Acres at or above which a fire marks its cell-year positive.
    #[arg(long, global = true)]
    pub fire_threshold: Option<f64>,
    /// Number of cross-validation folds.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// SMOTE neighbours; 0 disables balancing.
    #[arg(long, global = true)]
    pub smote_k: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fail on the first malformed input row.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Region directory.
    #[arg(long)]
    pub region: Option<PathBuf>,
    /// Pre-assembled feature table (the region still supplies the grid).
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub year: Option<i32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a region directory and write it in canonical form.
    Ingest {
        #[arg(long)]
        region: Option<PathBuf>,
    },
    /// Per-cell three-class feature table.
    AssembleStatic {
        #[arg(long)]
        region: Option<PathBuf>,
    },
    /// Per-cell-year binary feature table.
    AssembleDynamic {
        #[arg(long)]
        region: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        years: Vec<i32>,
        #[arg(long)]
        lag_years: Option<i32>,
    },
    /// Fit one model on a whole feature table.
    Train {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        model: Option<Variant>,
    },
    /// Cross-validate (or hold out a test fraction) and report metrics.
    Evaluate {
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, conflicts_with = "all")]
        model: Option<Variant>,
        /// Evaluate every model variant.
        #[arg(long)]
        all: bool,
        /// Single train/test split with this test fraction instead of k folds.
        #[arg(long)]
        holdout: Option<f64>,
    },
    /// Per-cell predictions and a GeoJSON risk map.
    Predict {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
    },
    /// Apply a saved model to another region without retraining.
    Transfer {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        region: Option<PathBuf>,
        #[arg(long)]
        year: Option<i32>,
    },
    /// Scenario sweep against a frozen model.
    Counterfactual {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        /// `kind` or `kind=parameter`; repeatable. Defaults to the PDSI sweep.
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
    },
    /// Generate a synthetic region with planted effects.
    Synth {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        first_year: Option<i32>,
        #[arg(long)]
        last_year: Option<i32>,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::AssembleStatic { .. } => "assemble-static",
            Command::AssembleDynamic { .. } => "assemble-dynamic",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Predict { .. } => "predict",
            Command::Transfer { .. } => "transfer",
            Command::Counterfactual { .. } => "counterfactual",
            Command::Synth { .. } => "synth",
            Command::Serve { .. } => "serve",
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_FAILED
            }
        }
    }
}

/// Config file overlaid by flags.
pub fn resolve_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(&existing(p)?)?,
        None => RunConfig::default(),
    };
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.grid_cell_size.is_some() {
        cfg.grid_cell_size = g.grid_cell_size;
    }
    if let Some(t) = g.fire_threshold {
        cfg.assembly.fire_threshold = t;
    }
    if let Some(k) = g.k {
        cfg.cv.k = k;
    }
    match g.smote_k {
        Some(0) => cfg.smote_k = None,
        Some(k) => cfg.smote_k = Some(k),
        None => {}
    }
    if g.out.is_some() {
        cfg.paths.out = g.out.clone();
    }
    cfg.strict |= g.strict;
    cfg.validate()?;
    Ok(cfg)
}

fn existing(p: &Path) -> Result<PathBuf> {
    if p.exists() {
        Ok(p.to_path_buf())
    } else {
        Err(Error::Config(format!("{} does not exist", p.display())))
    }
}

fn pick(flag: &Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match flag.as_ref().or(configured.as_ref()) {
        Some(p) => existing(p),
        None => Err(Error::Config(format!("missing --{what}"))),
    }
}

fn out_path(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.paths.out.clone().ok_or_else(|| Error::Config("missing --out".into()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

/// `<path>.json` next to a CSV artifact.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_table(path: &Path) -> Result<FeatureTable> {
    FeatureTable::read_csv(fs::File::open(path).map_err(|e| Error::io(path, e))?)
}

fn load_model(path: &Path) -> Result<TrainedModel> {
    TrainedModel::from_json(&read_text(path)?)
}

fn load_region(cfg: &RunConfig, dir: &Path) -> Result<RegionData> {
    let data = region::load_region_dir(dir, cfg.grid_cell_size, cfg.strict)?;
    for d in &data.diagnostics {
        eprintln!("warning: {}:{}: {}", d.file, d.line, d.message);
    }
    Ok(data)
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli.global)?;
    let name = cli.command.name();
    match cli.command {
        Command::Ingest { region } => ingest(&cfg, &pick(&region, &cfg.paths.region, "region")?),
        Command::AssembleStatic { region } => {
            let dir = pick(&region, &cfg.paths.region, "region")?;
            cfg.paths.region = Some(dir.clone());
            assemble(&cfg, name, &dir, Task::Static)
        }
        Command::AssembleDynamic { region, years, lag_years } => {
            let dir = pick(&region, &cfg.paths.region, "region")?;
            cfg.paths.region = Some(dir.clone());
            if !years.is_empty() {
                cfg.years = Some(years);
            }
            if let Some(l) = lag_years {
                cfg.assembly.lag_years = l;
            }
            assemble(&cfg, name, &dir, Task::Dynamic)
        }
        Command::Train { table, model } => {
            let table = pick(&table, &cfg.paths.table, "table")?;
            cfg.paths.table = Some(table.clone());
            if let Some(v) = model {
                cfg.model = v;
            }
            train(&cfg, name, &table)
        }
        Command::Evaluate { table, model, all, holdout } => {
            let table = pick(&table, &cfg.paths.table, "table")?;
            cfg.paths.table = Some(table.clone());
            if let Some(v) = model {
                cfg.model = v;
            }
            let variants = if all { Variant::ALL.to_vec() } else { vec![cfg.model] };
            evaluate(&cfg, name, &table, &variants, holdout)
        }
        Command::Predict { model, source } => {
            let model = pick(&model, &cfg.paths.model, "model")?;
            cfg.paths.model = Some(model.clone());
            predict(&cfg, name, &model, &source, false)
        }
        Command::Transfer { model, region, year } => {
            let model = pick(&model, &cfg.paths.model, "model")?;
            cfg.paths.model = Some(model.clone());
            predict(&cfg, name, &model, &Source { region, table: None, year }, true)
        }
        Command::Counterfactual { model, source, scenarios } => {
            let model = pick(&model, &cfg.paths.model, "model")?;
            cfg.paths.model = Some(model.clone());
            counterfactual(&cfg, name, &model, &source, &scenarios)
        }
        Command::Synth { rows, cols, first_year, last_year } => {
            let s = &mut cfg.synth;
            s.n_rows = rows.unwrap_or(s.n_rows);
            s.n_cols = cols.unwrap_or(s.n_cols);
            s.first_year = first_year.unwrap_or(s.first_year);
            s.last_year = last_year.unwrap_or(s.last_year);
            synth(&mut cfg, name)
        }
        Command::Serve { model, source, addr } => {
            let model = pick(&model, &cfg.paths.model, "model")?;
            cfg.paths.model = Some(model.clone());
            serve(&cfg, &model, &source, addr)
        }
    }
}

/// Provenance without the output destination, so reruns into different
/// directories produce identical artifacts.
fn echo(cfg: &RunConfig, command: &str) -> Value {
    let mut c = cfg.clone();
    c.paths.out = None;
    c.echo(command)
}

fn ingest(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let data = load_region(cfg, dir)?;
    let report = json!({
        "run": echo(cfg, "ingest"),
        "cells": data.grid.cell_count(),
        "incidents": data.incidents.len(),
        "predictor_samples": data.samples.len(),
        "county_records": data.counties.len(),
        "diagnostics": data.diagnostics,
    });
    println!(
        "{}: {} cells, {} incidents, {} predictor samples, {} county records, {} diagnostic(s)",
        dir.display(),
        data.grid.cell_count(),
        data.incidents.len(),
        data.samples.len(),
        data.counties.len(),
        data.diagnostics.len()
    );
    if let Some(out) = &cfg.paths.out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        region::write_incidents(&out.join(region::INCIDENTS), &data.incidents)?;
        region::write_samples(&out.join(region::PREDICTORS), &data.samples)?;
        region::write_county_pdsi(&out.join(region::COUNTY_PDSI), &data.counties)?;
        write_json(&out.join(region::COUNTIES), &region::counties_geojson(&data.counties))?;
        write_file(&out.join(region::GRID), data.grid.to_json()?.as_bytes())?;
        write_json(&out.join("ingest_report.json"), &report)?;
    }
    Ok(())
}

fn assemble(cfg: &RunConfig, command: &str, dir: &Path, task: Task) -> Result<()> {
    let out = out_path(cfg)?;
    let data = load_region(cfg, dir)?;
    let (table, meta, years) = match task {
        Task::Static => {
            let (rows, meta) = assemble_static(&data.inputs())?;
            (FeatureTable::Static(rows), meta, Vec::new())
        }
        Task::Dynamic => {
            let years = cfg.years.clone().unwrap_or_else(|| data.pdsi_years());
            let (rows, meta) = assemble_dynamic(&data.inputs(), &years, &cfg.assembly)?;
            (FeatureTable::Dynamic(rows), meta, years)
        }
    };
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write_file(&out, &csv)?;
    let (x, _) = table.xy();
    let sidecar = TableSidecar {
        task,
        rows: table.len(),
        fire_threshold: cfg.assembly.fire_threshold,
        lag_years: cfg.assembly.lag_years,
        years,
        standardization: crate::features::Standardization::fit(&x).ok(),
        meta,
        run: echo(cfg, command),
    };
    write_json(&sidecar_path(&out), &serde_json::to_value(&sidecar)?)?;
    println!("{}: {} rows ({:?})", out.display(), table.len(), task);
    Ok(())
}

fn read_sidecar(table: &Path) -> Option<TableSidecar> {
    let text = fs::read_to_string(sidecar_path(table)).ok()?;
    serde_json::from_str(&text).ok()
}

fn train_spec(cfg: &RunConfig, variant: Variant, task: Task, seed: u64) -> TrainSpec {
    TrainSpec {
        variant,
        task,
        config: cfg.hyperparameters.clone(),
        smote: if task == Task::Dynamic { cfg.smote_k } else { None },
        seed,
    }
}

fn train(cfg: &RunConfig, command: &str, table_path: &Path) -> Result<()> {
    let seed = cfg.require_seed()?;
    let out = out_path(cfg)?;
    let table = read_table(table_path)?;
    let (x, y) = table.xy();
    let spec = train_spec(cfg, cfg.model, table.task(), seed);
    let mut model = TrainedModel::fit(&x, &y, &spec)?;
    if table.task() == Task::Dynamic {
        let threshold = read_sidecar(table_path).map(|s| s.fire_threshold).unwrap_or(cfg.assembly.fire_threshold);
        model.fire_threshold = Some(threshold);
    }
    model.metadata = json!({ "run": echo(cfg, command), "training_rows": x.len() });
    model.rehash();
    write_file(&out, model.to_json()?.as_bytes())?;
    println!("{}: {} model, hash {}", out.display(), model.variant(), model.content_hash);
    Ok(())
}

fn evaluate(cfg: &RunConfig, command: &str, table_path: &Path, variants: &[Variant], holdout: Option<f64>) -> Result<()> {
    let seed = cfg.require_seed()?;
    let table = read_table(table_path)?;
    let (x, y) = table.xy();
    let task = table.task();
    let report = match holdout {
        None => {
            let reports = variants
                .iter()
                .map(|&v| cross_validate(&x, &y, &train_spec(cfg, v, task, seed), &cfg.cv))
                .collect::<Result<Vec<_>>>()?;
            print!("{}", render_table(&reports));
            for r in &reports {
                if r.failed_folds() > 0 {
                    eprintln!("warning: {} had {} failed fold(s)", r.variant, r.failed_folds());
                }
            }
            json!({ "run": echo(cfg, command), "mode": "kfold", "reports": reports })
        }
        Some(frac) => {
            let (train_idx, test_idx) = train_test_split(y.len(), frac, seed::derive(seed, "split"))?;
            let labels = task.class_names();
            let pick_rows = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
                (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
            };
            let (tx, ty) = pick_rows(&train_idx);
            let (vx, vy) = pick_rows(&test_idx);
            let mut results = Vec::new();
            for &v in variants {
                let model = TrainedModel::fit(&tx, &ty, &train_spec(cfg, v, task, seed))?;
                let cm = confusion(&model.predict_all(&vx)?, &vy, &labels)?;
                let m = metrics(&cm)?;
                println!(
                    "{}: accuracy {:.4}, macro F1 {:.4}, confusion {:?}",
                    v.display_name(),
                    m.accuracy,
                    m.macro_f1,
                    cm.counts
                );
                results.push(json!({ "variant": v, "confusion": cm, "metrics": m }));
            }
            json!({
                "run": echo(cfg, command),
                "mode": "holdout",
                "test_fraction": frac,
                "train_size": train_idx.len(),
                "test_size": test_idx.len(),
                "results": results,
            })
        }
    };
    if let Some(out) = &cfg.paths.out {
        write_json(out, &report)?;
    }
    Ok(())
}

/// Feature rows for one prediction run plus the grid they live on.
enum Rows {
    Static(Vec<crate::features::StaticSample>),
    Dynamic(i32, Vec<DynamicSample>),
}

impl Rows {
    fn cells_and_features(&self) -> (Vec<CellId>, Vec<[f64; 6]>) {
        match self {
            Rows::Static(r) => (r.iter().map(|s| s.cell).collect(), r.iter().map(|s| s.features.to_array()).collect()),
            Rows::Dynamic(_, r) => (r.iter().map(|s| s.cell).collect(), r.iter().map(|s| s.features.to_array()).collect()),
        }
    }

    fn year(&self) -> Option<i32> {
        match self {
            Rows::Static(_) => None,
            Rows::Dynamic(y, _) => Some(*y),
        }
    }
}

fn latest_year(rows: &[DynamicSample]) -> Result<i32> {
    rows.iter().map(|r| r.year).max().ok_or_else(|| Error::Config("feature table has no rows".into()))
}

fn assembly_for(cfg: &RunConfig, model: &TrainedModel) -> AssemblyConfig {
    AssemblyConfig { fire_threshold: model.fire_threshold.unwrap_or(cfg.assembly.fire_threshold), ..cfg.assembly }
}

/// Dynamic rows from a table or an assembled region; `year = None` keeps all
/// years of a table, or all PDSI years of a region.
fn dynamic_rows(cfg: &RunConfig, model: &TrainedModel, src: &Source, year: Option<i32>) -> Result<Vec<DynamicSample>> {
    let table = src.table.as_ref().or(cfg.paths.table.as_ref());
    let mut rows = if let Some(t) = table {
        match read_table(&existing(t)?)? {
            FeatureTable::Dynamic(rows) => rows,
            FeatureTable::Static(_) => return Err(Error::Config("expected a dynamic feature table".into())),
        }
    } else {
        let dir = pick(&src.region, &cfg.paths.region, "region")?;
        let data = load_region(cfg, &dir)?;
        let years = match year {
            Some(y) => vec![y],
            None => cfg.years.clone().unwrap_or_else(|| data.pdsi_years()),
        };
        assemble_dynamic(&data.inputs(), &years, &assembly_for(cfg, model))?.0
    };
    if let Some(y) = year {
        rows.retain(|r| r.year == y);
        if rows.is_empty() {
            return Err(Error::Config(format!("no feature rows for year {y}")));
        }
    }
    Ok(rows)
}

fn prediction_rows(cfg: &RunConfig, model: &TrainedModel, src: &Source) -> Result<Rows> {
    match model.task {
        Task::Static => {
            if let Some(t) = src.table.as_ref().or(cfg.paths.table.as_ref()) {
                return match read_table(&existing(t)?)? {
                    FeatureTable::Static(rows) => Ok(Rows::Static(rows)),
                    FeatureTable::Dynamic(_) => Err(Error::Config("expected a static feature table".into())),
                };
            }
            let dir = pick(&src.region, &cfg.paths.region, "region")?;
            Ok(Rows::Static(assemble_static(&load_region(cfg, &dir)?.inputs())?.0))
        }
        Task::Dynamic => {
            let year = match src.year {
                Some(y) => y,
                None => latest_year(&dynamic_rows(cfg, model, src, None)?)?,
            };
            Ok(Rows::Dynamic(year, dynamic_rows(cfg, model, src, Some(year))?))
        }
    }
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn predict(cfg: &RunConfig, command: &str, model_path: &Path, src: &Source, transfer: bool) -> Result<()> {
    let out = out_path(cfg)?;
    let digest_before = file_digest(model_path)?;
    let model = load_model(model_path)?;
    let region_dir = pick(&src.region, &cfg.paths.region, "region")?;
    let grid: GridSpec = region::load_grid(&region_dir, cfg.grid_cell_size)?;
    let rows = prediction_rows(cfg, &model, src)?;
    let (cells, features) = rows.cells_and_features();
    let preds = model.predict_all(&features)?;
    let labels = &model.class_labels;
    let run = echo(cfg, command);

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["cell_row", "cell_col", "year", "risk"])?;
    let year_field = rows.year().map(|y| y.to_string()).unwrap_or_default();
    for (c, &p) in cells.iter().zip(&preds) {
        csv.write_record([c.row.to_string(), c.col.to_string(), year_field.clone(), labels[p].clone()])?;
    }
    let csv = csv.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    write_file(&out.join(PREDICTIONS_CSV), &csv)?;

    let by_cell: HashMap<CellId, usize> = cells.iter().copied().zip(preds.iter().copied()).collect();
    let mut map = geojson::cell_collection(&grid, &cells, |c| {
        let mut p = serde_json::Map::new();
        p.insert("risk".into(), json!(labels[by_cell[&c]]));
        p
    })?;
    map["run"] = run.clone();
    map["model_hash"] = json!(model.content_hash);
    write_json(&out.join(RISK_GEOJSON), &map)?;

    let class_counts: serde_json::Map<String, Value> =
        labels.iter().enumerate().map(|(k, l)| (l.clone(), json!(preds.iter().filter(|&&p| p == k).count()))).collect();
    // for the binary task, "count" is the number of at-risk cells; for the
    // three-class task it counts high-risk cells
    let positive = labels.len() - 1;
    let count = preds.iter().filter(|&&p| p == positive).count();
    let mut summary = json!({
        "run": run,
        "model_hash": model.content_hash,
        "variant": model.variant(),
        "task": model.task,
        "year": rows.year(),
        "cells": cells.len(),
        "count": count,
        "class_counts": class_counts,
    });
    if transfer {
        let digest_after = file_digest(model_path)?;
        if digest_after != digest_before {
            return Err(Error::contract("model file changed during transfer"));
        }
        summary["transfer"] = json!({ "training_steps": 0, "model_file_sha256": digest_after });
    }
    write_json(&out.join(SUMMARY_JSON), &summary)?;
    match rows.year() {
        Some(y) => println!("{y}: {count} of {} cells at risk", cells.len()),
        None => println!("{count} of {} cells high risk", cells.len()),
    }
    Ok(())
}

fn parse_scenario(text: &str) -> Result<Scenario> {
    let (kind, param) = match text.split_once('=') {
        Some((k, p)) => {
            let v = p.trim().parse::<f64>().map_err(|_| Error::InvalidScenario(format!("bad parameter in {text:?}")))?;
            (k.trim(), Some(v))
        }
        None => (text.trim(), None),
    };
    Scenario::from_parts(kind, param)
}

fn counterfactual(cfg: &RunConfig, command: &str, model_path: &Path, src: &Source, specs: &[String]) -> Result<()> {
    let model = load_model(model_path)?;
    if model.task != Task::Dynamic {
        return Err(Error::Config("counterfactuals need a dynamic-task model".into()));
    }
    let scenarios = if specs.is_empty() { pdsi_sweep() } else { specs.iter().map(|s| parse_scenario(s)).collect::<Result<_>>()? };
    let year = match src.year {
        Some(y) => y,
        None => latest_year(&dynamic_rows(cfg, &model, src, None)?)?,
    };
    let rows = dynamic_rows(cfg, &model, src, Some(year))?;
    let results = sweep(&model, &rows, &scenarios)?;
    let csv = sweep_csv(&results);
    match &cfg.paths.out {
        Some(out) => {
            write_file(out, csv.as_bytes())?;
            write_json(
                &sidecar_path(out),
                &json!({ "run": echo(cfg, command), "model_hash": model.content_hash, "year": year, "results": results }),
            )?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn synth(cfg: &mut RunConfig, command: &str) -> Result<()> {
    cfg.synth.seed = cfg.require_seed()?;
    let out = out_path(cfg)?;
    let region = generate_synthetic_region(&cfg.synth)?;
    let files = region::write_synthetic_region(&out, &region)?;
    write_json(&out.join(RUN_JSON), &echo(cfg, command))?;
    let positives = region.truth.iter().filter(|t| t.label).count();
    println!(
        "{}: {} cells x {} years, {} positive cell-years, {} files",
        out.display(),
        region.grid.cell_count(),
        cfg.synth.years().len(),
        positives,
        files.len() + 1
    );
    Ok(())
}

/// Loads the model and rows the service will answer from.
pub fn session_state(cfg: &RunConfig, model_path: &Path, src: &Source) -> Result<SessionState> {
    let model = load_model(model_path)?;
    let region_dir = pick(&src.region, &cfg.paths.region, "region")?;
    let grid = region::load_grid(&region_dir, cfg.grid_cell_size)?;
    let rows = dynamic_rows(cfg, &model, src, src.year)?;
    SessionState::new(model, grid, rows)
}

fn serve(cfg: &RunConfig, model_path: &Path, src: &Source, addr: SocketAddr) -> Result<()> {
    let state = Arc::new(session_state(cfg, model_path, src)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<tokio runtime>", e))?;
    runtime.block_on(service::serve(state, addr, |local| {
        println!("listening on http://{local}");
        let _ = std::io::stdout().flush();
    }))
}
