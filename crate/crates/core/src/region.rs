//! On-disk region directories.
//!
//! A region directory holds `incidents.csv`, `predictors.csv`,
//! `county_pdsi.csv`, `counties.geojson` and either `grid.json` or
//! `mask.geojson`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::features::RegionInputs;
use crate::geojson;
use crate::grid::{build_grid, BBox, GridSpec};
use crate::ingest::{
    load_county_pdsi, load_incidents, load_predictor_samples, CountyPdsiRecord, Diagnostic, FireIncident, LoadOptions,
    PredictorSample, SyntheticRegion,
};

pub const INCIDENTS: &str = "incidents.csv";
pub const PREDICTORS: &str = "predictors.csv";
pub const COUNTY_PDSI: &str = "county_pdsi.csv";
pub const COUNTIES: &str = "counties.geojson";
pub const GRID: &str = "grid.json";
pub const MASK: &str = "mask.geojson";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const SYNTH_CONFIG: &str = "synth_config.json";

pub const DEFAULT_CELL_SIZE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDiagnostic {
    pub file: String,
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RegionData {
    pub grid: GridSpec,
    pub incidents: Vec<FireIncident>,
    pub samples: Vec<PredictorSample>,
    pub counties: Vec<CountyPdsiRecord>,
    pub diagnostics: Vec<FileDiagnostic>,
}

impl RegionData {
    pub fn inputs(&self) -> RegionInputs<'_> {
        RegionInputs { grid: &self.grid, incidents: &self.incidents, samples: &self.samples, counties: &self.counties }
    }

    /// Years with county PDSI records, ascending.
    pub fn pdsi_years(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.counties.iter().map(|c| c.year).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn tag(file: &str, ds: Vec<Diagnostic>) -> impl Iterator<Item = FileDiagnostic> + '_ {
    ds.into_iter().map(move |d| FileDiagnostic { file: file.to_string(), line: d.line, message: d.message })
}

/// Reads `grid.json`, or builds the grid from `mask.geojson` with a bounding
/// box snapped outward to whole cells.
pub fn load_grid(dir: &Path, cell_size: Option<f64>) -> Result<GridSpec> {
    let grid_path = dir.join(GRID);
    let mask_path = dir.join(MASK);
    // an explicit cell size re-grids the mask when one is available
    if grid_path.exists() && (cell_size.is_none() || !mask_path.exists()) {
        return GridSpec::from_json(&read(&grid_path)?);
    }
    if !mask_path.exists() {
        return Err(Error::InvalidRegion(format!("{} has neither {GRID} nor {MASK}", dir.display())));
    }
    let cs = cell_size.unwrap_or(DEFAULT_CELL_SIZE);
    let mask = geojson::parse_region(&read(&mask_path)?)?;
    let (lat_lo, lat_hi, lon_lo, lon_hi) =
        mask.envelope().ok_or_else(|| Error::InvalidRegion("empty mask".into()))?;
    let snap_down = |v: f64| (v / cs + 1e-9).floor() * cs;
    let snap_up = |v: f64| (v / cs - 1e-9).ceil() * cs;
    let bbox = BBox::new(snap_down(lat_lo), snap_up(lat_hi), snap_down(lon_lo), snap_up(lon_hi))?;
    build_grid(bbox, cs, &mask)
}

/// Loads every file of a region. With `strict`, the first malformed row of
/// any file is fatal; otherwise rows are skipped and listed.
pub fn load_region_dir(dir: &Path, cell_size: Option<f64>, strict: bool) -> Result<RegionData> {
    if !dir.is_dir() {
        return Err(Error::InvalidRegion(format!("{} is not a directory", dir.display())));
    }
    let opts = LoadOptions { strict };
    let grid = load_grid(dir, cell_size)?;
    let inc = load_incidents(open(&dir.join(INCIDENTS))?, opts)?;
    let pred = load_predictor_samples(open(&dir.join(PREDICTORS))?, None, opts)?;
    let shapes = read(&dir.join(COUNTIES))?;
    let cty = load_county_pdsi(open(&dir.join(COUNTY_PDSI))?, &shapes, opts)?;
    let mut diagnostics: Vec<FileDiagnostic> = tag(INCIDENTS, inc.diagnostics).collect();
    diagnostics.extend(tag(PREDICTORS, pred.diagnostics));
    diagnostics.extend(tag(COUNTY_PDSI, cty.diagnostics));
    Ok(RegionData { grid, incidents: inc.records, samples: pred.records, counties: cty.records, diagnostics })
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    Ok(std::io::BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_incidents(path: &Path, incidents: &[FireIncident]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "year", "lat", "lon", "burned_area_acres"])?;
    for i in incidents {
        w.write_record([i.id.clone(), i.year.to_string(), i.location.lat.to_string(), i.location.lon.to_string(), i.burned_area.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_samples(path: &Path, samples: &[PredictorSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["predictor", "year", "lat", "lon", "value"])?;
    for s in samples {
        w.write_record([
            s.predictor.name().to_string(),
            s.year.map(|y| y.to_string()).unwrap_or_default(),
            s.location.lat.to_string(),
            s.location.lon.to_string(),
            s.value.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_county_pdsi(path: &Path, records: &[CountyPdsiRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["county_id", "year", "pdsi"])?;
    for r in records {
        w.write_record([r.county_id.clone(), r.year.to_string(), r.pdsi.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Unique county shapes in first-appearance order.
pub fn counties_geojson(records: &[CountyPdsiRecord]) -> serde_json::Value {
    let mut seen = std::collections::HashSet::new();
    let features: Vec<serde_json::Value> = records
        .iter()
        .filter(|r| seen.insert(r.county_id.clone()))
        .map(|r| {
            json!({
                "type": "Feature",
                "properties": { "county_id": r.county_id },
                "geometry": geojson::region_geometry(&r.shape),
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Writes a synthetic region in the standard layout plus its ground truth.
pub fn write_synthetic_region(dir: &Path, region: &SyntheticRegion) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = |name: &str| dir.join(name);
    write_incidents(&p(INCIDENTS), &region.incidents)?;
    write_samples(&p(PREDICTORS), &region.samples)?;
    write_county_pdsi(&p(COUNTY_PDSI), &region.county_pdsi)?;
    let counties: Vec<serde_json::Value> = region
        .counties
        .iter()
        .map(|(id, shape)| {
            json!({ "type": "Feature", "properties": { "county_id": id }, "geometry": geojson::region_geometry(shape) })
        })
        .collect();
    write_text(&p(COUNTIES), &serde_json::to_string(&json!({ "type": "FeatureCollection", "features": counties }))?)?;
    write_text(&p(GRID), &region.grid.to_json()?)?;
    write_text(
        &p(MASK),
        &serde_json::to_string(&json!({ "type": "Feature", "properties": {}, "geometry": geojson::region_geometry(&region.mask) }))?,
    )?;
    let mut w = csv::Writer::from_writer(create(&p(GROUND_TRUTH))?);
    w.write_record(["cell_row", "cell_col", "year", "probability", "label"])?;
    for t in &region.truth {
        w.write_record([
            t.cell.row.to_string(),
            t.cell.col.to_string(),
            t.year.to_string(),
            t.probability.to_string(),
            u8::from(t.label).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(p(GROUND_TRUTH), e))?;
    let mut cfg = create(&p(SYNTH_CONFIG))?;
    serde_json::to_writer_pretty(&mut cfg, &region.config)?;
    cfg.flush().map_err(|e| Error::io(p(SYNTH_CONFIG), e))?;
    Ok([INCIDENTS, PREDICTORS, COUNTY_PDSI, COUNTIES, GRID, MASK, GROUND_TRUTH, SYNTH_CONFIG].iter().map(|n| p(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{assemble_dynamic, AssemblyConfig};
    use crate::ingest::{generate_synthetic_region, SyntheticRegionConfig};

    #[test]
    fn synthetic_round_trip_recovers_truth() {
        let cfg = SyntheticRegionConfig { n_rows: 8, n_cols: 8, first_year: 2013, last_year: 2014, ..Default::default() };
        let region = generate_synthetic_region(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_synthetic_region(dir.path(), &region).unwrap();
        let data = load_region_dir(dir.path(), None, true).unwrap();
        assert!(data.diagnostics.is_empty());
        assert_eq!(data.grid, region.grid);
        assert_eq!(data.incidents, region.incidents);
        let (rows, meta) = assemble_dynamic(&data.inputs(), &cfg.years(), &AssemblyConfig::default()).unwrap();
        assert!(meta.imputed.is_empty());
        assert_eq!(rows.len(), region.truth.len());
        for (r, t) in rows.iter().zip(&region.truth) {
            assert_eq!((r.cell, r.year), (t.cell, t.year));
            assert_eq!(r.features.to_array(), t.features);
            assert_eq!(r.label == 1, t.label);
        }
    }

    #[test]
    fn mask_only_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MASK),
            r#"{"type":"Polygon","coordinates":[[[-120.0,36.0],[-119.5,36.0],[-119.5,36.3],[-120.0,36.3],[-120.0,36.0]]]}"#,
        )
        .unwrap();
        let g = load_grid(dir.path(), None).unwrap();
        assert_eq!((g.n_rows(), g.n_cols(), g.cell_count()), (3, 5, 15));
        let g = load_grid(dir.path(), Some(0.05)).unwrap();
        assert_eq!(g.cell_count(), 60);
        assert!(load_region_dir(&dir.path().join("missing"), None, true).is_err());
    }
}
