//! Per-cell and per-cell-year feature tables, labels and standardization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{overlap_fraction, CellId, GridSpec};
use crate::ingest::{align_years, coverage_of, Coverage, CountyPdsiRecord, FireIncident, Predictor, PredictorSample, YearSource};

pub const N_FEATURES: usize = 6;
pub const LOW_RISK_MAX: f64 = 10.0;
pub const HIGH_RISK_MIN: f64 = 5000.0;
pub const DEFAULT_FIRE_THRESHOLD: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub population_density: f64,
    pub ndvi: f64,
    pub pdsi: f64,
    pub tree_mortality_area: f64,
    pub tree_mortality_number: f64,
    pub altitude: f64,
}

impl FeatureVector {
    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        Self {
            population_density: a[0],
            ndvi: a[1],
            pdsi: a[2],
            tree_mortality_area: a[3],
            tree_mortality_number: a[4],
            altitude: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.population_density,
            self.ndvi,
            self.pdsi,
            self.tree_mortality_area,
            self.tree_mortality_number,
            self.altitude,
        ]
    }

    pub fn get(&self, p: Predictor) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Static risk class, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLevel {
    Low,
    Medium,
    High,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Medium, RiskLevel::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Medium => "medium",
            RiskLevel::High => "high",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" | "0" => Ok(RiskLevel::Low),
            "medium" | "1" => Ok(RiskLevel::Medium),
            "high" | "2" => Ok(RiskLevel::High),
            other => Err(Error::Format(format!("unknown risk level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Three-class cumulative risk per cell.
    Static,
    /// Binary large-fire indicator per cell-year.
    Dynamic,
}

impl Task {
    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::Static => RiskLevel::ALL.iter().map(|r| r.name().to_string()).collect(),
            Task::Dynamic => vec!["0".into(), "1".into()],
        }
    }
}

/// Low below 10 acres, Medium in [10, 5000), High from 5000.
pub fn label_static(cumulative_burned: f64) -> Result<RiskLevel> {
    if cumulative_burned.is_nan() || cumulative_burned < 0.0 {
        return Err(Error::contract(format!("cumulative burned area {cumulative_burned} is negative")));
    }
    Ok(if cumulative_burned < LOW_RISK_MAX {
        RiskLevel::Low
    } else if cumulative_burned < HIGH_RISK_MIN {
        RiskLevel::Medium
    } else {
        RiskLevel::High
    })
}

/// 1 when any incident of the cell-year reaches `threshold` acres.
pub fn label_dynamic<'a>(incidents: impl IntoIterator<Item = &'a FireIncident>, threshold: f64) -> u8 {
    u8::from(incidents.into_iter().any(|i| i.burned_area >= threshold))
}

/// Aggregates one predictor within one cell(-year): mean for densities, NDVI
/// and altitude, sum for mortality. Empty input yields `Some(0.0)` for
/// mortality and `None` (to be imputed) otherwise.
pub fn aggregate_cell(samples: &[&PredictorSample], predictor: Predictor) -> Result<Option<f64>> {
    if let Some(s) = samples.iter().find(|s| s.predictor != predictor) {
        return Err(Error::contract(format!("expected {predictor} samples, found {}", s.predictor)));
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    Ok(reduce(predictor, &values))
}

fn reduce(predictor: Predictor, values: &[f64]) -> Option<f64> {
    let sum: f64 = values.iter().sum();
    if predictor.is_additive() {
        Some(sum)
    } else if values.is_empty() {
        None
    } else {
        Some(sum / values.len() as f64)
    }
}

fn weighted_pdsi(weights: &[(f64, f64)]) -> Option<f64> {
    let total: f64 = weights.iter().map(|(f, _)| f).sum();
    if total <= 0.0 {
        return None;
    }
    // dividing by the covered fraction renormalizes coastal cells
    Some(weights.iter().map(|(f, p)| f * p).sum::<f64>() / total)
}

/// Area-weighted PDSI of one cell from one year's county records.
pub fn disaggregate_pdsi(grid: &GridSpec, cell: CellId, counties: &[CountyPdsiRecord]) -> Result<f64> {
    let mut weights = Vec::new();
    for c in counties {
        let f = overlap_fraction(grid, cell, &c.shape)?;
        if f > 0.0 {
            weights.push((f, c.pdsi));
        }
    }
    weighted_pdsi(&weights).ok_or_else(|| Error::NoCoverage(vec![(cell.row, cell.col)]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSample {
    pub cell: CellId,
    pub features: FeatureVector,
    pub label: RiskLevel,
    pub cumulative_burned: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicSample {
    pub cell: CellId,
    pub year: i32,
    pub features: FeatureVector,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssemblyConfig {
    /// Acres; an incident at or above this marks its cell-year positive.
    pub fire_threshold: f64,
    /// Use predictor values from `year - lag_years` for a dynamic row.
    pub lag_years: i32,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self { fire_threshold: DEFAULT_FIRE_THRESHOLD, lag_years: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImputedEntry {
    pub cell_row: usize,
    pub cell_col: usize,
    pub year: Option<i32>,
    pub feature: Predictor,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssemblyMeta {
    pub imputed: Vec<ImputedEntry>,
    pub incidents_outside: usize,
}

/// Canonical records for one region.
#[derive(Debug, Clone, Copy)]
pub struct RegionInputs<'a> {
    pub grid: &'a GridSpec,
    pub incidents: &'a [FireIncident],
    pub samples: &'a [PredictorSample],
    pub counties: &'a [CountyPdsiRecord],
}

/// Samples bucketed by predictor, year and cell; altitude is pooled under
/// `None`.
struct Layers<'a> {
    grid: &'a GridSpec,
    buckets: HashMap<(Predictor, Option<i32>), Vec<Vec<f64>>>,
    /// Per cell: (county position, overlap fraction) for overlapping counties.
    county_weights: Vec<Vec<(usize, f64)>>,
    pdsi_by_year: BTreeMap<i32, Vec<Option<f64>>>,
}

impl<'a> Layers<'a> {
    fn new(inputs: &RegionInputs<'a>) -> Result<Self> {
        let grid = inputs.grid;
        let n = grid.cell_count();
        let mut buckets: HashMap<(Predictor, Option<i32>), Vec<Vec<f64>>> = HashMap::new();
        for s in inputs.samples {
            let Some(pos) = grid.locate(s.location).and_then(|c| grid.index_of(c)) else {
                continue;
            };
            let year = if s.predictor == Predictor::Altitude { None } else { s.year };
            buckets.entry((s.predictor, year)).or_insert_with(|| vec![Vec::new(); n])[pos].push(s.value);
        }

        let mut shapes = Vec::new();
        let mut pdsi_by_year: BTreeMap<i32, Vec<Option<f64>>> = BTreeMap::new();
        let mut position: HashMap<&str, usize> = HashMap::new();
        for rec in inputs.counties {
            let k = *position.entry(rec.county_id.as_str()).or_insert_with(|| {
                shapes.push(rec.shape.clone());
                shapes.len() - 1
            });
            let slots = pdsi_by_year.entry(rec.year).or_default();
            if slots.len() <= k {
                slots.resize(k + 1, None);
            }
            slots[k] = Some(rec.pdsi);
        }
        let county_weights = grid
            .cells()
            .iter()
            .map(|&c| {
                let mut w = Vec::new();
                for (k, shape) in shapes.iter().enumerate() {
                    let f = overlap_fraction(grid, c, shape)?;
                    if f > 0.0 {
                        w.push((k, f));
                    }
                }
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        if !inputs.counties.is_empty() {
            let uncovered: Vec<(usize, usize)> = grid
                .cells()
                .iter()
                .zip(&county_weights)
                .filter(|(_, w)| w.is_empty())
                .map(|(c, _)| (c.row, c.col))
                .collect();
            if !uncovered.is_empty() {
                return Err(Error::NoCoverage(uncovered));
            }
        }
        Ok(Self { grid, buckets, county_weights, pdsi_by_year })
    }

    /// Per-cell values of one predictor in one year; `None` where the cell
    /// has no data.
    fn raw(&self, p: Predictor, year: Option<i32>) -> Result<Vec<Option<f64>>> {
        let n = self.grid.cell_count();
        if p == Predictor::Pdsi {
            let y = year.ok_or_else(|| Error::contract("PDSI has no static layer"))?;
            let slots = self
                .pdsi_by_year
                .get(&y)
                .ok_or_else(|| Error::MissingYear { predictor: p.to_string(), year: y })?;
            return Ok(self
                .county_weights
                .iter()
                .map(|w| {
                    let pairs: Vec<(f64, f64)> = w
                        .iter()
                        .filter_map(|&(k, f)| slots.get(k).copied().flatten().map(|v| (f, v)))
                        .collect();
                    weighted_pdsi(&pairs)
                })
                .collect());
        }
        match self.buckets.get(&(p, year)) {
            Some(cells) => Ok(cells.iter().map(|v| reduce(p, v)).collect()),
            None if p.is_additive() => Ok(vec![Some(0.0); n]),
            None => Ok(vec![None; n]),
        }
    }

    fn has_layer(&self, p: Predictor, year: Option<i32>) -> bool {
        match (p, year) {
            (Predictor::Pdsi, Some(y)) => self.pdsi_by_year.contains_key(&y),
            _ => self.buckets.contains_key(&(p, year)),
        }
    }
}

/// Fills missing cells with the region mean and records what was imputed.
fn impute(
    p: Predictor,
    year_label: Option<i32>,
    values: Vec<Option<f64>>,
    grid: &GridSpec,
    meta: &mut AssemblyMeta,
) -> Result<Vec<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.len() == values.len() {
        return Ok(present);
    }
    if present.is_empty() {
        return Err(Error::MissingYear { predictor: p.to_string(), year: year_label.unwrap_or_default() });
    }
    let fill = if p.is_additive() { 0.0 } else { present.iter().sum::<f64>() / present.len() as f64 };
    Ok(values
        .into_iter()
        .zip(grid.cells())
        .map(|(v, c)| {
            v.unwrap_or_else(|| {
                if !p.is_additive() {
                    meta.imputed.push(ImputedEntry { cell_row: c.row, cell_col: c.col, year: year_label, feature: p });
                }
                fill
            })
        })
        .collect())
}

fn incidents_by_cell<'i>(grid: &GridSpec, incidents: &'i [FireIncident], meta: &mut AssemblyMeta) -> Vec<Vec<&'i FireIncident>> {
    let mut out = vec![Vec::new(); grid.cell_count()];
    for inc in incidents {
        match grid.locate(inc.location).and_then(|c| grid.index_of(c)) {
            Some(pos) => out[pos].push(inc),
            None => meta.incidents_outside += 1,
        }
    }
    out
}

/// One sample per masked cell, with features averaged over every covered year.
pub fn assemble_static(inputs: &RegionInputs<'_>) -> Result<(Vec<StaticSample>, AssemblyMeta)> {
    let grid = inputs.grid;
    let layers = Layers::new(inputs)?;
    let mut meta = AssemblyMeta::default();
    let coverage = coverage_of(inputs.samples, inputs.counties);
    let n = grid.cell_count();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(N_FEATURES);
    for p in Predictor::ALL {
        let years: Vec<Option<i32>> = match coverage.get(&p) {
            Some(Coverage::Static) => vec![None],
            Some(Coverage::Years(ys)) => ys.iter().map(|&y| Some(y)).collect(),
            None if p.is_additive() => vec![],
            None => return Err(Error::MissingYear { predictor: p.to_string(), year: 0 }),
        };
        let mut sums = vec![0.0; n];
        let mut counts = vec![0usize; n];
        for y in &years {
            for (i, v) in layers.raw(p, *y)?.into_iter().enumerate() {
                if let Some(v) = v {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
        }
        let values: Vec<Option<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &k)| match (k, p.is_additive()) {
                (0, true) => Some(0.0),
                (0, false) => None,
                _ => Some(s / k as f64),
            })
            .collect();
        columns.push(impute(p, None, values, grid, &mut meta)?);
    }

    let by_cell = incidents_by_cell(grid, inputs.incidents, &mut meta);
    let rows = grid
        .cells()
        .iter()
        .enumerate()
        .map(|(i, &cell)| {
            let cumulative_burned: f64 = by_cell[i].iter().map(|inc| inc.burned_area).sum();
            let features = FeatureVector::from_array(std::array::from_fn(|k| columns[k][i]));
            Ok(StaticSample { cell, features, label: label_static(cumulative_burned)?, cumulative_burned })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, meta))
}

/// One sample per (masked cell, year), in year-major then row-major cell order.
pub fn assemble_dynamic(
    inputs: &RegionInputs<'_>,
    years: &[i32],
    cfg: &AssemblyConfig,
) -> Result<(Vec<DynamicSample>, AssemblyMeta)> {
    if !(cfg.fire_threshold.is_finite() && cfg.fire_threshold >= 0.0) {
        return Err(Error::Config(format!("fire threshold {} must be non-negative", cfg.fire_threshold)));
    }
    let grid = inputs.grid;
    let layers = Layers::new(inputs)?;
    let mut meta = AssemblyMeta::default();
    let feature_years: Vec<i32> = years.iter().map(|y| y - cfg.lag_years).collect();
    let plan = align_years(&coverage_of(inputs.samples, inputs.counties), &feature_years);
    if let Some((p, y)) = plan.gaps().next() {
        return Err(Error::MissingYear { predictor: p.to_string(), year: y });
    }

    let by_cell = incidents_by_cell(grid, inputs.incidents, &mut meta);
    let mut rows = Vec::with_capacity(grid.cell_count() * years.len());
    for (&year, &fyear) in years.iter().zip(&feature_years) {
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(N_FEATURES);
        for p in Predictor::ALL {
            let layer_year = match plan.source(p, fyear) {
                YearSource::Static => None,
                YearSource::Exact(y) | YearSource::Nearest(y) => Some(y),
                YearSource::Gap => return Err(Error::MissingYear { predictor: p.to_string(), year: fyear }),
            };
            if !layers.has_layer(p, layer_year) && !p.is_additive() {
                return Err(Error::MissingYear { predictor: p.to_string(), year: fyear });
            }
            columns.push(impute(p, Some(year), layers.raw(p, layer_year)?, grid, &mut meta)?);
        }
        for (i, &cell) in grid.cells().iter().enumerate() {
            let label = label_dynamic(by_cell[i].iter().copied().filter(|inc| inc.year == year), cfg.fire_threshold);
            let features = FeatureVector::from_array(std::array::from_fn(|k| columns[k][i]));
            rows.push(DynamicSample { cell, year, features, label });
        }
    }
    Ok((rows, meta))
}

/// Z-score statistics fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub epsilon: f64,
}

pub const STD_EPSILON: f64 = 1e-9;

impl Standardization {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::contract(format!("standardization needs at least 2 rows, got {}", rows.len())));
        }
        let d = rows[0].as_ref().len();
        if rows.iter().any(|r| r.as_ref().len() != d) {
            return Err(Error::contract("rows have inconsistent widths"));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for k in 0..d {
            let first = rows[0].as_ref()[k];
            if rows.iter().all(|r| r.as_ref()[k] == first) {
                mean[k] = first;
                std[k] = STD_EPSILON;
                continue;
            }
            let m = rows.iter().map(|r| r.as_ref()[k]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.as_ref()[k] - m).powi(2)).sum::<f64>() / n;
            mean[k] = m;
            std[k] = var.sqrt().max(STD_EPSILON);
        }
        Ok(Self { mean, std, epsilon: STD_EPSILON })
    }

    /// Identity transform of width `d`.
    pub fn identity(d: usize) -> Self {
        Self { mean: vec![0.0; d], std: vec![1.0; d], epsilon: STD_EPSILON }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn apply_all<R: AsRef<[f64]>>(&self, rows: &[R]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r.as_ref())).collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| v * s + m).collect()
    }
}

pub fn fit_standardization<R: AsRef<[f64]>>(rows: &[R]) -> Result<Standardization> {
    Standardization::fit(rows)
}

pub fn apply_standardization<R: AsRef<[f64]>>(rows: &[R], s: &Standardization) -> Vec<Vec<f64>> {
    s.apply_all(rows)
}

/// A feature table of either task, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureTable {
    Static(Vec<StaticSample>),
    Dynamic(Vec<DynamicSample>),
}

const TABLE_HEADER: [&str; 10] =
    ["cell_row", "cell_col", "year", "pop_density", "ndvi", "pdsi", "tm_area", "tm_number", "altitude", "label"];

impl FeatureTable {
    pub fn task(&self) -> Task {
        match self {
            FeatureTable::Static(_) => Task::Static,
            FeatureTable::Dynamic(_) => Task::Dynamic,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureTable::Static(r) => r.len(),
            FeatureTable::Dynamic(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Raw feature rows and class indices.
    pub fn xy(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        match self {
            FeatureTable::Static(rows) => (
                rows.iter().map(|r| r.features.to_array().to_vec()).collect(),
                rows.iter().map(|r| r.label.index()).collect(),
            ),
            FeatureTable::Dynamic(rows) => (
                rows.iter().map(|r| r.features.to_array().to_vec()).collect(),
                rows.iter().map(|r| usize::from(r.label)).collect(),
            ),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TABLE_HEADER)?;
        let mut put = |cell: CellId, year: String, f: &FeatureVector, label: String| -> Result<()> {
            let mut rec = vec![cell.row.to_string(), cell.col.to_string(), year];
            rec.extend(f.to_array().iter().map(|v| v.to_string()));
            rec.push(label);
            w.write_record(&rec)?;
            Ok(())
        };
        match self {
            FeatureTable::Static(rows) => {
                for r in rows {
                    put(r.cell, String::new(), &r.features, r.label.to_string())?;
                }
            }
            FeatureTable::Dynamic(rows) => {
                for r in rows {
                    put(r.cell, r.year.to_string(), &r.features, r.label.to_string())?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<feature table>", e))?;
        Ok(())
    }

    /// Reads a table; rows with an empty year are static, otherwise dynamic.
    /// Static rows carry no cumulative area on disk (reported as NaN).
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(source);
        let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header != TABLE_HEADER {
            return Err(Error::Format(format!("feature table header must be {}", TABLE_HEADER.join(","))));
        }
        let mut stat = Vec::new();
        let mut dynm = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |what: &str| Error::Format(format!("feature table line {line}: invalid {what}"));
            let num = |k: usize| -> Result<f64> {
                rec.get(k).and_then(|s| s.trim().parse::<f64>().ok()).filter(|v| v.is_finite()).ok_or_else(|| bad(TABLE_HEADER[k]))
            };
            let idx = |k: usize| -> Result<usize> { rec.get(k).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad(TABLE_HEADER[k])) };
            let cell = CellId::new(idx(0)?, idx(1)?);
            let features = FeatureVector::from_array([num(3)?, num(4)?, num(5)?, num(6)?, num(7)?, num(8)?]);
            let label = rec.get(9).unwrap_or("").trim();
            match rec.get(2).unwrap_or("").trim() {
                "" => stat.push(StaticSample {
                    cell,
                    features,
                    label: label.parse().map_err(|_| bad("label"))?,
                    cumulative_burned: f64::NAN,
                }),
                y => dynm.push(DynamicSample {
                    cell,
                    year: y.parse().map_err(|_| bad("year"))?,
                    features,
                    label: match label {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(bad("label")),
                    },
                }),
            }
        }
        match (stat.is_empty(), dynm.is_empty()) {
            (false, true) => Ok(FeatureTable::Static(stat)),
            (true, _) => Ok(FeatureTable::Dynamic(dynm)),
            (false, false) => Err(Error::Format("feature table mixes static and dynamic rows".into())),
        }
    }
}

/// JSON sidecar written next to a feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSidecar {
    pub task: Task,
    pub rows: usize,
    pub fire_threshold: f64,
    pub lag_years: i32,
    pub years: Vec<i32>,
    /// Statistics of the full table (models refit on their training rows).
    pub standardization: Option<Standardization>,
    pub meta: AssemblyMeta,
    pub run: serde_json::Value,
}
