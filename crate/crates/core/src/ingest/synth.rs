//! Desk-scale synthetic regions with a planted logistic risk model.
//!
//! Per-cell-year risk is `sigmoid(b + w · z)` where `z` are the six features
//! standardized over all cell-years and `b` is solved so the mean risk equals
//! `base_rate`. Exactly `round(base_rate * N)` cell-years are drawn positive,
//! without replacement, with probability weights equal to their risk.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{CountyPdsiRecord, FireIncident, Predictor, PredictorSample};
use crate::error::{Error, Result};
use crate::grid::{build_grid, overlap_fraction, BBox, CellId, GeoPoint, GeoPolygon, GridSpec, Region};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticRegionConfig {
    pub seed: u64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub first_year: i32,
    pub last_year: i32,
    /// Coefficients on standardized features, in predictor order.
    pub effect_weights: [f64; 6],
    pub base_rate: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub cell_size: f64,
    /// County blocks are this many cells on a side.
    pub county_block: usize,
}

impl Default for SyntheticRegionConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_rows: 20,
            n_cols: 20,
            first_year: 2013,
            last_year: 2017,
            effect_weights: [3.2, -4.0, -10.0, 4.8, 3.2, 1.6],
            base_rate: 0.05,
            origin_lat: 36.0,
            origin_lon: -121.0,
            cell_size: 0.1,
            county_block: 4,
        }
    }
}

impl SyntheticRegionConfig {
    pub fn years(&self) -> Vec<i32> {
        (self.first_year..=self.last_year).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_rows < 2 || self.n_cols < 2 {
            return Err(Error::Config("synthetic region needs at least 2x2 cells".into()));
        }
        if !(self.base_rate > 0.0 && self.base_rate <= 0.5) {
            return Err(Error::Config(format!("base_rate {} outside (0, 0.5]", self.base_rate)));
        }
        if self.last_year < self.first_year || self.first_year < super::FIRST_RECORD_YEAR + 30 {
            return Err(Error::Config("invalid synthetic year range".into()));
        }
        if self.county_block == 0 || !(self.cell_size > 0.0) {
            return Err(Error::Config("county_block and cell_size must be positive".into()));
        }
        if self.effect_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("effect weights must be finite".into()));
        }
        Ok(())
    }
}

/// Ground truth for one cell-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub cell: CellId,
    pub year: i32,
    /// Feature values exactly as the aggregation rules recover them.
    pub features: [f64; 6],
    pub probability: f64,
    pub label: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticRegion {
    pub config: SyntheticRegionConfig,
    pub grid: GridSpec,
    pub mask: Region,
    pub incidents: Vec<FireIncident>,
    pub samples: Vec<PredictorSample>,
    pub counties: Vec<(String, Arc<Region>)>,
    pub county_pdsi: Vec<CountyPdsiRecord>,
    pub truth: Vec<TruthRow>,
}

/// Smooth pseudo-terrain in roughly [-1, 1].
struct Field {
    waves: [(f64, f64, f64, f64, f64); 3],
}

impl Field {
    fn new(rng: &mut impl Rng) -> Self {
        let mut wave = |amp: f64| {
            (
                amp,
                rng.gen_range(0.1..0.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.1..0.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        };
        Self { waves: [wave(0.6), wave(0.3), wave(0.15)] }
    }

    fn at(&self, c: CellId) -> f64 {
        self.waves
            .iter()
            .map(|&(a, wr, pr, wc, pc)| a * (wr * c.row as f64 + pr).sin() * (wc * c.col as f64 + pc).cos())
            .sum()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

pub fn generate_synthetic_region(cfg: &SyntheticRegionConfig) -> Result<SyntheticRegion> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed);
    let cs = cfg.cell_size;
    let bbox = BBox::new(
        cfg.origin_lat,
        cfg.origin_lat + cfg.n_rows as f64 * cs,
        cfg.origin_lon,
        cfg.origin_lon + cfg.n_cols as f64 * cs,
    )?;
    let mask: Region = GeoPolygon::rect(bbox.lat_min, bbox.lat_max, bbox.lon_min, bbox.lon_max)?.into();
    let grid = build_grid(bbox, cs, &mask)?;
    let cells = grid.cells().to_vec();
    let years = cfg.years();

    let alt_field = Field::new(&mut rng);
    let pop_field = Field::new(&mut rng);
    let ndvi_field = Field::new(&mut rng);
    let normal = |rng: &mut seed::Rng| -> f64 { StandardNormal.sample(rng) };

    let altitude: Vec<f64> = cells.iter().map(|&c| 900.0 + 700.0 * alt_field.at(c) + 150.0 * normal(&mut rng)).collect();
    let pop_base: Vec<f64> = cells.iter().map(|&c| (3.0 + 1.5 * pop_field.at(c) + 0.5 * normal(&mut rng)).exp()).collect();
    let ndvi_base: Vec<f64> = cells
        .iter()
        .map(|&c| (0.45 + 0.25 * ndvi_field.at(c) + 0.05 * normal(&mut rng)).clamp(0.02, 0.9))
        .collect();

    // Counties: blocks whose edges run through the middle of a cell so edge
    // cells split between neighbours. Outer blocks extend past the bbox.
    let block = cfg.county_block as f64;
    let edges = |n: usize, lo: f64| -> Vec<f64> {
        let mut e = vec![lo - 1.0];
        let mut k = 1.0;
        while k * block + 0.5 < n as f64 {
            e.push(lo + (k * block + 0.5) * cs);
            k += 1.0;
        }
        e.push(lo + n as f64 * cs + 1.0);
        e
    };
    let lat_edges = edges(cfg.n_rows, bbox.lat_min);
    let lon_edges = edges(cfg.n_cols, bbox.lon_min);
    let mut counties = Vec::new();
    for i in 0..lat_edges.len() - 1 {
        for j in 0..lon_edges.len() - 1 {
            let shape = GeoPolygon::rect(lat_edges[i], lat_edges[i + 1], lon_edges[j], lon_edges[j + 1])?;
            counties.push((format!("C{i:02}_{j:02}"), Arc::new(Region::from(shape))));
        }
    }
    let county_base = Normal::new(-0.7, 1.0).expect("valid normal");
    let base_pdsi: Vec<f64> = counties.iter().map(|_| county_base.sample(&mut rng)).collect();
    let mut county_pdsi = Vec::new();
    for &y in &years {
        let year_shift = 0.6 * normal(&mut rng);
        for (k, (id, shape)) in counties.iter().enumerate() {
            let pdsi = base_pdsi[k] + year_shift + 0.5 * normal(&mut rng);
            county_pdsi.push(CountyPdsiRecord { county_id: id.clone(), shape: Arc::clone(shape), year: y, pdsi });
        }
    }
    // Area weights per cell, reused for every year.
    let weights: Vec<Vec<(usize, f64)>> = cells
        .iter()
        .map(|&c| {
            counties
                .iter()
                .enumerate()
                .filter_map(|(k, (_, shape))| match overlap_fraction(&grid, c, shape) {
                    Ok(f) if f > 0.0 => Some(Ok((k, f))),
                    Ok(_) => None,
                    Err(e) => Some(Err(e)),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let point_in = |rng: &mut seed::Rng, c: CellId| -> GeoPoint {
        let b = grid.cell_bounds(c).expect("masked cell");
        GeoPoint::new(
            b.lat_lo + rng.gen_range(0.05..0.95) * cs,
            b.lon_lo + rng.gen_range(0.05..0.95) * cs,
        )
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let mut samples = Vec::new();
    let mut alt_value = vec![0.0; cells.len()];
    for (i, &c) in cells.iter().enumerate() {
        let vals = [altitude[i] - 20.0, altitude[i] + 20.0];
        for v in vals {
            samples.push(PredictorSample { predictor: Predictor::Altitude, location: point_in(&mut rng, c), year: None, value: v });
        }
        alt_value[i] = mean(&vals);
    }

    let mut truth = Vec::with_capacity(cells.len() * years.len());
    for (yi, &y) in years.iter().enumerate() {
        for (i, &c) in cells.iter().enumerate() {
            let mut features = [0.0; 6];

            let pop = pop_base[i] * (1.0 + 0.02 * yi as f64) * (0.05 * normal(&mut rng)).exp();
            let pops = [pop * 0.8, pop * 1.2];
            for v in pops {
                samples.push(PredictorSample {
                    predictor: Predictor::PopulationDensity,
                    location: point_in(&mut rng, c),
                    year: Some(y),
                    value: v,
                });
            }
            features[0] = mean(&pops);

            let ndvi = (ndvi_base[i] + 0.06 * normal(&mut rng)).clamp(0.0, 0.95);
            samples.push(PredictorSample { predictor: Predictor::Ndvi, location: point_in(&mut rng, c), year: Some(y), value: ndvi });
            features[1] = ndvi;

            let w = &weights[i];
            let total: f64 = w.iter().map(|(_, f)| f).sum();
            let year_records = &county_pdsi[yi * counties.len()..(yi + 1) * counties.len()];
            features[2] = w.iter().map(|&(k, f)| f * year_records[k].pdsi).sum::<f64>() / total;

            if rng.gen_bool(0.65) {
                let area = (5.0 + 1.5 * normal(&mut rng)).exp();
                let number = (area * (1.0 + 0.5 * normal(&mut rng)).exp()).round().max(1.0);
                let parts = [(area * 0.3, (number / 2.0).floor()), (area * 0.7, number - (number / 2.0).floor())];
                for (a, n) in parts {
                    let location = point_in(&mut rng, c);
                    samples.push(PredictorSample { predictor: Predictor::TreeMortalityArea, location, year: Some(y), value: a });
                    samples.push(PredictorSample { predictor: Predictor::TreeMortalityNumber, location, year: Some(y), value: n });
                }
                features[3] = parts.iter().map(|p| p.0).sum();
                features[4] = parts.iter().map(|p| p.1).sum();
            }
            features[5] = alt_value[i];
            truth.push(TruthRow { cell: c, year: y, features, probability: 0.0, label: false });
        }
    }

    plant_labels(&mut truth, cfg, &mut rng);

    let mut incidents = Vec::new();
    let mut next_id = 0usize;
    let mut push_incident = |incidents: &mut Vec<FireIncident>, year: i32, location: GeoPoint, area: f64| {
        incidents.push(FireIncident { id: format!("s{next_id:06}"), year, location, burned_area: area });
        next_id += 1;
    };
    // Earlier history drives the cumulative (static) labels.
    let n_cells = cells.len();
    let mean_risk: Vec<f64> = (0..n_cells)
        .map(|i| (0..years.len()).map(|yi| truth[yi * n_cells + i].probability).sum::<f64>() / years.len() as f64)
        .collect();
    for y in (cfg.first_year - 30)..cfg.first_year {
        for (i, &c) in cells.iter().enumerate() {
            if rng.gen_bool((2.0 * mean_risk[i]).min(0.9)) {
                let area = round1((4.0 + 2.0 * normal(&mut rng)).exp().min(200_000.0)).max(0.1);
                push_incident(&mut incidents, y, point_in(&mut rng, c), area);
            }
        }
    }
    for t in &truth {
        if t.label {
            let area = round1(300.0 + (5.5 + 1.5 * normal(&mut rng)).exp());
            push_incident(&mut incidents, t.year, point_in(&mut rng, t.cell), area);
        } else if rng.gen_bool(0.2) {
            let area = round1(rng.gen_range(0.1..299.8));
            push_incident(&mut incidents, t.year, point_in(&mut rng, t.cell), area);
        }
    }

    Ok(SyntheticRegion { config: cfg.clone(), grid, mask, incidents, samples, counties, county_pdsi, truth })
}

fn plant_labels(truth: &mut [TruthRow], cfg: &SyntheticRegionConfig, rng: &mut seed::Rng) {
    let n = truth.len() as f64;
    let mut mu = [0.0; 6];
    let mut sd = [0.0; 6];
    for k in 0..6 {
        mu[k] = truth.iter().map(|t| t.features[k]).sum::<f64>() / n;
        let var = truth.iter().map(|t| (t.features[k] - mu[k]).powi(2)).sum::<f64>() / n;
        sd[k] = var.sqrt().max(1e-12);
    }
    let score: Vec<f64> = truth
        .iter()
        .map(|t| (0..6).map(|k| cfg.effect_weights[k] * (t.features[k] - mu[k]) / sd[k]).sum())
        .collect();
    // mean risk is increasing in the intercept
    let mean_risk = |b: f64| score.iter().map(|s| sigmoid(b + s)).sum::<f64>() / n;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_risk(mid) < cfg.base_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    for (t, s) in truth.iter_mut().zip(&score) {
        t.probability = sigmoid(b + s);
    }
    // Weighted sampling without replacement (exponential keys).
    let k = (cfg.base_rate * n).round() as usize;
    let mut keys: Vec<(f64, usize)> = truth
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (u.ln() / t.probability.max(1e-300), i)
        })
        .collect();
    keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in keys.iter().take(k) {
        truth[i].label = true;
    }
}
