//! Single-feature interventions re-scored by a frozen dynamic model.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{DynamicSample, FeatureVector, Task};
use crate::models::TrainedModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Adds `delta` to PDSI (positive is wetter).
    PdsiDelta { delta: f64 },
    /// Zeroes both mortality features.
    ClearMortality,
    /// Multiplies NDVI, capped at 1.0.
    NdviScale { factor: f64 },
    PopulationScale { factor: f64 },
}

impl Scenario {
    pub const KINDS: [&'static str; 4] = ["pdsi_delta", "clear_mortality", "ndvi_scale", "population_scale"];

    /// Builds a scenario from a kind name and its parameter.
    pub fn from_parts(kind: &str, parameter: Option<f64>) -> Result<Self> {
        let need = |p: Option<f64>| p.ok_or_else(|| Error::InvalidScenario(format!("{kind} needs a parameter")));
        let s = match kind {
            "pdsi_delta" => Scenario::PdsiDelta { delta: need(parameter)? },
            "clear_mortality" => Scenario::ClearMortality,
            "ndvi_scale" => Scenario::NdviScale { factor: need(parameter)? },
            "population_scale" => Scenario::PopulationScale { factor: need(parameter)? },
            other => {
                return Err(Error::InvalidScenario(format!(
                    "unknown scenario kind {other:?} (expected one of {})",
                    Self::KINDS.join(", ")
                )))
            }
        };
        s.validate()?;
        Ok(s)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::PdsiDelta { .. } => "pdsi_delta",
            Scenario::ClearMortality => "clear_mortality",
            Scenario::NdviScale { .. } => "ndvi_scale",
            Scenario::PopulationScale { .. } => "population_scale",
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Scenario::PdsiDelta { delta } => Some(delta),
            Scenario::ClearMortality => None,
            Scenario::NdviScale { factor } | Scenario::PopulationScale { factor } => Some(factor),
        }
    }

    pub fn description(&self) -> String {
        match *self {
            Scenario::PdsiDelta { delta } => format!("PDSI shifted by {delta:+}"),
            Scenario::ClearMortality => "dead trees cleared".to_string(),
            Scenario::NdviScale { factor } => format!("NDVI scaled by {factor}"),
            Scenario::PopulationScale { factor } => format!("population density scaled by {factor}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scenario::PdsiDelta { delta } if !delta.is_finite() => {
                Err(Error::InvalidScenario(format!("PDSI delta {delta} must be finite")))
            }
            Scenario::NdviScale { factor } if !(factor.is_finite() && factor > 0.0) => {
                Err(Error::InvalidScenario(format!("NDVI factor {factor} must be positive")))
            }
            Scenario::PopulationScale { factor } if !(factor.is_finite() && factor >= 0.0) => {
                Err(Error::InvalidScenario(format!("population factor {factor} must be non-negative")))
            }
            _ => Ok(()),
        }
    }

    /// The intervention on one raw feature vector.
    pub fn apply(&self, f: &FeatureVector) -> FeatureVector {
        let mut out = *f;
        match *self {
            Scenario::PdsiDelta { delta } => out.pdsi += delta,
            Scenario::ClearMortality => {
                out.tree_mortality_area = 0.0;
                out.tree_mortality_number = 0.0;
            }
            Scenario::NdviScale { factor } => out.ndvi = (out.ndvi * factor).min(1.0),
            Scenario::PopulationScale { factor } => out.population_density *= factor,
        }
        out
    }
}

fn single_year(rows: &[DynamicSample]) -> Result<Option<i32>> {
    let year = rows.first().map(|r| r.year);
    if rows.iter().any(|r| Some(r.year) != year) {
        return Err(Error::contract("scenario rows must share one year"));
    }
    Ok(year)
}

/// Perturbed copies of `rows`; the input is untouched.
pub fn apply_scenario(rows: &[DynamicSample], s: &Scenario) -> Result<Vec<DynamicSample>> {
    s.validate()?;
    single_year(rows)?;
    Ok(rows.iter().map(|r| DynamicSample { features: s.apply(&r.features), ..r.clone() }).collect())
}

fn check_dynamic(model: &TrainedModel) -> Result<()> {
    if model.task != Task::Dynamic {
        return Err(Error::contract("counterfactuals need a model trained on the dynamic task"));
    }
    Ok(())
}

/// Predicted class per row.
pub fn predict_rows(model: &TrainedModel, rows: &[DynamicSample]) -> Result<Vec<usize>> {
    check_dynamic(model)?;
    rows.par_iter().map(|r| model.predict(&r.features.to_array())).collect()
}

/// Number of rows predicted at risk.
pub fn count_risk_cells(model: &TrainedModel, rows: &[DynamicSample]) -> Result<usize> {
    Ok(predict_rows(model, rows)?.iter().filter(|&&p| p == 1).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub cell_row: usize,
    pub cell_col: usize,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub description: String,
    pub year: Option<i32>,
    pub baseline_risk_cells: usize,
    pub treated_risk_cells: usize,
    pub flips: Vec<Flip>,
    /// Threshold the model's labels were built with, if recorded.
    pub fire_threshold: Option<f64>,
}

impl ScenarioResult {
    pub fn delta(&self) -> i64 {
        self.treated_risk_cells as i64 - self.baseline_risk_cells as i64
    }
}

fn score(model: &TrainedModel, rows: &[DynamicSample], baseline: &[usize], s: &Scenario) -> Result<ScenarioResult> {
    let treated_rows = apply_scenario(rows, s)?;
    let treated = predict_rows(model, &treated_rows)?;
    let flips = rows
        .iter()
        .zip(baseline.iter().zip(&treated))
        .filter(|(_, (b, t))| b != t)
        .map(|(r, (&before, &after))| Flip { cell_row: r.cell.row, cell_col: r.cell.col, before, after })
        .collect();
    Ok(ScenarioResult {
        scenario: *s,
        description: s.description(),
        year: rows.first().map(|r| r.year),
        baseline_risk_cells: baseline.iter().filter(|&&p| p == 1).count(),
        treated_risk_cells: treated.iter().filter(|&&p| p == 1).count(),
        flips,
        fire_threshold: model.fire_threshold,
    })
}

/// One result per scenario, each against the same baseline.
pub fn sweep(model: &TrainedModel, rows: &[DynamicSample], scenarios: &[Scenario]) -> Result<Vec<ScenarioResult>> {
    single_year(rows)?;
    for s in scenarios {
        s.validate()?;
    }
    let baseline = predict_rows(model, rows)?;
    scenarios.par_iter().map(|s| score(model, rows, &baseline, s)).collect()
}

pub fn run_scenario(model: &TrainedModel, rows: &[DynamicSample], s: &Scenario) -> Result<ScenarioResult> {
    Ok(sweep(model, rows, std::slice::from_ref(s))?.remove(0))
}

/// `scenario_kind,parameter,baseline_count,treated_count,delta`
pub fn sweep_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from("scenario_kind,parameter,baseline_count,treated_count,delta\n");
    for r in results {
        let p = r.scenario.parameter().map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", r.scenario.kind(), p, r.baseline_risk_cells, r.treated_risk_cells, r.delta());
    }
    out
}

/// The drought-relief series, ending at a four-point PDSI increase.
pub fn pdsi_sweep() -> Vec<Scenario> {
    [0.0, 1.0, 1.5, 2.0, 3.0, 4.0].iter().map(|&delta| Scenario::PdsiDelta { delta }).collect()
}
