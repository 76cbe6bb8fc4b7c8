//! Canonical input records and their CSV loaders.
//!
//! Loaders are total: every data row yields either a record or a
//! [`Diagnostic`]. Only an unusable header (or strict mode) is fatal.

mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geojson;
use crate::grid::{GeoPoint, Region};

pub use synth::{generate_synthetic_region, SyntheticRegion, SyntheticRegionConfig, TruthRow};

pub const FIRST_RECORD_YEAR: i32 = 1878;

/// The six predictors, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    PopulationDensity,
    Ndvi,
    Pdsi,
    TreeMortalityArea,
    TreeMortalityNumber,
    Altitude,
}

impl Predictor {
    pub const ALL: [Predictor; 6] = [
        Predictor::PopulationDensity,
        Predictor::Ndvi,
        Predictor::Pdsi,
        Predictor::TreeMortalityArea,
        Predictor::TreeMortalityNumber,
        Predictor::Altitude,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Predictor::PopulationDensity => "population_density",
            Predictor::Ndvi => "ndvi",
            Predictor::Pdsi => "pdsi",
            Predictor::TreeMortalityArea => "tree_mortality_area",
            Predictor::TreeMortalityNumber => "tree_mortality_number",
            Predictor::Altitude => "altitude",
        }
    }

    /// Slow-moving predictors may borrow the nearest covered year.
    pub fn is_slow_moving(self) -> bool {
        matches!(self, Predictor::PopulationDensity | Predictor::Altitude)
    }

    /// Cell values are sums of samples rather than means.
    pub fn is_additive(self) -> bool {
        matches!(self, Predictor::TreeMortalityArea | Predictor::TreeMortalityNumber)
    }

    fn check_value(self, v: f64) -> std::result::Result<(), String> {
        if !v.is_finite() {
            return Err("non-finite value".into());
        }
        match self {
            Predictor::Ndvi if !(-1.0..=1.0).contains(&v) => Err(format!("NDVI {v} outside [-1, 1]")),
            Predictor::PopulationDensity | Predictor::TreeMortalityArea | Predictor::TreeMortalityNumber
                if v < 0.0 =>
            {
                Err(format!("negative {}", self.name()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match key.as_str() {
            "populationdensity" | "popdensity" | "population" => Predictor::PopulationDensity,
            "ndvi" => Predictor::Ndvi,
            "pdsi" => Predictor::Pdsi,
            "treemortalityarea" | "tmarea" => Predictor::TreeMortalityArea,
            "treemortalitynumber" | "tmnumber" => Predictor::TreeMortalityNumber,
            "altitude" | "elevation" => Predictor::Altitude,
            _ => return Err(Error::Format(format!("unknown predictor {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireIncident {
    pub id: String,
    pub year: i32,
    pub location: GeoPoint,
    /// Acres.
    pub burned_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSample {
    pub predictor: Predictor,
    pub location: GeoPoint,
    /// `None` for static layers (altitude).
    pub year: Option<i32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountyPdsiRecord {
    pub county_id: String,
    pub shape: Arc<Region>,
    pub year: i32,
    pub pdsi: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Promote the first diagnostic to a fatal error.
    pub strict: bool,
}

impl<T> Loaded<T> {
    fn finish(self, opts: LoadOptions) -> Result<Self> {
        match self.diagnostics.first() {
            Some(d) if opts.strict => Err(Error::Diagnostics {
                count: self.diagnostics.len(),
                line: d.line,
                message: d.message.clone(),
            }),
            _ => Ok(self),
        }
    }
}

fn current_year() -> i32 {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    1970 + (secs / 31_556_952) as i32
}

fn parse_f64(field: &str, what: &str) -> std::result::Result<f64, String> {
    // accept the Unicode minus sign some exports use
    let cleaned = field.trim().replace('\u{2212}', "-");
    cleaned
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("invalid {what} {field:?}"))
}

fn parse_year(field: &str) -> std::result::Result<i32, String> {
    field.trim().parse::<i32>().map_err(|_| format!("invalid year {field:?}"))
}

fn parse_point(lat: &str, lon: &str) -> std::result::Result<GeoPoint, String> {
    let p = GeoPoint::new(parse_f64(lat, "latitude")?, parse_f64(lon, "longitude")?);
    if p.is_valid() {
        Ok(p)
    } else {
        Err(format!("coordinates ({}, {}) out of range", p.lat, p.lon))
    }
}

struct Row<'a> {
    columns: &'a HashMap<String, usize>,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    /// Field by column name; absent columns read as empty.
    fn get(&self, name: &str) -> &'a str {
        self.columns.get(name).and_then(|&i| self.record.get(i)).unwrap_or("")
    }
}

/// Header-indexed CSV reader shared by the loaders.
struct Table<R: Read> {
    reader: csv::Reader<R>,
    columns: HashMap<String, usize>,
}

impl<R: Read> Table<R> {
    fn open(source: R, required: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
        let headers = reader
            .headers()
            .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
            .clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
            .collect();
        let missing: Vec<&str> = required.iter().copied().filter(|c| !columns.contains_key(*c)).collect();
        if !missing.is_empty() {
            return Err(Error::Format(format!("header is missing column(s) {missing:?}")));
        }
        Ok(Self { reader, columns })
    }

    /// Visits each data row; `f` returns a record or a diagnostic message.
    fn rows<T>(
        &mut self,
        mut f: impl FnMut(&Row<'_>) -> std::result::Result<T, String>,
    ) -> Loaded<T> {
        let mut out = Loaded { records: Vec::new(), diagnostics: Vec::new() };
        let mut record = csv::StringRecord::new();
        loop {
            let line = self.reader.position().line() + 1;
            match self.reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {
                    let line = record.position().map_or(line, |p| p.line());
                    let row = Row { columns: &self.columns, record: &record };
                    match f(&row) {
                        Ok(r) => out.records.push(r),
                        Err(message) => out.diagnostics.push(Diagnostic { line, message }),
                    }
                }
                Err(e) => {
                    let line = e.position().map_or(line, |p| p.line());
                    out.diagnostics.push(Diagnostic { line, message: format!("malformed row: {e}") });
                    if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                        break;
                    }
                }
            }
        }
        out
    }
}

/// Reads `incidents.csv` (`id,year,lat,lon,burned_area_acres`).
pub fn load_incidents<R: Read>(source: R, opts: LoadOptions) -> Result<Loaded<FireIncident>> {
    let mut table = Table::open(source, &["id", "year", "lat", "lon", "burned_area_acres"])?;
    let max_year = current_year();
    table
        .rows(|row| {
            let year = parse_year(row.get("year"))?;
            if !(FIRST_RECORD_YEAR..=max_year).contains(&year) {
                return Err(format!("year {year} outside [{FIRST_RECORD_YEAR}, {max_year}]"));
            }
            let location = parse_point(row.get("lat"), row.get("lon"))?;
            let burned_area = parse_f64(row.get("burned_area_acres"), "burned area")?;
            if burned_area < 0.0 {
                return Err("negative area".into());
            }
            Ok(FireIncident { id: row.get("id").trim().to_string(), year, location, burned_area })
        })
        .finish(opts)
}

/// Reads `predictor.csv` (`predictor,year,lat,lon,value`). When `expected` is
/// given, rows for other predictors are reported as diagnostics. PDSI is not a
/// point predictor and is always rejected here.
pub fn load_predictor_samples<R: Read>(
    source: R,
    expected: Option<Predictor>,
    opts: LoadOptions,
) -> Result<Loaded<PredictorSample>> {
    let mut table = Table::open(source, &["predictor", "year", "lat", "lon", "value"])?;
    table
        .rows(|row| {
            let predictor: Predictor = row.get("predictor").parse().map_err(|e: Error| e.to_string())?;
            if predictor == Predictor::Pdsi {
                return Err("PDSI is read from the county table, not as point samples".into());
            }
            if let Some(want) = expected {
                if predictor != want {
                    return Err(format!("expected {want}, found {predictor}"));
                }
            }
            let year = match row.get("year").trim() {
                "" if predictor == Predictor::Altitude => None,
                "" => return Err(format!("{predictor} requires a year")),
                y => Some(parse_year(y)?),
            };
            let location = parse_point(row.get("lat"), row.get("lon"))?;
            let value = parse_f64(row.get("value"), "value")?;
            predictor.check_value(value)?;
            Ok(PredictorSample { predictor, location, year, value })
        })
        .finish(opts)
}

/// Joins `county_pdsi.csv` (`county_id,year,month,pdsi`; month optional) with
/// county shapes. Monthly rows are averaged into one annual value.
pub fn load_county_pdsi<R: Read>(source: R, shapes_geojson: &str, opts: LoadOptions) -> Result<Loaded<CountyPdsiRecord>> {
    let shapes: HashMap<String, Arc<Region>> = geojson::parse_keyed_shapes(shapes_geojson, "county_id")?
        .into_iter()
        .map(|(id, r)| (id, Arc::new(r)))
        .collect();
    let mut table = Table::open(source, &["county_id", "year", "pdsi"])?;
    let rows = table.rows(|row| {
        let county = row.get("county_id").trim().to_string();
        if county.is_empty() {
            return Err("empty county_id".into());
        }
        let year = parse_year(row.get("year"))?;
        let month = match row.get("month").trim() {
            "" => None,
            m => match m.parse::<u8>() {
                Ok(v) if (1..=12).contains(&v) => Some(v),
                _ => return Err(format!("invalid month {m:?}")),
            },
        };
        let pdsi = parse_f64(row.get("pdsi"), "pdsi")?;
        Ok((county, year, month, pdsi))
    });

    #[derive(Default)]
    struct Acc {
        annual: bool,
        months: BTreeSet<u8>,
        sum: f64,
        n: usize,
    }
    let mut order: Vec<(String, i32)> = Vec::new();
    let mut acc: HashMap<(String, i32), Acc> = HashMap::new();
    for (county, year, month, pdsi) in rows.records {
        let key = (county, year);
        let entry = acc.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Acc::default()
        });
        let dup = match month {
            None => entry.annual || entry.n > 0,
            Some(m) => entry.annual || !entry.months.insert(m),
        };
        if dup {
            let what = month.map_or(String::new(), |m| format!(", month {m}"));
            return Err(Error::DuplicateKey(format!("county {:?}, year {}{what}", key.0, key.1)));
        }
        entry.annual = month.is_none();
        entry.sum += pdsi;
        entry.n += 1;
    }

    let mut unresolved: Vec<String> = order
        .iter()
        .map(|(c, _)| c.clone())
        .filter(|c| !shapes.contains_key(c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unresolved.is_empty() {
        unresolved.sort();
        return Err(Error::UnresolvedCounties(unresolved));
    }
    let records = order
        .into_iter()
        .map(|key| {
            let a = &acc[&key];
            CountyPdsiRecord {
                shape: Arc::clone(&shapes[&key.0]),
                county_id: key.0,
                year: key.1,
                pdsi: a.sum / a.n as f64,
            }
        })
        .collect();
    Loaded { records, diagnostics: rows.diagnostics }.finish(opts)
}

/// Years for which a predictor has data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coverage {
    Static,
    Years(BTreeSet<i32>),
}

impl Coverage {
    pub fn years(years: impl IntoIterator<Item = i32>) -> Self {
        Coverage::Years(years.into_iter().collect())
    }
}

/// Where the value of a predictor for a target year comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "year", rename_all = "snake_case")]
pub enum YearSource {
    Exact(i32),
    Nearest(i32),
    Static,
    Gap,
}

impl YearSource {
    pub fn year(self) -> Option<i32> {
        match self {
            YearSource::Exact(y) | YearSource::Nearest(y) => Some(y),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentPlan {
    entries: BTreeMap<(Predictor, i32), YearSource>,
}

impl AlignmentPlan {
    pub fn source(&self, predictor: Predictor, year: i32) -> YearSource {
        self.entries.get(&(predictor, year)).copied().unwrap_or(YearSource::Gap)
    }

    pub fn gaps(&self) -> impl Iterator<Item = (Predictor, i32)> + '_ {
        self.entries.iter().filter(|(_, s)| **s == YearSource::Gap).map(|(k, _)| *k)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((Predictor, i32), YearSource)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }
}

/// Nearest covered year; ties resolve toward the later year.
fn nearest_year(covered: &BTreeSet<i32>, target: i32) -> Option<i32> {
    covered.iter().copied().min_by_key(|&y| ((y - target).abs(), -y))
}

pub fn align_years(coverage: &BTreeMap<Predictor, Coverage>, target_years: &[i32]) -> AlignmentPlan {
    let mut entries = BTreeMap::new();
    for p in Predictor::ALL {
        for &y in target_years {
            let source = match coverage.get(&p) {
                Some(Coverage::Static) => YearSource::Static,
                Some(Coverage::Years(ys)) if ys.contains(&y) => YearSource::Exact(y),
                Some(Coverage::Years(ys)) if p.is_slow_moving() => {
                    nearest_year(ys, y).map_or(YearSource::Gap, YearSource::Nearest)
                }
                _ => YearSource::Gap,
            };
            entries.insert((p, y), source);
        }
    }
    AlignmentPlan { entries }
}

/// Coverage implied by loaded samples and county records. Altitude is always
/// treated as a static layer.
pub fn coverage_of(samples: &[PredictorSample], counties: &[CountyPdsiRecord]) -> BTreeMap<Predictor, Coverage> {
    let mut years: BTreeMap<Predictor, BTreeSet<i32>> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for s in samples {
        if s.predictor == Predictor::Altitude {
            out.insert(Predictor::Altitude, Coverage::Static);
        } else if let Some(y) = s.year {
            years.entry(s.predictor).or_default().insert(y);
        }
    }
    for c in counties {
        years.entry(Predictor::Pdsi).or_default().insert(c.year);
    }
    for (p, ys) in years {
        out.insert(p, Coverage::Years(ys));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SHAPES: &str = r#"{"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"county_id":"A"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
        {"type":"Feature","properties":{"county_id":"B"},"geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1],[1,0]]]}}]}"#;

    #[test]
    fn well_formed_incidents() {
        let csv = "id,year,lat,lon,burned_area_acres\na,2013,36.1,-120.2,5\nb,2014,36.2,-120.3,300\nc,1878,36.3,-120.4,0\n";
        let l = load_incidents(csv.as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(l.records.len(), 3);
        assert!(l.diagnostics.is_empty());
        assert_eq!(l.records[1].burned_area, 300.0);
    }

    #[test]
    fn negative_area_is_diagnosed() {
        let csv = "id,year,lat,lon,burned_area_acres\na,2013,36.1,-120.2,\u{2212}5\nb,2013,36.1,-120.2,-5\nc,2013,36.1,-120.2,1\n";
        let l = load_incidents(csv.as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(l.records.len(), 1);
        assert_eq!(l.diagnostics.len(), 2);
        assert_eq!(l.diagnostics[0].message, "negative area");
        assert_eq!(l.diagnostics[0].line, 2);
        assert_eq!(l.diagnostics[1].line, 3);
        let strict = load_incidents(csv.as_bytes(), LoadOptions { strict: true });
        assert!(matches!(strict, Err(Error::Diagnostics { count: 2, line: 2, .. })));
    }

    #[test]
    fn bad_header_is_fatal() {
        let csv = "name,when\nx,1\n";
        assert!(matches!(load_incidents(csv.as_bytes(), LoadOptions::default()), Err(Error::Format(_))));
    }

    #[test]
    fn incident_rate_over_record_period() {
        // 20,820 incidents spread over 1878..=2019 (142 years)
        let mut csv = String::from("id,year,lat,lon,burned_area_acres\n");
        for i in 0..20_820 {
            csv.push_str(&format!("f{i},{},37.0,-120.0,1\n", 1878 + (i % 142)));
        }
        let l = load_incidents(csv.as_bytes(), LoadOptions::default()).unwrap();
        let years: BTreeSet<i32> = l.records.iter().map(|r| r.year).collect();
        let rate = l.records.len() as f64 / years.len() as f64;
        assert!((rate - 146.62).abs() < 0.005, "rate {rate}");
    }

    #[test]
    fn predictor_ranges() {
        let csv = "predictor,year,lat,lon,value\nndvi,2013,36,-120,0.43\nndvi,2013,36,-120,1.7\naltitude,,36,-120,-89.0\npopulation_density,2013,36,-120,-1\npdsi,2013,36,-120,-1\n";
        let l = load_predictor_samples(csv.as_bytes(), None, LoadOptions::default()).unwrap();
        assert_eq!(l.records.len(), 2);
        assert_eq!(l.records[0].value, 0.43);
        assert_eq!(l.records[1].predictor, Predictor::Altitude);
        assert_eq!(l.records[1].year, None);
        assert_eq!(l.diagnostics.len(), 3);
        let only_ndvi = load_predictor_samples(csv.as_bytes(), Some(Predictor::Ndvi), LoadOptions::default()).unwrap();
        assert_eq!(only_ndvi.records.len(), 1);
    }

    #[test]
    fn county_join() {
        let csv = "county_id,year,pdsi\nA,2013,-1\nA,2014,-2\nA,2015,0\nB,2013,1\nB,2014,2\nB,2015,3\n";
        let l = load_county_pdsi(csv.as_bytes(), SHAPES, LoadOptions::default()).unwrap();
        assert_eq!(l.records.len(), 6);
        assert_eq!(l.records[3].county_id, "B");
        assert!(l.records[0].shape.contains(GeoPoint::new(0.5, 0.5)));
    }

    #[test]
    fn county_missing_shape_is_fatal() {
        let csv = "county_id,year,pdsi\nA,2013,-1\nZ,2013,-2\nY,2014,0\n";
        match load_county_pdsi(csv.as_bytes(), SHAPES, LoadOptions::default()) {
            Err(Error::UnresolvedCounties(ids)) => assert_eq!(ids, vec!["Y".to_string(), "Z".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn county_duplicate_is_fatal() {
        let csv = "county_id,year,pdsi\nA,2013,-1\nA,2013,-2\n";
        assert!(matches!(load_county_pdsi(csv.as_bytes(), SHAPES, LoadOptions::default()), Err(Error::DuplicateKey(_))));
        let csv = "county_id,year,month,pdsi\nA,2013,1,-1\nA,2013,1,-2\n";
        assert!(matches!(load_county_pdsi(csv.as_bytes(), SHAPES, LoadOptions::default()), Err(Error::DuplicateKey(_))));
    }

    #[test]
    fn monthly_rows_average() {
        let offsets = [-0.3, 0.3, -0.2, 0.2, -0.1, 0.1, -0.05, 0.05, 0.0, 0.0, -0.4, 0.4];
        let mut csv = String::from("county_id,year,month,pdsi\n");
        for (m, d) in offsets.iter().enumerate() {
            csv.push_str(&format!("A,2013,{},{}\n", m + 1, -0.68 + d));
        }
        let l = load_county_pdsi(csv.as_bytes(), SHAPES, LoadOptions::default()).unwrap();
        assert_eq!(l.records.len(), 1);
        assert!((l.records[0].pdsi + 0.68).abs() < 1e-12);
    }

    #[test]
    fn alignment_rules() {
        let mut cov = BTreeMap::new();
        cov.insert(Predictor::PopulationDensity, Coverage::years([2000, 2005, 2010, 2015, 2020]));
        cov.insert(Predictor::Altitude, Coverage::Static);
        cov.insert(Predictor::Ndvi, Coverage::years(2000..=2015));
        let plan = align_years(&cov, &[2013, 2016]);
        assert_eq!(plan.source(Predictor::PopulationDensity, 2013), YearSource::Nearest(2015));
        assert_eq!(plan.source(Predictor::Altitude, 2016), YearSource::Static);
        assert_eq!(plan.source(Predictor::Ndvi, 2013), YearSource::Exact(2013));
        assert_eq!(plan.source(Predictor::Ndvi, 2016), YearSource::Gap);
        assert!(plan.gaps().any(|g| g == (Predictor::Ndvi, 2016)));
    }

    #[test]
    fn nearest_year_by_enumeration() {
        let covered: BTreeSet<i32> = [2000, 2005, 2010, 2015, 2020].into_iter().collect();
        for target in 1990..2030 {
            let best = nearest_year(&covered, target).unwrap();
            let d = (best - target).abs();
            assert!(covered.iter().all(|&y| (y - target).abs() >= d));
            // ties toward later
            assert!(covered.iter().all(|&y| (y - target).abs() > d || y <= best));
        }
        let tie: BTreeSet<i32> = [2000, 2010].into_iter().collect();
        assert_eq!(nearest_year(&tie, 2005), Some(2010));
    }

    proptest! {
        #[test]
        fn loaders_are_total(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
            let mut input = b"id,year,lat,lon,burned_area_acres\n".to_vec();
            input.extend_from_slice(&bytes);
            if let Ok(l) = load_incidents(input.as_slice(), LoadOptions::default()) {
                prop_assert!(l.records.iter().all(|r| r.burned_area >= 0.0));
            }
            let _ = load_predictor_samples(bytes.as_slice(), None, LoadOptions::default());
            let _ = load_county_pdsi(bytes.as_slice(), SHAPES, LoadOptions::default());
        }

        #[test]
        fn rows_partition_into_records_and_diagnostics(rows in proptest::collection::vec(("[a-z0-9]{1,4}", -5i32..3000, -100.0f64..100.0, -10.0f64..10.0), 0..30)) {
            let mut csv = String::from("id,year,lat,lon,burned_area_acres\n");
            for (id, y, lat, a) in &rows {
                csv.push_str(&format!("{id},{y},{lat},-120,{a}\n"));
            }
            let l = load_incidents(csv.as_bytes(), LoadOptions::default()).unwrap();
            prop_assert_eq!(l.records.len() + l.diagnostics.len(), rows.len());
        }
    }
}
