//! Regular latitude/longitude grid over a masked land region.
//!
//! Cells are half-open `[lo, lo + cell_size)` in both axes and are addressed by
//! `(row, col)` counted from the south-west corner of the bounding box. Only
//! cells whose center falls inside the land mask are analysis units.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snap distance (in cell units) used to absorb floating-point noise when a
/// coordinate lies on a cell edge.
const EDGE_SNAP: f64 = 1e-9;

/// Subsamples per axis for [`overlap_fraction`].
pub const OVERLAP_SUBSAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Simple polygon with optional holes. Rings are stored open (the closing
/// vertex is implied).
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPolygon {
    exterior: Vec<GeoPoint>,
    holes: Vec<Vec<GeoPoint>>,
}

fn normalize_ring(mut ring: Vec<GeoPoint>) -> Result<Vec<GeoPoint>> {
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mut distinct: Vec<GeoPoint> = Vec::with_capacity(ring.len());
    for p in &ring {
        if !p.lat.is_finite() || !p.lon.is_finite() {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::InvalidPolygon(format!(
            "ring has {} distinct vertices, need at least 3",
            distinct.len()
        )));
    }
    Ok(ring)
}

impl GeoPolygon {
    pub fn new(exterior: Vec<GeoPoint>, holes: Vec<Vec<GeoPoint>>) -> Result<Self> {
        let exterior = normalize_ring(exterior)?;
        let holes = holes.into_iter().map(normalize_ring).collect::<Result<_>>()?;
        Ok(Self { exterior, holes })
    }

    /// Axis-aligned rectangle polygon.
    pub fn rect(lat_lo: f64, lat_hi: f64, lon_lo: f64, lon_hi: f64) -> Result<Self> {
        Self::new(
            vec![
                GeoPoint::new(lat_lo, lon_lo),
                GeoPoint::new(lat_lo, lon_hi),
                GeoPoint::new(lat_hi, lon_hi),
                GeoPoint::new(lat_hi, lon_lo),
            ],
            vec![],
        )
    }

    pub fn exterior(&self) -> &[GeoPoint] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<GeoPoint>] {
        &self.holes
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        ring_contains(&self.exterior, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }

    fn envelope(&self) -> (f64, f64, f64, f64) {
        let mut lat_lo = f64::INFINITY;
        let mut lat_hi = f64::NEG_INFINITY;
        let mut lon_lo = f64::INFINITY;
        let mut lon_hi = f64::NEG_INFINITY;
        for p in &self.exterior {
            lat_lo = lat_lo.min(p.lat);
            lat_hi = lat_hi.max(p.lat);
            lon_lo = lon_lo.min(p.lon);
            lon_hi = lon_hi.max(p.lon);
        }
        (lat_lo, lat_hi, lon_lo, lon_hi)
    }
}

/// Even-odd crossing test (x = lon, y = lat).
fn ring_contains(ring: &[GeoPoint], p: GeoPoint) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
            if p.lon < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A multi-part region: a point is inside when any part contains it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub parts: Vec<GeoPolygon>,
}

impl Region {
    pub fn new(parts: Vec<GeoPolygon>) -> Self {
        Self { parts }
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        self.parts.iter().any(|poly| poly.contains(p))
    }

    /// Lat/lon envelope `(lat_lo, lat_hi, lon_lo, lon_hi)`.
    pub fn envelope(&self) -> Option<(f64, f64, f64, f64)> {
        self.parts.iter().map(GeoPolygon::envelope).reduce(|a, b| {
            (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3))
        })
    }
}

impl From<GeoPolygon> for Region {
    fn from(p: GeoPolygon) -> Self {
        Region { parts: vec![p] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BBox {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Result<Self> {
        let b = Self { lat_min, lat_max, lon_min, lon_max };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.lat_min, self.lat_max, self.lon_min, self.lon_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.lat_min >= self.lat_max || self.lon_min >= self.lon_max {
            return Err(Error::InvalidRegion(format!("degenerate bounding box {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.lat_min && p.lat <= self.lat_max && p.lon >= self.lon_min && p.lon <= self.lon_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub row: usize,
    pub col: usize,
}

impl CellId {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Half-open cell rectangle in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBounds {
    pub lat_lo: f64,
    pub lat_hi: f64,
    pub lon_lo: f64,
    pub lon_hi: f64,
}

impl CellBounds {
    pub fn center(&self) -> GeoPoint {
        GeoPoint::new(0.5 * (self.lat_lo + self.lat_hi), 0.5 * (self.lon_lo + self.lon_hi))
    }

    pub fn to_polygon(&self) -> GeoPolygon {
        GeoPolygon::rect(self.lat_lo, self.lat_hi, self.lon_lo, self.lon_hi)
            .expect("cell rectangle has four distinct corners")
    }
}

const UNMASKED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bbox: BBox,
    cell_size: f64,
    n_rows: usize,
    n_cols: usize,
    /// Row-major flat index -> position in `cells`, or `UNMASKED`.
    slot: Vec<u32>,
    /// Masked cells in row-major order.
    cells: Vec<CellId>,
}

fn axis_cells(extent: f64, cell_size: f64) -> usize {
    let r = extent / cell_size;
    let k = r.round();
    if (r - k).abs() < EDGE_SNAP * r.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Index of the half-open interval containing `offset` (in cell units),
/// snapping values within `EDGE_SNAP` of an edge onto it.
fn axis_index(offset: f64) -> i64 {
    let k = offset.round();
    if (offset - k).abs() < EDGE_SNAP {
        k as i64
    } else {
        offset.floor() as i64
    }
}

/// Builds a grid whose land mask holds exactly the cells with their center
/// inside `mask`.
pub fn build_grid(bbox: BBox, cell_size: f64, mask: &Region) -> Result<GridSpec> {
    bbox.validate()?;
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(Error::InvalidRegion(format!("cell size must be positive, got {cell_size}")));
    }
    if mask.parts.is_empty() {
        return Err(Error::InvalidPolygon("mask has no polygons".into()));
    }
    let n_rows = axis_cells(bbox.lat_max - bbox.lat_min, cell_size);
    let n_cols = axis_cells(bbox.lon_max - bbox.lon_min, cell_size);
    let mut flags = vec![false; n_rows * n_cols];
    for row in 0..n_rows {
        for col in 0..n_cols {
            let center = raw_bounds(&bbox, cell_size, row, col).center();
            flags[row * n_cols + col] = mask.contains(center);
        }
    }
    GridSpec::from_flags(bbox, cell_size, n_rows, n_cols, &flags)
}

fn raw_bounds(bbox: &BBox, cell_size: f64, row: usize, col: usize) -> CellBounds {
    CellBounds {
        lat_lo: bbox.lat_min + row as f64 * cell_size,
        lat_hi: bbox.lat_min + (row + 1) as f64 * cell_size,
        lon_lo: bbox.lon_min + col as f64 * cell_size,
        lon_hi: bbox.lon_min + (col + 1) as f64 * cell_size,
    }
}

impl GridSpec {
    fn from_flags(bbox: BBox, cell_size: f64, n_rows: usize, n_cols: usize, flags: &[bool]) -> Result<Self> {
        if flags.len() != n_rows * n_cols {
            return Err(Error::Format("land mask size does not match grid shape".into()));
        }
        let mut slot = vec![UNMASKED; flags.len()];
        let mut cells = Vec::new();
        for (i, &on) in flags.iter().enumerate() {
            if on {
                slot[i] = cells.len() as u32;
                cells.push(CellId::new(i / n_cols, i % n_cols));
            }
        }
        Ok(Self { bbox, cell_size, n_rows, n_cols, slot, cells })
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Masked cells in row-major order.
    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_masked(&self, c: CellId) -> bool {
        self.index_of(c).is_some()
    }

    /// Position of a masked cell within [`GridSpec::cells`].
    pub fn index_of(&self, c: CellId) -> Option<usize> {
        if c.row >= self.n_rows || c.col >= self.n_cols {
            return None;
        }
        match self.slot[c.row * self.n_cols + c.col] {
            UNMASKED => None,
            s => Some(s as usize),
        }
    }

    /// Cell containing `p`, or `None` when `p` is outside the bounding box or
    /// falls in an unmasked cell.
    pub fn locate(&self, p: GeoPoint) -> Option<CellId> {
        let c = self.locate_any(p)?;
        self.is_masked(c).then_some(c)
    }

    /// Like [`GridSpec::locate`] but ignores the land mask.
    pub fn locate_any(&self, p: GeoPoint) -> Option<CellId> {
        if !p.lat.is_finite() || !p.lon.is_finite() || !self.bbox.contains(p) {
            return None;
        }
        let row = axis_index((p.lat - self.bbox.lat_min) / self.cell_size);
        let col = axis_index((p.lon - self.bbox.lon_min) / self.cell_size);
        // The top and right edges of the bbox belong to the last cell.
        let row = (row.max(0) as usize).min(self.n_rows - 1);
        let col = (col.max(0) as usize).min(self.n_cols - 1);
        Some(CellId::new(row, col))
    }

    pub fn cell_bounds(&self, c: CellId) -> Result<CellBounds> {
        if c.row >= self.n_rows || c.col >= self.n_cols {
            return Err(Error::CellIndex { row: c.row, col: c.col });
        }
        Ok(raw_bounds(&self.bbox, self.cell_size, c.row, c.col))
    }

    pub fn to_document(&self) -> GridDocument {
        let mut bits = vec![0u8; self.slot.len().div_ceil(8)];
        for (i, &s) in self.slot.iter().enumerate() {
            if s != UNMASKED {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        GridDocument {
            bbox: self.bbox,
            cell_size: self.cell_size,
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            cell_count: self.cells.len(),
            land_mask: B64.encode(bits),
        }
    }

    pub fn from_document(doc: &GridDocument) -> Result<Self> {
        doc.bbox.validate()?;
        if !(doc.cell_size.is_finite() && doc.cell_size > 0.0) {
            return Err(Error::InvalidRegion("cell size must be positive".into()));
        }
        let expect_rows = axis_cells(doc.bbox.lat_max - doc.bbox.lat_min, doc.cell_size);
        let expect_cols = axis_cells(doc.bbox.lon_max - doc.bbox.lon_min, doc.cell_size);
        if (expect_rows, expect_cols) != (doc.n_rows, doc.n_cols) {
            return Err(Error::Format(format!(
                "grid shape {}x{} does not match bbox/cell size ({expect_rows}x{expect_cols})",
                doc.n_rows, doc.n_cols
            )));
        }
        let bits = B64
            .decode(doc.land_mask.as_bytes())
            .map_err(|e| Error::Format(format!("land mask is not valid base64: {e}")))?;
        let n = doc.n_rows * doc.n_cols;
        if bits.len() != n.div_ceil(8) {
            return Err(Error::Format("land mask bitset has the wrong length".into()));
        }
        let flags: Vec<bool> = (0..n).map(|i| bits[i / 8] & (1 << (i % 8)) != 0).collect();
        let grid = Self::from_flags(doc.bbox, doc.cell_size, doc.n_rows, doc.n_cols, &flags)?;
        if grid.cells.len() != doc.cell_count {
            return Err(Error::Format("cell_count does not match land mask".into()));
        }
        Ok(grid)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// Serialized grid: the land mask is a row-major bitset (LSB first within
/// each byte) encoded as base64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub bbox: BBox,
    pub cell_size: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_count: usize,
    pub land_mask: String,
}

/// Fraction of cell `c` covered by `region`, estimated from a deterministic
/// 10x10 lattice of sub-cell centers. Multi-part regions sum their parts.
pub fn overlap_fraction(grid: &GridSpec, c: CellId, region: &Region) -> Result<f64> {
    let b = grid.cell_bounds(c)?;
    if region.parts.is_empty() {
        return Err(Error::InvalidPolygon("region has no polygons".into()));
    }
    let n = OVERLAP_SUBSAMPLES;
    let step = grid.cell_size / n as f64;
    let mut hits = 0usize;
    for poly in &region.parts {
        let (lat_lo, lat_hi, lon_lo, lon_hi) = poly.envelope();
        if lat_hi < b.lat_lo || lat_lo > b.lat_hi || lon_hi < b.lon_lo || lon_lo > b.lon_hi {
            continue;
        }
        for i in 0..n {
            let lat = b.lat_lo + (i as f64 + 0.5) * step;
            for j in 0..n {
                let lon = b.lon_lo + (j as f64 + 0.5) * step;
                if poly.contains(GeoPoint::new(lat, lon)) {
                    hits += 1;
                }
            }
        }
    }
    Ok((hits as f64 / (n * n) as f64).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> GridSpec {
        let extent = n as f64 * 0.1;
        let bbox = BBox::new(0.0, extent, 0.0, extent).unwrap();
        let mask = GeoPolygon::rect(0.0, extent, 0.0, extent).unwrap().into();
        build_grid(bbox, 0.1, &mask).unwrap()
    }

    #[test]
    fn one_degree_box_has_hundred_cells() {
        let g = unit_grid(10);
        assert_eq!(g.cell_count(), 100);
        assert_eq!(g.cells()[0], CellId::new(0, 0));
        assert_eq!(g.cells()[99], CellId::new(9, 9));
    }

    #[test]
    fn mask_excludes_cells_by_center() {
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        // centers with lat + lon < 1.05, i.e. row + col <= 9
        let tri = GeoPolygon::new(
            vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 1.05), GeoPoint::new(1.05, 0.0)],
            vec![],
        )
        .unwrap();
        let g = build_grid(bbox, 0.1, &tri.into()).unwrap();
        assert_eq!(g.cell_count(), 55);
        assert!(g.is_masked(CellId::new(0, 8)));
        assert!(!g.is_masked(CellId::new(9, 9)));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(BBox::new(1.0, 1.0, 0.0, 1.0), Err(Error::InvalidRegion(_))));
        let two = GeoPolygon::new(vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(1.0, 1.0), GeoPoint::new(0.0, 0.0)], vec![]);
        assert!(matches!(two, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn locate_examples() {
        let g = unit_grid(10);
        let c = g.cell_bounds(CellId::new(3, 7)).unwrap().center();
        assert_eq!(g.locate(c), Some(CellId::new(3, 7)));
        // shared edge goes to the higher row
        assert_eq!(g.locate(GeoPoint::new(0.1, 0.05)), Some(CellId::new(1, 0)));
        assert_eq!(g.locate(GeoPoint::new(0.3, 0.05)), Some(CellId::new(3, 0)));
        assert_eq!(g.locate(GeoPoint::new(1.0001, 0.5)), None);
        // top/right edge of the bbox belongs to the last cell
        assert_eq!(g.locate(GeoPoint::new(1.0, 1.0)), Some(CellId::new(9, 9)));
    }

    #[test]
    fn edge_snapping_with_offset_origin() {
        let bbox = BBox::new(32.5, 42.0, -124.5, -114.1).unwrap();
        let mask = GeoPolygon::rect(32.5, 42.0, -124.5, -114.1).unwrap().into();
        let g = build_grid(bbox, 0.1, &mask).unwrap();
        assert_eq!(g.n_rows(), 95);
        assert_eq!(g.n_cols(), 104);
        assert_eq!(g.locate(GeoPoint::new(32.6, -124.5)), Some(CellId::new(1, 0)));
    }

    #[test]
    fn cell_bounds_examples() {
        let g = unit_grid(10);
        let b = g.cell_bounds(CellId::new(0, 0)).unwrap();
        assert_eq!((b.lat_lo, b.lat_hi, b.lon_lo, b.lon_hi), (0.0, 0.1, 0.0, 0.1));
        let b = g.cell_bounds(CellId::new(2, 3)).unwrap();
        assert!((b.lat_lo - 0.2).abs() < 1e-12 && (b.lat_hi - 0.3).abs() < 1e-12);
        assert!((b.lon_lo - 0.3).abs() < 1e-12 && (b.lon_hi - 0.4).abs() < 1e-12);
        assert!(matches!(g.cell_bounds(CellId::new(10, 0)), Err(Error::CellIndex { .. })));
    }

    #[test]
    fn non_multiple_extent_extends_last_cell() {
        let bbox = BBox::new(0.0, 0.25, 0.0, 0.1).unwrap();
        let mask = GeoPolygon::rect(-1.0, 1.0, -1.0, 1.0).unwrap().into();
        let g = build_grid(bbox, 0.1, &mask).unwrap();
        assert_eq!(g.n_rows(), 3);
        let top = g.cell_bounds(CellId::new(2, 0)).unwrap();
        assert!((top.lat_hi - 0.3).abs() < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let g = unit_grid(10);
        let c = CellId::new(2, 3);
        let b = g.cell_bounds(c).unwrap();
        let big = GeoPolygon::rect(-5.0, 5.0, -5.0, 5.0).unwrap().into();
        assert_eq!(overlap_fraction(&g, c, &big).unwrap(), 1.0);
        let lower = GeoPolygon::rect(b.lat_lo, b.lat_lo + 0.05, b.lon_lo, b.lon_hi).unwrap().into();
        assert_eq!(overlap_fraction(&g, c, &lower).unwrap(), 0.5);
        let far = GeoPolygon::rect(5.0, 6.0, 5.0, 6.0).unwrap().into();
        assert_eq!(overlap_fraction(&g, c, &far).unwrap(), 0.0);
    }

    /// Brute-force 1000x1000 lattice estimate of the covered fraction.
    fn fine_grid_fraction(b: &CellBounds, region: &Region) -> f64 {
        let n = 1000;
        let dlat = (b.lat_hi - b.lat_lo) / n as f64;
        let dlon = (b.lon_hi - b.lon_lo) / n as f64;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = GeoPoint::new(b.lat_lo + (i as f64 + 0.5) * dlat, b.lon_lo + (j as f64 + 0.5) * dlon);
                if region.contains(p) {
                    hits += 1;
                }
            }
        }
        hits as f64 / (n * n) as f64
    }

    #[test]
    fn corner_triangle_matches_fine_grid_oracle() {
        let g = unit_grid(10);
        let c = CellId::new(4, 4);
        let b = g.cell_bounds(c).unwrap();
        let leg = 0.05;
        let tri: Region = GeoPolygon::new(
            vec![
                GeoPoint::new(b.lat_lo, b.lon_lo),
                GeoPoint::new(b.lat_lo, b.lon_lo + leg),
                GeoPoint::new(b.lat_lo + leg, b.lon_lo),
            ],
            vec![],
        )
        .unwrap()
        .into();
        let oracle = fine_grid_fraction(&b, &tri);
        assert!((oracle - 0.125).abs() < 2e-3, "oracle {oracle}");
        let est = overlap_fraction(&g, c, &tri).unwrap();
        assert!((est - oracle).abs() <= 0.03, "estimate {est} vs oracle {oracle}");
    }

    #[test]
    fn hole_is_excluded() {
        let g = unit_grid(10);
        let c = CellId::new(0, 0);
        let poly = GeoPolygon::new(
            vec![GeoPoint::new(-1.0, -1.0), GeoPoint::new(-1.0, 1.0), GeoPoint::new(1.0, 1.0), GeoPoint::new(1.0, -1.0)],
            vec![vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 0.05), GeoPoint::new(0.1, 0.05), GeoPoint::new(0.1, 0.0)]],
        )
        .unwrap();
        assert_eq!(overlap_fraction(&g, c, &poly.into()).unwrap(), 0.5);
    }

    #[test]
    fn document_round_trip() {
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.3).unwrap();
        let tri = GeoPolygon::new(
            vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 1.3), GeoPoint::new(1.0, 0.0)],
            vec![],
        )
        .unwrap();
        let g = build_grid(bbox, 0.1, &tri.into()).unwrap();
        let back = GridSpec::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }

    proptest! {
        #[test]
        fn bounds_locate_round_trip(row in 0usize..40, col in 0usize..40) {
            let g = unit_grid(40);
            let c = CellId::new(row, col);
            prop_assert_eq!(g.locate(g.cell_bounds(c).unwrap().center()), Some(c));
        }

        #[test]
        fn interior_points_partition(lat in 0.0f64..4.0, lon in 0.0f64..4.0) {
            let g = unit_grid(40);
            let c = g.locate(GeoPoint::new(lat, lon)).unwrap();
            let b = g.cell_bounds(c).unwrap();
            let owners = g
                .cells()
                .iter()
                .filter(|other| {
                    let ob = g.cell_bounds(**other).unwrap();
                    lat >= ob.lat_lo - 1e-9 && lat < ob.lat_hi - 1e-9 && lon >= ob.lon_lo - 1e-9 && lon < ob.lon_hi - 1e-9
                })
                .count();
            prop_assert_eq!(owners, 1);
            prop_assert!(lat >= b.lat_lo - 1e-9 && lat < b.lat_hi + 1e-9);
        }

        #[test]
        fn tiling_fractions_sum_to_one(split_lat in 0.01f64..0.09, split_lon in 0.01f64..0.09) {
            let g = unit_grid(10);
            let c = CellId::new(5, 5);
            let b = g.cell_bounds(c).unwrap();
            let (ml, mo) = (b.lat_lo + split_lat, b.lon_lo + split_lon);
            let tiles = [
                GeoPolygon::rect(b.lat_lo, ml, b.lon_lo, mo).unwrap(),
                GeoPolygon::rect(b.lat_lo, ml, mo, b.lon_hi).unwrap(),
                GeoPolygon::rect(ml, b.lat_hi, b.lon_lo, mo).unwrap(),
                GeoPolygon::rect(ml, b.lat_hi, mo, b.lon_hi).unwrap(),
            ];
            let total: f64 = tiles.iter().map(|t| overlap_fraction(&g, c, &t.clone().into()).unwrap()).sum();
            prop_assert!((total - 1.0).abs() <= 0.02, "sum {}", total);
        }
    }
}
