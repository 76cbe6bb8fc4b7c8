//! Minimal GeoJSON reading (Polygon / MultiPolygon, WGS84 lon-lat order) and
//! risk-map writing.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::grid::{CellId, GeoPoint, GeoPolygon, GridSpec, Region};

fn ring(v: &Value) -> Result<Vec<GeoPoint>> {
    let arr = v.as_array().ok_or_else(|| Error::Format("ring is not an array".into()))?;
    arr.iter()
        .map(|pos| {
            let p = pos.as_array().filter(|p| p.len() >= 2).ok_or_else(|| {
                Error::Format("position must be an array of at least two numbers".into())
            })?;
            let lon = p[0].as_f64().ok_or_else(|| Error::Format("non-numeric longitude".into()))?;
            let lat = p[1].as_f64().ok_or_else(|| Error::Format("non-numeric latitude".into()))?;
            Ok(GeoPoint::new(lat, lon))
        })
        .collect()
}

fn polygon(coords: &Value) -> Result<GeoPolygon> {
    let rings = coords.as_array().ok_or_else(|| Error::Format("polygon coordinates must be an array".into()))?;
    let (outer, inner) = rings
        .split_first()
        .ok_or_else(|| Error::InvalidPolygon("polygon has no rings".into()))?;
    GeoPolygon::new(ring(outer)?, inner.iter().map(ring).collect::<Result<_>>()?)
}

/// Parses a Polygon or MultiPolygon geometry object.
pub fn parse_geometry(geom: &Value) -> Result<Region> {
    let kind = geom.get("type").and_then(Value::as_str).unwrap_or_default();
    let coords = geom
        .get("coordinates")
        .ok_or_else(|| Error::Format("geometry has no coordinates".into()))?;
    match kind {
        "Polygon" => Ok(Region::new(vec![polygon(coords)?])),
        "MultiPolygon" => {
            let polys = coords
                .as_array()
                .ok_or_else(|| Error::Format("multipolygon coordinates must be an array".into()))?;
            Ok(Region::new(polys.iter().map(polygon).collect::<Result<_>>()?))
        }
        other => Err(Error::Format(format!("unsupported geometry type {other:?}"))),
    }
}

/// Reads a mask from any GeoJSON object: a bare geometry, a Feature, or a
/// FeatureCollection (all features are unioned).
pub fn parse_region(text: &str) -> Result<Region> {
    let v: Value = serde_json::from_str(text)?;
    match v.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            let mut parts = Vec::new();
            for f in features(&v)? {
                parts.extend(feature_geometry(f)?.parts);
            }
            Ok(Region::new(parts))
        }
        Some("Feature") => feature_geometry(&v),
        _ => parse_geometry(&v),
    }
}

fn features(v: &Value) -> Result<&Vec<Value>> {
    v.get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("FeatureCollection has no features array".into()))
}

fn feature_geometry(f: &Value) -> Result<Region> {
    parse_geometry(f.get("geometry").ok_or_else(|| Error::Format("feature has no geometry".into()))?)
}

/// Reads a FeatureCollection of shapes keyed by the string property `key`.
/// Numeric property values are accepted and converted to strings.
pub fn parse_keyed_shapes(text: &str, key: &str) -> Result<Vec<(String, Region)>> {
    let v: Value = serde_json::from_str(text)?;
    features(&v)?
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let id = match f.get("properties").and_then(|p| p.get(key)) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(Error::Format(format!("feature {i} has no {key:?} property"))),
            };
            Ok((id, feature_geometry(f)?))
        })
        .collect()
}

fn ring_coords(ring: &[GeoPoint]) -> Value {
    let mut pts: Vec<Value> = ring.iter().map(|p| json!([p.lon, p.lat])).collect();
    if let Some(first) = pts.first().cloned() {
        pts.push(first);
    }
    Value::Array(pts)
}

pub fn polygon_geometry(poly: &GeoPolygon) -> Value {
    let mut rings = vec![ring_coords(poly.exterior())];
    rings.extend(poly.holes().iter().map(|h| ring_coords(h)));
    json!({ "type": "Polygon", "coordinates": rings })
}

pub fn region_geometry(region: &Region) -> Value {
    match region.parts.as_slice() {
        [single] => polygon_geometry(single),
        parts => json!({
            "type": "MultiPolygon",
            "coordinates": parts.iter().map(|p| polygon_geometry(p)["coordinates"].clone()).collect::<Vec<_>>()
        }),
    }
}

/// One polygon feature per cell; `props` supplies extra properties for each
/// cell (e.g. `"risk"`).
pub fn cell_collection<F>(grid: &GridSpec, cells: &[CellId], mut props: F) -> Result<Value>
where
    F: FnMut(CellId) -> Map<String, Value>,
{
    let features = cells
        .iter()
        .map(|&c| {
            let mut p = props(c);
            p.insert("cell_row".into(), json!(c.row));
            p.insert("cell_col".into(), json!(c.col));
            Ok(json!({
                "type": "Feature",
                "geometry": polygon_geometry(&grid.cell_bounds(c)?.to_polygon()),
                "properties": p,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_polygon_and_multipolygon() {
        let poly = r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}"#;
        let r = parse_region(poly).unwrap();
        assert!(r.contains(GeoPoint::new(0.5, 0.5)));
        let multi = r#"{"type":"Feature","properties":{},"geometry":{"type":"MultiPolygon","coordinates":[
            [[[0,0],[1,0],[1,1],[0,1],[0,0]]],
            [[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}}"#;
        let r = parse_region(multi).unwrap();
        assert_eq!(r.parts.len(), 2);
        assert!(r.contains(GeoPoint::new(5.5, 5.5)));
    }

    #[test]
    fn lon_lat_order() {
        // a sliver at lon 10..11, lat 0..1
        let poly = r#"{"type":"Polygon","coordinates":[[[10,0],[11,0],[11,1],[10,1]]]}"#;
        let r = parse_region(poly).unwrap();
        assert!(r.contains(GeoPoint::new(0.5, 10.5)));
        assert!(!r.contains(GeoPoint::new(10.5, 0.5)));
    }

    #[test]
    fn keyed_shapes_need_key() {
        let fc = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"county_id":"A"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}},
            {"type":"Feature","properties":{"county_id":7},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]}"#;
        let shapes = parse_keyed_shapes(fc, "county_id").unwrap();
        assert_eq!(shapes[0].0, "A");
        assert_eq!(shapes[1].0, "7");
        assert!(parse_keyed_shapes(fc, "name").is_err());
    }

    #[test]
    fn geometry_round_trip() {
        let p = GeoPolygon::rect(1.0, 2.0, 3.0, 4.0).unwrap();
        let back = parse_geometry(&polygon_geometry(&p)).unwrap();
        assert_eq!(back.parts[0], p);
    }
}
