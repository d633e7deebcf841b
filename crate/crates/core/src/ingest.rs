//! Dataset readers and writers.
//!
//! GeoJSON input is a `FeatureCollection` of single-part `Point`,
//! `LineString` or `Polygon` features in WGS84. Multi-part geometries are
//! rejected; explode them before loading. CSV input is comma-delimited with
//! a header row and one point per row.
//!
//! A [`SchemaMapping`] selects the id column and renames source attributes
//! to the canonical field names the detector is configured with. Rows or
//! features with invalid coordinates are skipped and reported in
//! [`Dataset::ingest_warnings`]; nothing is clamped.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::engine::GeoObject;
use crate::error::{GeometryError, IngestError};
use crate::geo::{GeoLine, GeoPoint, GeoPolygon, Geometry};

/// `id_field` value requesting sequential ids from the row or feature index.
pub const AUTO_ID: &str = "auto";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMap {
    pub source: String,
    /// Defaults to `source`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
}

impl FieldMap {
    pub fn identity(name: impl Into<String>) -> Self {
        Self {
            source: name.into(),
            canonical: None,
        }
    }

    pub fn renamed(source: impl Into<String>, canonical: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            canonical: Some(canonical.into()),
        }
    }

    pub fn canonical(&self) -> &str {
        self.canonical.as_deref().unwrap_or(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMapping {
    #[serde(default = "default_id_field")]
    pub id_field: String,
    pub similarity_fields: Vec<FieldMap>,
    #[serde(default = "default_lon")]
    pub lon_field: String,
    #[serde(default = "default_lat")]
    pub lat_field: String,
    #[serde(default)]
    pub source_label: String,
}

fn default_id_field() -> String {
    AUTO_ID.to_owned()
}

fn default_lon() -> String {
    "lon".to_owned()
}

fn default_lat() -> String {
    "lat".to_owned()
}

impl SchemaMapping {
    pub fn new(id_field: impl Into<String>, fields: Vec<FieldMap>) -> Self {
        Self {
            id_field: id_field.into(),
            similarity_fields: fields,
            lon_field: default_lon(),
            lat_field: default_lat(),
            source_label: String::new(),
        }
    }

    pub fn with_source_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.similarity_fields.is_empty() {
            return Err(IngestError::Mapping("similarity_fields is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for f in &self.similarity_fields {
            if !seen.insert(f.canonical()) {
                return Err(IngestError::Mapping(format!(
                    "canonical field `{}` mapped twice",
                    f.canonical()
                )));
            }
        }
        if self.id_field.is_empty() {
            return Err(IngestError::Mapping("id_field is empty".into()));
        }
        Ok(())
    }

    fn is_auto(&self) -> bool {
        self.id_field == AUTO_ID
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub objects: Vec<GeoObject>,
    pub source_label: String,
    pub ingest_warnings: Vec<String>,
}

struct Collector {
    dataset: Dataset,
    ids: HashSet<String>,
}

impl Collector {
    fn new(label: &str) -> Self {
        Self {
            dataset: Dataset {
                source_label: label.to_owned(),
                ..Dataset::default()
            },
            ids: HashSet::new(),
        }
    }

    fn warn(&mut self, msg: String) {
        self.dataset.ingest_warnings.push(msg);
    }

    fn push(&mut self, what: &str, obj: GeoObject) {
        if self.ids.insert(obj.id.clone()) {
            self.dataset.objects.push(obj);
        } else {
            self.warn(format!("{what}: duplicate id `{}` skipped", obj.id));
        }
    }
}

/// Load by extension: `.csv` as CSV, anything else as GeoJSON.
pub fn load(path: &Path, mapping: &SchemaMapping) -> Result<Dataset, IngestError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => load_csv(path, mapping),
        _ => load_geojson(path, mapping),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_owned(),
        source,
    }
}

fn malformed(path: &Path, message: impl Into<String>) -> IngestError {
    IngestError::Malformed {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        other => Some(other.to_string()),
    }
}

enum GeomOutcome {
    Ok(Geometry),
    Invalid(String),
    Unsupported(String),
}

fn position(v: &Value) -> Result<GeoPoint, String> {
    let arr = v.as_array().ok_or("position is not an array")?;
    if arr.len() < 2 {
        return Err("position has fewer than 2 numbers".into());
    }
    let lon = arr[0].as_f64().ok_or("longitude is not a number")?;
    let lat = arr[1].as_f64().ok_or("latitude is not a number")?;
    GeoPoint::new(lon, lat).map_err(|e| e.to_string())
}

fn positions(v: &Value) -> Result<Vec<GeoPoint>, String> {
    v.as_array()
        .ok_or_else(|| "coordinates are not an array".to_owned())?
        .iter()
        .map(position)
        .collect()
}

fn parse_geometry(g: &Value) -> GeomOutcome {
    let Some(kind) = g.get("type").and_then(Value::as_str) else {
        return GeomOutcome::Invalid("geometry has no type".into());
    };
    let coords = g.get("coordinates").unwrap_or(&Value::Null);
    let built: Result<Geometry, String> = match kind {
        "Point" => position(coords).map(Geometry::Point),
        "LineString" => positions(coords).and_then(|v| {
            GeoLine::new(v)
                .map(Geometry::Line)
                .map_err(|e: GeometryError| e.to_string())
        }),
        "Polygon" => {
            let Some(rings) = coords.as_array() else {
                return GeomOutcome::Invalid("polygon coordinates are not an array".into());
            };
            match rings.len() {
                0 => Err("polygon has no rings".into()),
                1 => positions(&rings[0])
                    .and_then(|v| GeoPolygon::new(v).map(Geometry::Polygon).map_err(|e| e.to_string())),
                _ => Err("polygon holes are not supported".into()),
            }
        }
        other => return GeomOutcome::Unsupported(other.to_owned()),
    };
    match built {
        Ok(g) => GeomOutcome::Ok(g),
        Err(e) => GeomOutcome::Invalid(e),
    }
}

pub fn load_geojson(path: &Path, mapping: &SchemaMapping) -> Result<Dataset, IngestError> {
    mapping.validate()?;
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(malformed(path, "top-level type is not FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(path, "`features` is missing or not an array"))?;

    let mut out = Collector::new(&mapping.source_label);
    for (index, feature) in features.iter().enumerate() {
        let what = format!("feature {index}");
        let geometry = match feature.get("geometry") {
            None | Some(Value::Null) => {
                out.warn(format!("{what}: no geometry, skipped"));
                continue;
            }
            Some(g) => match parse_geometry(g) {
                GeomOutcome::Ok(g) => g,
                GeomOutcome::Invalid(msg) => {
                    out.warn(format!("{what}: invalid geometry ({msg}), skipped"));
                    continue;
                }
                GeomOutcome::Unsupported(kind) => {
                    return Err(IngestError::UnsupportedGeometry {
                        path: path.to_owned(),
                        index,
                        kind,
                    })
                }
            },
        };
        let empty = Map::new();
        let props = feature.get("properties").and_then(Value::as_object).unwrap_or(&empty);
        let id = if mapping.is_auto() {
            Some(index.to_string())
        } else {
            props
                .get(&mapping.id_field)
                .or_else(|| (mapping.id_field == "id").then(|| feature.get("id")).flatten())
                .and_then(scalar_text)
        };
        let Some(id) = id.filter(|s| !s.is_empty()) else {
            out.warn(format!("{what}: missing id `{}`, skipped", mapping.id_field));
            continue;
        };
        let fields = mapping
            .similarity_fields
            .iter()
            .filter_map(|f| {
                let v = props.get(&f.source).and_then(scalar_text)?;
                Some((f.canonical().to_owned(), v))
            })
            .collect();
        out.push(
            &what,
            GeoObject {
                id,
                geometry,
                fields,
                source: mapping.source_label.clone(),
            },
        );
    }
    Ok(out.dataset)
}

pub fn load_csv(path: &Path, mapping: &SchemaMapping) -> Result<Dataset, IngestError> {
    mapping.validate()?;
    let csv_err = |source| IngestError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                path: path.to_owned(),
                column: name.to_owned(),
            })
    };
    let lon_col = column(&mapping.lon_field)?;
    let lat_col = column(&mapping.lat_field)?;
    let id_col = if mapping.is_auto() {
        None
    } else {
        Some(column(&mapping.id_field)?)
    };
    let field_cols = mapping
        .similarity_fields
        .iter()
        .map(|f| Ok((f.canonical().to_owned(), column(&f.source)?)))
        .collect::<Result<Vec<_>, IngestError>>()?;

    let mut out = Collector::new(&mapping.source_label);
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let what = format!("row {row}");
        let cell = |i: usize| record.get(i).unwrap_or("").trim();
        let point = match (cell(lon_col).parse::<f64>(), cell(lat_col).parse::<f64>()) {
            (Ok(lon), Ok(lat)) => GeoPoint::new(lon, lat).map_err(|e| e.to_string()),
            _ => Err(format!(
                "unparseable coordinate ({:?}, {:?})",
                cell(lon_col),
                cell(lat_col)
            )),
        };
        let point = match point {
            Ok(p) => p,
            Err(msg) => {
                out.warn(format!("{what}: {msg}, skipped"));
                continue;
            }
        };
        let id = match id_col {
            None => row.to_string(),
            Some(c) => cell(c).to_owned(),
        };
        if id.is_empty() {
            out.warn(format!("{what}: missing id `{}`, skipped", mapping.id_field));
            continue;
        }
        let fields = field_cols
            .iter()
            .filter_map(|(name, c)| {
                let v = record.get(*c)?;
                (!v.is_empty()).then(|| (name.clone(), v.to_owned()))
            })
            .collect();
        out.push(
            &what,
            GeoObject {
                id,
                geometry: Geometry::Point(point),
                fields,
                source: mapping.source_label.clone(),
            },
        );
    }
    Ok(out.dataset)
}

fn geometry_json(g: &Geometry) -> Value {
    let pos = |p: &GeoPoint| json!([p.lon(), p.lat()]);
    match g {
        Geometry::Point(p) => json!({"type": "Point", "coordinates": pos(p)}),
        Geometry::Line(l) => json!({
            "type": "LineString",
            "coordinates": l.vertices().iter().map(pos).collect::<Vec<_>>(),
        }),
        Geometry::Polygon(p) => json!({
            "type": "Polygon",
            "coordinates": [p.ring().iter().map(pos).collect::<Vec<_>>()],
        }),
    }
}

/// Writes a feature collection with the object id under property `id` and
/// every field as a string property. One feature per line.
pub fn write_geojson(path: &Path, objects: &[GeoObject]) -> Result<(), IngestError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{{\"type\":\"FeatureCollection\",\"features\":[")?;
        for (i, o) in objects.iter().enumerate() {
            let mut props = Map::new();
            props.insert("id".into(), Value::String(o.id.clone()));
            for (k, v) in &o.fields {
                props.insert(k.clone(), Value::String(v.clone()));
            }
            let feature = json!({
                "type": "Feature",
                "geometry": geometry_json(&o.geometry),
                "properties": props,
            });
            let sep = if i + 1 < objects.len() { "," } else { "" };
            writeln!(w, "{feature}{sep}")?;
        }
        writeln!(w, "]}}")?;
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

/// Writes point objects as `id,lon,lat,<fields...>` with field columns in
/// sorted order.
pub fn write_csv(path: &Path, objects: &[GeoObject]) -> Result<(), IngestError> {
    let columns: BTreeSet<&str> = objects
        .iter()
        .flat_map(|o| o.fields.keys().map(String::as_str))
        .collect();
    let csv_err = |source| IngestError::Csv {
        path: PathBuf::from(path),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["id", "lon", "lat"];
    header.extend(columns.iter().copied());
    w.write_record(&header).map_err(csv_err)?;
    for o in objects {
        let Geometry::Point(p) = &o.geometry else {
            return Err(malformed(
                path,
                format!("object `{}`: only points can be written as CSV", o.id),
            ));
        };
        let mut rec = vec![o.id.clone(), p.lon().to_string(), p.lat().to_string()];
        rec.extend(columns.iter().map(|c| o.fields.get(*c).cloned().unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Mapping that reads back files produced by [`write_geojson`] / [`write_csv`].
pub fn roundtrip_mapping(fields: &[&str], label: &str) -> SchemaMapping {
    SchemaMapping::new("id", fields.iter().map(|f| FieldMap::identity(*f)).collect()).with_source_label(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn name_mapping() -> SchemaMapping {
        SchemaMapping::new(AUTO_ID, vec![FieldMap::identity("name")])
    }

    #[test]
    fn mapping_validation() {
        let mut m = name_mapping();
        assert!(m.validate().is_ok());
        m.similarity_fields.push(FieldMap::renamed("title", "name"));
        assert!(m.validate().is_err());
        m.similarity_fields.clear();
        assert!(m.validate().is_err());
    }

    #[test]
    fn empty_collection() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.geojson");
        fs::write(&p, r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        let d = load_geojson(&p, &name_mapping()).unwrap();
        assert!(d.objects.is_empty() && d.ingest_warnings.is_empty());
    }

    #[test]
    fn point_feature_with_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[{"type":"Feature",
               "geometry":{"type":"Point","coordinates":[-73.57,45.50]},
               "properties":{"name":"Laurier Lounge","phone":"555"}}]}"#,
        )
        .unwrap();
        let d = load_geojson(&p, &name_mapping()).unwrap();
        assert_eq!(d.objects.len(), 1);
        let o = &d.objects[0];
        assert_eq!(o.id, "0");
        assert_eq!(o.field("name"), Some("Laurier Lounge"));
        assert_eq!(o.field("phone"), None);
    }

    #[test]
    fn bad_latitude_skipped_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","geometry":{"type":"Point","coordinates":[0,95]},"properties":{"name":"a"}},
              {"type":"Feature","geometry":{"type":"Point","coordinates":[0,45]},"properties":{"name":"b"}},
              {"type":"Feature","geometry":{"type":"Point","coordinates":[1,46]},"properties":{"name":"c"}}]}"#,
        )
        .unwrap();
        let d = load_geojson(&p, &name_mapping()).unwrap();
        assert_eq!(d.objects.len(), 2);
        assert_eq!(d.ingest_warnings.len(), 1);
        assert!(d.ingest_warnings[0].starts_with("feature 0"));
    }

    #[test]
    fn multipart_geometry_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("multi.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","geometry":{"type":"Point","coordinates":[0,1]},"properties":{}},
              {"type":"Feature","geometry":{"type":"MultiPoint","coordinates":[[0,1]]},"properties":{}}]}"#,
        )
        .unwrap();
        match load_geojson(&p, &name_mapping()) {
            Err(IngestError::UnsupportedGeometry { index, kind, .. }) => {
                assert_eq!((index, kind.as_str()), (1, "MultiPoint"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_documents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.geojson");
        fs::write(&p, "{not json").unwrap();
        assert!(matches!(
            load_geojson(&p, &name_mapping()),
            Err(IngestError::Malformed { .. })
        ));
        fs::write(&p, r#"{"type":"Feature"}"#).unwrap();
        assert!(matches!(
            load_geojson(&p, &name_mapping()),
            Err(IngestError::Malformed { .. })
        ));
        assert!(matches!(
            load_geojson(&dir.path().join("missing.geojson"), &name_mapping()),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn line_and_polygon_features() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("shapes.geojson");
        fs::write(
            &p,
            r#"{"type":"FeatureCollection","features":[
              {"type":"Feature","id":"l1","geometry":{"type":"LineString","coordinates":[[0,0],[1,0]]},"properties":{"name":"road"}},
              {"type":"Feature","id":"p1","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]},"properties":{"name":"park"}},
              {"type":"Feature","id":"p2","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]],[[0.1,0.1],[0.2,0.1],[0.2,0.2],[0.1,0.1]]]},"properties":{"name":"holey"}}]}"#,
        )
        .unwrap();
        let m = SchemaMapping::new("id", vec![FieldMap::identity("name")]);
        let d = load_geojson(&p, &m).unwrap();
        let ids: Vec<_> = d.objects.iter().map(|o| o.id.as_str()).collect();
        assert_eq!(ids, ["l1", "p1"]);
        assert_eq!(d.ingest_warnings.len(), 1);
    }

    #[test]
    fn csv_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        fs::write(&p, "name,lon,lat\n").unwrap();
        assert!(load_csv(&p, &name_mapping()).unwrap().objects.is_empty());
    }

    #[test]
    fn csv_auto_ids_and_quoting() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(
            &p,
            "name,lon,lat\n\"Cafe, One\",-114.06,51.05\nBeta,-114.07,51.04\n\"Say \"\"Hi\"\"\",-114.08,51.03\n",
        )
        .unwrap();
        let d = load_csv(&p, &name_mapping()).unwrap();
        let ids: Vec<_> = d.objects.iter().map(|o| o.id.as_str()).collect();
        assert_eq!(ids, ["0", "1", "2"]);
        assert_eq!(d.objects[0].field("name"), Some("Cafe, One"));
        assert_eq!(d.objects[2].field("name"), Some("Say \"Hi\""));
    }

    #[test]
    fn csv_bad_coordinate_row_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "name,lon,lat\nA,1,abc\nB,1,2\n").unwrap();
        let d = load_csv(&p, &name_mapping()).unwrap();
        assert_eq!(d.objects.len(), 1);
        assert_eq!(d.ingest_warnings.len(), 1);
    }

    #[test]
    fn csv_missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "title,lon,lat\nA,1,2\n").unwrap();
        match load_csv(&p, &name_mapping()) {
            Err(IngestError::MissingColumn { column, .. }) => assert_eq!(column, "name"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_warn() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "id,name,lon,lat\nx,A,1,2\nx,B,1,2\n").unwrap();
        let m = SchemaMapping::new("id", vec![FieldMap::identity("name")]);
        let d = load_csv(&p, &m).unwrap();
        assert_eq!(d.objects.len(), 1);
        assert_eq!(d.objects[0].field("name"), Some("A"));
        assert_eq!(d.ingest_warnings.len(), 1);
    }
}
