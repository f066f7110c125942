//! Versioned JSON artifacts and `x,value` CSV tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA: &str = "feasidist/v1";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
    move |source| Error::Json { path: path.display().to_string(), source }
}

/// Parses a JSON document, checking its `schema` tag when present.
pub fn from_json_str<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    let mut value: Value = serde_json::from_str(text).map_err(json_err(origin))?;
    if let Value::Object(map) = &mut value {
        if let Some(tag) = map.remove("schema") {
            if tag.as_str() != Some(SCHEMA) {
                return Err(Error::Schema { expected: SCHEMA.into(), found: tag.to_string() });
            }
        }
    }
    serde_json::from_value(value).map_err(json_err(origin))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    from_json_str(&text, path)
}

/// `value` as a JSON object with `"schema"` first.
pub fn to_versioned<T: Serialize>(value: &T) -> Result<Value> {
    let body = serde_json::to_value(value).map_err(json_err(Path::new("<memory>")))?;
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match body {
        Value::Object(map) => out.extend(map),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(Value::Object(out))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let doc = to_versioned(value)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(json_err(path))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes rows under the header `columns` (omitted with `header = false`).
pub fn write_csv<R: Serialize>(
    path: &Path,
    columns: &[&str],
    rows: impl IntoIterator<Item = R>,
    header: bool,
) -> Result<()> {
    let csv_err =
        |e: csv::Error| Error::Io { path: path.display().to_string(), source: std::io::Error::other(e.to_string()) };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    if header {
        w.write_record(columns).map_err(csv_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads an `x,value` table written by [`write_csv`].
pub fn read_xy_csv(path: &Path, header: bool) -> Result<Vec<(f64, f64)>> {
    let csv_err =
        |e: csv::Error| Error::Io { path: path.display().to_string(), source: std::io::Error::other(e.to_string()) };
    let mut r = csv::ReaderBuilder::new().has_headers(header).from_path(path).map_err(csv_err)?;
    r.deserialize::<(f64, f64)>().map(|row| row.map_err(csv_err)).collect()
}

/// Parses `a:b:count` into `count >= 2` evenly spaced points from `a` to `b`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("grid '{spec}' is not a:b:count with count >= 2 and a < b"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n < 2 || !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::FiniteTarget;

    #[test]
    fn schema_tag_is_checked() {
        let ok = r#"{"schema":"feasidist/v1","atoms":[[0.0,0.5],[1.0,0.5]]}"#;
        let t: FiniteTarget<f64> = from_json_str(ok, Path::new("t.json")).unwrap();
        assert_eq!(t.k(), 1);
        let untagged = r#"{"atoms":[[0.0,1.0]]}"#;
        assert!(from_json_str::<FiniteTarget<f64>>(untagged, Path::new("t.json")).is_ok());
        let wrong = r#"{"schema":"feasidist/v0","atoms":[[0.0,1.0]]}"#;
        assert!(matches!(from_json_str::<FiniteTarget<f64>>(wrong, Path::new("t.json")), Err(Error::Schema { .. })));
    }

    #[test]
    fn versioned_puts_schema_first() {
        let t = FiniteTarget::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let s = serde_json::to_string(&to_versioned(&t).unwrap()).unwrap();
        assert!(s.starts_with(r#"{"schema":"feasidist/v1","atoms":"#), "{s}");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![(0.0, 1.5), (0.25, 1e-300), (1.0, 0.1 + 0.2)];
        for header in [true, false] {
            let p = dir.path().join(format!("t{header}.csv"));
            write_csv(&p, &["x", "value"], rows.iter().copied(), header).unwrap();
            assert_eq!(read_xy_csv(&p, header).unwrap(), rows);
            let text = std::fs::read_to_string(&p).unwrap();
            assert_eq!(text.starts_with("x,value\n"), header);
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:1:1").is_err());
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}
