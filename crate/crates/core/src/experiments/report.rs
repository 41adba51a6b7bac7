//! Report container and its canonical serialization.
//!
//! Canonical JSON has sorted object keys, no insignificant whitespace
//! beyond a newline per top-level key, and every floating-point number
//! written with 17 significant digits. Non-finite values are the strings
//! `"+inf"`, `"-inf"` and `"nan"`.

use super::ExperimentError;
use crate::store::{EmbeddingStore, StoreError};
use serde::{Serialize, Serializer};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// A float that may be non-finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            s.serialize_str("nan")
        } else if v == f64::INFINITY {
            s.serialize_str("+inf")
        } else if v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(v)
        }
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(Real),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(Real(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(Real(v)) => f.write_str(&format_float(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// A table of figure data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl FigureSeries {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoreInfo {
    pub role: String,
    pub path: Option<String>,
    /// Tensor CRC-64, hex.
    pub checksum: String,
    pub condition: String,
    pub n_concepts: usize,
    pub n_languages: usize,
    pub layers: Vec<u32>,
    pub dim: usize,
}

impl StoreInfo {
    pub fn of(role: &str, store: &EmbeddingStore) -> Self {
        Self {
            role: role.to_string(),
            path: None,
            checksum: format!("{:016x}", store.tensor_checksum()),
            condition: store.condition().to_string(),
            n_concepts: store.n_concepts(),
            n_languages: store.n_languages(),
            layers: store.layers().to_vec(),
            dim: store.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Provenance {
    pub stores: Vec<StoreInfo>,
    /// Resource name to path.
    pub resources: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport<R> {
    pub experiment: String,
    pub config: Value,
    pub results: R,
    pub figure_data: BTreeMap<String, FigureSeries>,
    pub provenance: Provenance,
}

impl<R: Serialize> ExperimentReport<R> {
    pub(crate) fn new(
        experiment: &str,
        config: serde_json::Map<String, Value>,
        results: R,
        stores: Vec<StoreInfo>,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            config: Value::Object(config),
            results,
            figure_data: BTreeMap::new(),
            provenance: Provenance {
                stores,
                resources: BTreeMap::new(),
            },
        }
    }

    pub(crate) fn figure(mut self, name: &str, series: FigureSeries) -> Self {
        self.figure_data.insert(name.to_string(), series);
        self
    }

    /// Records a store's on-disk path in the provenance block.
    pub fn set_store_path(&mut self, role: &str, path: &str) {
        for s in &mut self.provenance.stores {
            if s.role == role {
                s.path = Some(path.to_string());
            }
        }
    }

    pub fn add_resource(&mut self, name: &str, path: &str) {
        self.provenance
            .resources
            .insert(name.to_string(), path.to_string());
    }

    /// Byte-stable JSON.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        to_canonical_json(&value)
    }

    /// Type-erased copy, for collections of heterogeneous reports.
    pub fn erase(&self) -> ExperimentReport<Value> {
        ExperimentReport {
            experiment: self.experiment.clone(),
            config: self.config.clone(),
            results: serde_json::to_value(&self.results).expect("results serialize"),
            figure_data: self.figure_data.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Writes `<name>.json` and one `<name>_<series>.csv` per figure series.
    pub fn write(&self, dir: &Path, name: &str) -> Result<Vec<std::path::PathBuf>, ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{name}.json"));
        std::fs::write(&json_path, self.to_canonical_json()).map_err(io(&json_path))?;
        written.push(json_path);
        for (series, data) in &self.figure_data {
            let path = dir.join(format!("{name}_{series}.csv"));
            std::fs::write(&path, data.to_csv()).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest text for integers stored as floats is avoided on purpose: every
/// float gets the same 17-significant-digit form.
fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "+inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        // fold -0.0 so sign of zero never leaks into output
        "0.0000000000000000e0".into()
    } else {
        format!("{v:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").expect("string write");
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").expect("string write");
            } else {
                out.push_str(&format_float(n.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item, indent + 1);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if indent == 0 {
                    out.push('\n');
                }
                out.push_str(&serde_json::to_string(k).expect("string escapes"));
                out.push(':');
                write_value(out, &map[*k], indent + 1);
            }
            if indent == 0 {
                out.push('\n');
            }
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value.
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_form() {
        let v = json!({"b": 1, "a": [0.1, -2.5, 3], "c": {"z": null, "y": "q\"x"}});
        let s = to_canonical_json(&v);
        assert_eq!(
            s,
            "{\n\"a\":[1.0000000000000001e-1,-2.5000000000000000e0,3],\n\"b\":1,\n\"c\":{\"y\":\"q\\\"x\",\"z\":null}\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_reals() {
        let v = serde_json::to_value([Real(f64::INFINITY), Real(f64::NAN), Real(1.5)]).unwrap();
        assert_eq!(to_canonical_json(&v), "[\"+inf\",\"nan\",1.5000000000000000e0]\n");
    }

    #[test]
    fn csv_export() {
        let mut s = FigureSeries::new(&["gloss", "score"]);
        s.push(vec!["water".into(), 0.5.into()]);
        assert_eq!(s.to_csv(), "gloss,score\nwater,5.0000000000000000e-1\n");
    }
}
