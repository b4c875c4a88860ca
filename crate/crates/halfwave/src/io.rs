//! Run-configuration text files, a small binary field format, and
//! report emission.
//!
//! Config files are `key = value` lines with `#` comments; the schema
//! owns the key list and the value kinds, so typos die at parse time
//! with a line number and the nearest known key. Fields persist in the
//! `HWF1` container (bit-exact round trip). Reports land as a
//! `report.json` whose bytes depend only on the measured content —
//! wall-clock metadata goes to a `meta.json` sidecar — plus a
//! `series.csv` with one row per sweep point.

use crate::experiments::ExperimentReport;
use crate::grid::{Field, GridSpec, Space};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    FloatList,
    Bool,
    Text,
}

/// The keys one command accepts, with their value kinds.
#[derive(Debug, Clone)]
pub struct ConfigSchema {
    entries: Vec<(String, Kind)>,
}

impl ConfigSchema {
    pub fn new(entries: &[(&str, Kind)]) -> ConfigSchema {
        ConfigSchema {
            entries: entries.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn kind_of(&self, key: &str) -> Option<Kind> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Closest known key within edit distance 3, for typo messages.
    fn suggest(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .map(|(k, _)| (k, edit_distance(k, key)))
            .filter(|&(_, d)| d <= 3)
            .min_by_key(|&(_, d)| d)
            .map(|(k, _)| k.as_str())
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    FloatList(Vec<f64>),
    Bool(bool),
    Text(String),
}

/// Parsed configuration: a typed map. Getters return `None` when the
/// key is absent, so callers supply their own defaults.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub values: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn int(&self, key: &str) -> Option<i64> {
        match self.values.get(key) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn float_list(&self, key: &str) -> Option<Vec<f64>> {
        match self.values.get(key) {
            Some(Value::FloatList(v)) => Some(v.clone()),
            _ => None,
        }
    }

    pub fn bool(&self, key: &str) -> Option<bool> {
        match self.values.get(key) {
            Some(Value::Bool(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(v)) => Some(v.as_str()),
            _ => None,
        }
    }
}

fn config_err(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

pub fn parse_config(text: &str, schema: &ConfigSchema) -> Result<RunConfig> {
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        let val = val.trim();
        let kind = schema.kind_of(key).ok_or_else(|| {
            let hint = match schema.suggest(key) {
                Some(s) => format!("; did you mean `{s}`?"),
                None => String::new(),
            };
            config_err(line, format!("unknown key `{key}`{hint}"))
        })?;
        if values.contains_key(key) {
            return Err(config_err(line, format!("duplicate key `{key}`")));
        }
        let parsed = match kind {
            Kind::Int => Value::Int(val.parse::<i64>().map_err(|_| {
                config_err(line, format!("value for `{key}` is not an integer: {val:?}"))
            })?),
            Kind::Float => Value::Float(parse_float(val).ok_or_else(|| {
                config_err(line, format!("value for `{key}` is not a number: {val:?}"))
            })?),
            Kind::FloatList => {
                let mut list = Vec::new();
                for (i, item) in val.split(',').enumerate() {
                    list.push(parse_float(item.trim()).ok_or_else(|| {
                        config_err(
                            line,
                            format!("entry {} of `{key}` is not a number: {:?}", i + 1, item.trim()),
                        )
                    })?);
                }
                Value::FloatList(list)
            }
            Kind::Bool => match val {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => {
                    return Err(config_err(
                        line,
                        format!("value for `{key}` must be `true` or `false`, got {val:?}"),
                    ))
                }
            },
            Kind::Text => Value::Text(val.to_string()),
        };
        values.insert(key.to_string(), parsed);
    }
    Ok(RunConfig { values })
}

fn parse_float(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

const MAGIC: &[u8; 4] = b"HWF1";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4 + 8 + 1;

/// Serialize a field: magic, version, `d`, `n`, box length, space tag,
/// then `n^d` little-endian `(re, im)` doubles in flat site order.
pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    let grid = f.grid();
    let mut bytes = Vec::with_capacity(HEADER_LEN + 16 * grid.sites());
    bytes.extend_from_slice(MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    bytes.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    bytes.extend_from_slice(&grid.length().to_le_bytes());
    bytes.push(match f.space() {
        Space::Physical => 0,
        Space::Spectral => 1,
    });
    for z in f.values() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("not an HWF1 file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("header cut short".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!(
            "unsupported version {} (this build reads version {VERSION})",
            bytes[4]
        )));
    }
    let d = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(bytes[13..21].try_into().unwrap());
    let space = match bytes[21] {
        0 => Space::Physical,
        1 => Space::Spectral,
        other => return Err(Error::Format(format!("unknown space tag {other}"))),
    };
    let grid = GridSpec::new(d, n, length)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = grid.sites();
    let found = payload.len() / 16;
    if payload.len() != 16 * expected {
        if payload.len() < 16 * expected {
            return Err(Error::Format(format!(
                "truncated payload: expected {expected} values, found {found}"
            )));
        }
        return Err(Error::Format(format!(
            "trailing data after the payload: expected {expected} values, found more"
        )));
    }
    let mut values = Vec::with_capacity(expected);
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    Field::new(grid, space, values)
}

/// Write `report.json` and `series.csv` into `out_dir` (created if
/// missing) and return their paths. The JSON's bytes are a pure
/// function of the measured content: keys are sorted, and volatile
/// run metadata (wall-clock seconds, thread count) is diverted to a
/// `meta.json` sidecar. An empty series is refused — a report with no
/// data points certifies nothing.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if report.series.is_empty() {
        return Err(Error::Domain(format!(
            "report {:?} has no data points; refusing to emit it",
            report.name
        )));
    }
    fs::create_dir_all(out_dir)?;

    let mut tree = match serde_json::to_value(report) {
        Ok(serde_json::Value::Object(map)) => map,
        _ => return Err(Error::Format("report did not serialize to an object".into())),
    };
    let meta = tree.remove("meta").unwrap_or(serde_json::Value::Null);
    if let Some(notes) = meta.get("notes") {
        tree.insert("notes".to_string(), notes.clone());
    }
    let report_path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(&serde_json::Value::Object(tree))
        .map_err(|e| Error::Format(format!("report serialization failed: {e}")))?;
    json.push('\n');
    fs::write(&report_path, json)?;

    let mut meta_obj = serde_json::Map::new();
    meta_obj.insert("runtime_seconds".into(), meta.get("runtime_seconds").cloned().unwrap_or(0.into()));
    meta_obj.insert("threads".into(), meta.get("threads").cloned().unwrap_or(0.into()));
    let mut meta_json = serde_json::to_string_pretty(&serde_json::Value::Object(meta_obj))
        .map_err(|e| Error::Format(format!("metadata serialization failed: {e}")))?;
    meta_json.push('\n');
    fs::write(out_dir.join("meta.json"), meta_json)?;

    let csv_path = out_dir.join("series.csv");
    let mut csv = report.series.columns.join(",");
    csv.push('\n');
    for row in &report.series.rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    fs::write(&csv_path, csv)?;
    Ok((report_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize, Recipe};

    fn schema() -> ConfigSchema {
        ConfigSchema::new(&[
            ("nu", Kind::Float),
            ("d", Kind::Int),
            ("delta_list", Kind::FloatList),
            ("weighted", Kind::Bool),
            ("data", Kind::Text),
        ])
    }

    #[test]
    fn typed_lines_parse() {
        let cfg = parse_config(
            "# header comment\nnu = 5\nd = 1  # trailing comment\ndelta_list = 1e-1, 1e-2, 1e-3\nweighted = true\ndata = gaussian\n",
            &schema(),
        )
        .unwrap();
        assert_eq!(cfg.float("nu"), Some(5.0));
        assert_eq!(cfg.int("d"), Some(1));
        assert_eq!(cfg.float_list("delta_list"), Some(vec![1e-1, 1e-2, 1e-3]));
        assert_eq!(cfg.bool("weighted"), Some(true));
        assert_eq!(cfg.text("data"), Some("gaussian"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("nu = banana", &schema()).unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("not a number"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
        let err = parse_config("nu = 5\nnu = 6", &schema()).unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("duplicate key `nu`"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
        let err = parse_config("delta_lst = 1e-1", &schema()).unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("did you mean `delta_list`?"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn integers_reject_fractions_and_floats_reject_nan() {
        assert!(parse_config("d = 1.5", &schema()).is_err());
        assert!(parse_config("nu = nan", &schema()).is_err());
        assert!(parse_config("delta_list = 1e-1, oops", &schema()).is_err());
        assert!(parse_config("weighted = maybe", &schema()).is_err());
        assert!(parse_config("just some words", &schema()).is_err());
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let grid = GridSpec::new(2, 8, 20.0).unwrap();
        let f = synthesize(grid, Recipe::Gaussian { sigma: 0.7, amplitude: 1.25, center: [0.3, -0.4, 0.0] })
            .unwrap();
        let dir = std::env::temp_dir().join("hwf1_roundtrip_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.hwf1");
        write_field(&path, &f).unwrap();
        let g = read_field(&path).unwrap();
        assert_eq!(f.grid(), g.grid());
        assert_eq!(f.space(), g.space());
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
        }
    }

    #[test]
    fn malformed_field_files_are_diagnosed() {
        let grid = GridSpec::new(1, 16, 16.0).unwrap();
        let f = synthesize(grid, Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] })
            .unwrap();
        let dir = std::env::temp_dir().join("hwf1_malformed_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.hwf1");
        write_field(&path, &f).unwrap();
        let good = fs::read(&path).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        fs::write(&path, &bad_magic).unwrap();
        match read_field(&path) {
            Err(Error::Format(msg)) => assert_eq!(msg, "not an HWF1 file"),
            other => panic!("wrong outcome: {other:?}"),
        }

        let truncated = &good[..good.len() - 16];
        fs::write(&path, truncated).unwrap();
        match read_field(&path) {
            Err(Error::Format(msg)) => {
                assert!(msg.contains("expected 16 values, found 15"), "{msg}")
            }
            other => panic!("wrong outcome: {other:?}"),
        }

        let mut trailing = good.clone();
        trailing.extend_from_slice(&[0u8; 16]);
        fs::write(&path, &trailing).unwrap();
        match read_field(&path) {
            Err(Error::Format(msg)) => assert!(msg.contains("trailing data"), "{msg}"),
            other => panic!("wrong outcome: {other:?}"),
        }

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        fs::write(&path, &bad_version).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
    }
}
