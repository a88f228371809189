//! Dataset directories: `manifest.json` plus a long-format `series.csv` with
//! one row per series and time step.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MultivariateSeries, Split};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

const FIXED_COLUMNS: [&str; 4] = ["series_id", "group_id", "label", "t"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub id: String,
    pub channels: Vec<String>,
    pub classes: Vec<String>,
    /// Series id to split; absent when no split has been fixed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<BTreeMap<String, Split>>,
}

impl Manifest {
    pub fn of(dataset: &Dataset) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            id: dataset.id.clone(),
            channels: dataset.channel_names(),
            classes: dataset.classes.clone(),
            split: dataset.norm.as_ref().map(|_| {
                dataset
                    .series
                    .iter()
                    .zip(&dataset.split)
                    .map(|(s, t)| (s.id.clone(), *t))
                    .collect()
            }),
        }
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&path, format!("malformed manifest: {e}")))?;
    if m.format_version != MANIFEST_FORMAT_VERSION {
        return Err(Error::format(
            &path,
            format!("unsupported format version {}", m.format_version),
        ));
    }
    if m.channels.is_empty() {
        return Err(Error::format(&path, "manifest lists no channels"));
    }
    Ok(m)
}

struct Building {
    group: String,
    label: String,
    rows: BTreeMap<usize, Vec<f64>>,
}

/// Reads a dataset directory. Series keep the order in which they first
/// appear in the table and classes are sorted lexicographically; a split in
/// the manifest is applied and fits the normalization.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = read_manifest(dir)?;
    let path = dir.join(SERIES_FILE);
    let fmt = |msg: String| Error::format(&path, msg);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .map_err(|e| Error::Csv {
            path: path.clone(),
            source: e,
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.clone(),
            source: e,
        })?
        .clone();
    let d = manifest.channels.len();
    for (k, name) in FIXED_COLUMNS.iter().enumerate() {
        if headers.get(k) != Some(name) {
            return Err(fmt(format!("missing column {name:?} at position {k}")));
        }
    }
    let n_value_cols = headers.len() - FIXED_COLUMNS.len();
    if n_value_cols != d {
        return Err(fmt(format!(
            "inconsistent channel count: manifest has {d} channels, table has {n_value_cols} value columns"
        )));
    }
    for c in 0..d {
        let want = format!("ch_{c}");
        if headers.get(FIXED_COLUMNS.len() + c) != Some(want.as_str()) {
            return Err(fmt(format!("missing column {want:?}")));
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut building: HashMap<String, Building> = HashMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.clone(),
            source: e,
        })?;
        let row = line + 2;
        if record.len() != headers.len() {
            return Err(fmt(format!(
                "row {row} has {} fields, expected {}",
                record.len(),
                headers.len()
            )));
        }
        let id = &record[0];
        let t: usize = record[3].parse().map_err(|_| {
            fmt(format!(
                "row {row}: time index {:?} is not a non-negative integer",
                &record[3]
            ))
        })?;
        let mut values = Vec::with_capacity(d);
        for c in 0..d {
            let raw = &record[FIXED_COLUMNS.len() + c];
            let v: f64 = raw
                .parse()
                .map_err(|_| fmt(format!("row {row}: value {raw:?} in ch_{c} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    series_id: id.to_string(),
                    t,
                });
            }
            values.push(v);
        }
        let entry = building.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Building {
                group: record[1].to_string(),
                label: record[2].to_string(),
                rows: BTreeMap::new(),
            }
        });
        if entry.group != record[1] || entry.label != record[2] {
            return Err(fmt(format!("series {id:?} changes group or label at row {row}")));
        }
        if !manifest.classes.iter().any(|c| c == &record[2]) {
            return Err(Error::format(
                &path,
                format!("series {id:?} has unknown label {:?}", &record[2]),
            ));
        }
        if entry.rows.insert(t, values).is_some() {
            return Err(fmt(format!("duplicate (series_id, t) = ({id:?}, {t})")));
        }
    }

    let mut series = Vec::with_capacity(order.len());
    for id in order {
        let b = building.remove(&id).expect("every ordered id was inserted");
        let len = b.rows.len();
        if b.rows.keys().next_back() != Some(&(len - 1)) {
            return Err(fmt(format!("series {id:?} has gaps in t (expected 0..{len})")));
        }
        let mut values = vec![Vec::with_capacity(len); d];
        for row in b.rows.into_values() {
            for (c, v) in row.into_iter().enumerate() {
                values[c].push(v);
            }
        }
        series.push(MultivariateSeries::new(id, b.group, b.label, values)?);
    }

    let mut classes = manifest.classes;
    classes.sort();
    let ds = Dataset::with_classes(manifest.id, manifest.channels, classes, series)?;
    match manifest.split {
        None => Ok(ds),
        Some(map) => {
            let mpath = dir.join(MANIFEST_FILE);
            if map.len() != ds.series.len() {
                return Err(Error::format(
                    &mpath,
                    format!("split lists {} series, table has {}", map.len(), ds.series.len()),
                ));
            }
            let split = ds
                .series
                .iter()
                .map(|s| {
                    map.get(&s.id)
                        .copied()
                        .ok_or_else(|| Error::format(&mpath, format!("split is missing series {:?}", s.id)))
                })
                .collect::<Result<Vec<_>>>()?;
            ds.with_split(split)
        }
    }
}

/// Writes a dataset directory; rows are sorted by `(series_id, t)`.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mpath = dir.join(MANIFEST_FILE);
    let manifest = serde_json::to_string_pretty(&Manifest::of(dataset)).expect("manifest serializes");
    fs::write(&mpath, manifest + "\n").map_err(|e| Error::io(&mpath, e))?;

    let path = dir.join(SERIES_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Csv {
        path: path.clone(),
        source: e,
    })?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.clone(),
        source: e,
    };
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..dataset.n_channels()).map(|c| format!("ch_{c}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut sorted: Vec<&MultivariateSeries> = dataset.series.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for s in sorted {
        for t in 0..s.len() {
            rec.clear();
            rec.push(s.id.clone());
            rec.push(s.group.clone());
            rec.push(s.label.clone());
            rec.push(t.to_string());
            rec.extend(s.values.iter().map(|ch| ch[t].to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
