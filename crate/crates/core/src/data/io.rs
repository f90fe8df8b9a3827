//! Long-format CSV: `individual_id,time,<var1>,...,<varK>`, one row per visit,
//! empty cells for missing values. Metadata lives in a `<name>.meta.json` sidecar.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Individual, LongitudinalDataset, Meta};
use crate::error::{Error, Result};

pub fn load_csv(path: impl AsRef<Path>) -> Result<LongitudinalDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv(reader: impl Read) -> Result<LongitudinalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "individual_id" || &header[1] != "time" {
        return Err(Error::Data("header must be `individual_id,time,<var1>,...`".into()));
    }
    let names: Vec<String> = header.iter().skip(2).map(|s| s.trim().to_string()).collect();
    let k = names.len();

    struct Row {
        line: u64,
        time: f64,
        values: Vec<Option<f64>>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Row>> = HashMap::new();

    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 2, |p| p.line());
        if rec.len() != k + 2 {
            return Err(Error::Data(format!(
                "row {line}: expected {} fields, found {}",
                k + 2,
                rec.len()
            )));
        }
        let id = rec[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::Data(format!("row {line}: empty individual_id")));
        }
        let time =
            parse_cell(&rec[1], line, "time")?.ok_or_else(|| Error::Data(format!("row {line}: missing time")))?;
        let values = (0..k)
            .map(|v| parse_cell(&rec[v + 2], line, &names[v]))
            .collect::<Result<Vec<_>>>()?;
        let rows = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if let Some(prev) = rows.iter().find(|r| r.time == time) {
            return Err(Error::Data(format!(
                "row {line}: duplicate (individual `{id}`, time {time}), first seen on row {}",
                prev.line
            )));
        }
        rows.push(Row { line, time, values });
    }

    let mut individuals = Vec::with_capacity(order.len());
    for id in order {
        let mut rows = groups.remove(&id).expect("grouped id");
        rows.sort_by(|a, b| a.time.total_cmp(&b.time));
        let times = rows.iter().map(|r| r.time).collect();
        let mut values = Vec::with_capacity(rows.len() * k);
        let mut observed = Vec::with_capacity(rows.len() * k);
        for r in &rows {
            for cell in &r.values {
                values.push(cell.unwrap_or(f64::NAN));
                observed.push(cell.is_some());
            }
        }
        individuals.push(Individual::new(id, times, k, values, observed)?);
    }
    LongitudinalDataset::new(names, individuals)
}

fn parse_cell(raw: &str, line: u64, column: &str) -> Result<Option<f64>> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Some(x)),
        _ => Err(Error::Data(format!(
            "row {line}: column `{column}` has non-numeric value `{s}`"
        ))),
    }
}

pub fn save_csv(data: &LongitudinalDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(data, file)
}

/// Writes values with the shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &LongitudinalDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["individual_id".to_string(), "time".to_string()];
    header.extend(data.variable_names().iter().cloned());
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for ind in data.individuals() {
        for t in 0..ind.n_timepoints() {
            row.clear();
            row.push(ind.id().to_string());
            row.push(format!("{}", ind.times()[t]));
            for v in 0..ind.n_vars() {
                row.push(ind.value(t, v).map(|x| format!("{x}")).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// `data/run.csv` -> `data/run.meta.json`.
pub fn meta_path(csv_path: impl AsRef<Path>) -> PathBuf {
    let p = csv_path.as_ref();
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    p.with_file_name(format!("{stem}.meta.json"))
}

pub fn save_meta(meta: &Meta, csv_path: impl AsRef<Path>) -> Result<()> {
    let path = meta_path(csv_path);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Reads the sidecar if present; a missing sidecar yields empty metadata.
pub fn load_meta(csv_path: impl AsRef<Path>) -> Result<Meta> {
    let path = meta_path(csv_path);
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(serde_json::from_str(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Meta::new()),
        Err(e) => Err(Error::io(&path, e)),
    }
}
