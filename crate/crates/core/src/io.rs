//! CSV ingestion of annual maxima and station covariates, and small writers.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::local::MIN_YEARS;
use crate::model::{Dataset, StationRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    /// Observation years per station, ascending, aligned with `annual_maxima`.
    pub years: Vec<Vec<i64>>,
    /// Stations dropped during loading, with the reason.
    pub warnings: Vec<String>,
}

fn column(headers: &csv::StringRecord, name: &str, file: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::data(format!("{file}: missing required column '{name}'"), Some(1)))
}

fn line_of(rec: &csv::StringRecord) -> Option<usize> {
    rec.position().map(|p| p.line() as usize)
}

fn parse_num<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str, file: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse::<T>().map_err(|_| {
        Error::data(format!("{file}: non-numeric {what} '{raw}'"), line_of(rec))
    })
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

/// Reads `station_id,year,value` rows into per-station series sorted by year.
pub fn read_maxima<R: Read>(r: R, file: &str) -> Result<BTreeMap<String, Vec<(i64, f64)>>> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let (ci, cy, cv) = (
        column(&headers, "station_id", file)?,
        column(&headers, "year", file)?,
        column(&headers, "value", file)?,
    );
    let mut out: BTreeMap<String, Vec<(i64, f64)>> = BTreeMap::new();
    let mut seen: HashMap<(String, i64), usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec).unwrap_or(0);
        let id = rec.get(ci).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::data(format!("{file}: empty station_id"), Some(line)));
        }
        let year: i64 = parse_num(&rec, cy, "year", file)?;
        let value: f64 = parse_num(&rec, cv, "value", file)?;
        if !value.is_finite() {
            return Err(Error::data(format!("{file}: non-finite value for station '{id}' year {year}"), Some(line)));
        }
        if let Some(first) = seen.insert((id.clone(), year), line) {
            return Err(Error::data(
                format!("{file}: duplicate entry for station '{id}' year {year} (first at line {first})"),
                Some(line),
            ));
        }
        out.entry(id).or_default().push((year, value));
    }
    for series in out.values_mut() {
        series.sort_by_key(|&(y, _)| y);
    }
    Ok(out)
}

/// Reads `station_id` plus one numeric column per covariate, in file order.
pub fn read_covariates<R: Read>(r: R, file: &str) -> Result<(Vec<String>, Vec<(String, Vec<f64>)>)> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    let ci = column(&headers, "station_id", file)?;
    let cols: Vec<usize> = (0..headers.len()).filter(|&i| i != ci).collect();
    if cols.is_empty() {
        return Err(Error::data(format!("{file}: no covariate columns"), Some(1)));
    }
    let names = cols.iter().map(|&i| headers[i].trim().to_string()).collect();
    let mut rows = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec).unwrap_or(0);
        let id = rec.get(ci).unwrap_or("").to_string();
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(Error::data(
                format!("{file}: station '{id}' listed twice (first at line {first})"),
                Some(line),
            ));
        }
        let vals = cols
            .iter()
            .map(|&i| parse_num::<f64>(&rec, i, &format!("covariate '{}'", &headers[i]), file))
            .collect::<Result<Vec<_>>>()?;
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::data(format!("{file}: non-finite covariate {v} for station '{id}'"), Some(line)));
        }
        rows.push((id, vals));
    }
    Ok((names, rows))
}

/// Joins maxima and covariates, drops stations shorter than `min_years` and
/// standardizes covariates over the remaining stations.
///
/// Stations in the maxima file without covariates are an error; stations in
/// the covariates file without maxima are dropped with a warning.
pub fn join_dataset(
    maxima: BTreeMap<String, Vec<(i64, f64)>>,
    covariate_names: Vec<String>,
    covariates: Vec<(String, Vec<f64>)>,
    min_years: usize,
    covariates_file: &str,
) -> Result<LoadedData> {
    let known: HashMap<&str, ()> = covariates.iter().map(|(id, _)| (id.as_str(), ())).collect();
    if let Some(id) = maxima.keys().find(|id| !known.contains_key(id.as_str())) {
        return Err(Error::data(
            format!("station '{id}' has annual maxima but no row in {covariates_file}"),
            None,
        ));
    }
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    let mut years = Vec::new();
    for (id, raw) in covariates {
        let Some(series) = maxima.get(&id) else {
            warnings.push(format!("station '{id}' has covariates but no annual maxima; skipped"));
            continue;
        };
        if series.len() < min_years {
            warnings.push(format!(
                "station '{id}' has {} years of data (< {min_years}); skipped",
                series.len()
            ));
            continue;
        }
        years.push(series.iter().map(|&(y, _)| y).collect());
        records.push(StationRecord {
            id,
            annual_maxima: series.iter().map(|&(_, v)| v).collect(),
            raw_covariates: raw,
        });
    }
    if records.len() < 2 {
        return Err(Error::data(
            format!("only {} usable station(s) after filtering; need at least 2", records.len()),
            None,
        ));
    }
    let dataset = Dataset::from_records(records, covariate_names)?;
    Ok(LoadedData {
        dataset,
        years,
        warnings,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::data(format!("cannot open {}: {e}", path.display()), None))
}

pub fn load_dataset(maxima_path: &Path, covariates_path: &Path, min_years: usize) -> Result<LoadedData> {
    let mf = maxima_path.display().to_string();
    let cf = covariates_path.display().to_string();
    let maxima = read_maxima(open(maxima_path)?, &mf)?;
    let (names, rows) = read_covariates(open(covariates_path)?, &cf)?;
    join_dataset(maxima, names, rows, min_years, &cf)
}

/// [`load_dataset`] with the default 20-year minimum.
pub fn load_dataset_default(maxima_path: &Path, covariates_path: &Path) -> Result<LoadedData> {
    load_dataset(maxima_path, covariates_path, MIN_YEARS)
}

pub fn write_maxima_csv(path: &Path, data: &Dataset, years: &[Vec<i64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["station_id", "year", "value"])?;
    for (st, ys) in data.stations.iter().zip(years) {
        for (y, v) in ys.iter().zip(&st.annual_maxima) {
            w.write_record([st.id.clone(), y.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_covariates_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["station_id".to_string()];
    header.extend(data.covariate_names.iter().cloned());
    w.write_record(&header)?;
    for st in &data.stations {
        let mut row = vec![st.id.clone()];
        row.extend(st.raw_covariates.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes serializable rows with a header derived from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
