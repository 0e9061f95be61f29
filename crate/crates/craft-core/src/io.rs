//! File formats: schema JSON, data CSV (header row of column names), result
//! JSON, and the mask CSV used for heatmap rendering. All writes go through
//! a write-temp-then-rename step so readers never observe partial files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CraftError, Result};
use crate::model::{ingest, Dataset, FeatureSlot, Schema};

fn io_err(path: &Path, source: std::io::Error) -> CraftError {
    CraftError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write atomically: to a temp file in the target directory, then rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| io_err(path, e))?;
    std::io::Write::write_all(&mut tmp, contents).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn read_schema(path: &Path) -> Result<Schema> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let schema: Schema = serde_json::from_str(&text).map_err(|e| CraftError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    schema.validate()?;
    Ok(schema)
}

pub fn write_schema(path: &Path, schema: &Schema) -> Result<()> {
    let mut text = serde_json::to_string_pretty(schema).expect("schema serializes");
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Read a headered CSV and check the header against the schema's column
/// names before ingesting.
pub fn load_dataset(data_path: &Path, schema_path: &Path) -> Result<Dataset> {
    let schema = read_schema(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(data_path)
        .map_err(|e| CraftError::Csv {
            path: data_path.display().to_string(),
            source: e,
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CraftError::Csv {
            path: data_path.display().to_string(),
            source: e,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let expected: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    if headers != expected {
        return Err(CraftError::SchemaInvalid(format!(
            "CSV header {headers:?} does not match schema columns {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CraftError::Csv {
            path: data_path.display().to_string(),
            source: e,
        })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    ingest(&schema, &rows)
}

/// Write a dataset back out as CSV + schema JSON. Numeric values use Rust's
/// shortest round-trip formatting, so emit followed by load reproduces the
/// dataset exactly. The schema is always written; an empty dataset is then
/// reported as an error.
pub fn emit(data: &Dataset, csv_path: &Path, schema_path: &Path) -> Result<()> {
    write_schema(schema_path, data.schema())?;
    if data.n() == 0 {
        return Err(CraftError::ConfigInvalid(format!(
            "refusing to write empty data file {}",
            csv_path.display()
        )));
    }
    let schema = data.schema();
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(schema.columns.iter().map(|c| c.name.as_str()))
            .map_err(|e| CraftError::Csv {
                path: csv_path.display().to_string(),
                source: e,
            })?;
        for r in 0..data.n() {
            let mut record = Vec::with_capacity(schema.columns.len());
            for col in &schema.columns {
                if Some(&col.name) == schema.label_column.as_ref() {
                    let code = data.labels().expect("label column implies labels")[r] as usize;
                    record.push(data.label_names()[code].clone());
                    continue;
                }
                let feat = data
                    .features()
                    .iter()
                    .find(|f| f.name == col.name)
                    .expect("schema column is a feature");
                match feat.slot {
                    FeatureSlot::Num(slot) => record.push(data.num_value(slot, r).to_string()),
                    FeatureSlot::Cat(slot) => {
                        let code = data.cat_value(slot, r) as usize;
                        let crate::model::ColumnKind::Categorical { categories } = &col.kind
                        else {
                            unreachable!()
                        };
                        record.push(categories[code].clone());
                    }
                }
            }
            w.write_record(&record).map_err(|e| CraftError::Csv {
                path: csv_path.display().to_string(),
                source: e,
            })?;
        }
        w.flush().map_err(|e| io_err(csv_path, e))?;
    }
    atomic_write(csv_path, &out)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultMetrics {
    pub purity: f64,
    pub nmi: f64,
}

/// The machine-readable output of a fit. Field order is fixed so identical
/// runs serialize byte-identically.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub k: usize,
    pub assignments: Vec<usize>,
    /// K x D, 1 = feature selected for the cluster.
    pub masks: Vec<Vec<u8>>,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub lambda_used: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ResultMetrics>,
    pub seed: u64,
}

pub fn write_result(path: &Path, result: &RunResult) -> Result<()> {
    let mut text = serde_json::to_string_pretty(result).expect("result serializes");
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// K x D matrix of 0/1 with feature names as the header.
pub fn write_masks_csv(path: &Path, feature_names: &[String], masks: &[Vec<u8>]) -> Result<()> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(feature_names).map_err(|e| CraftError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        for mask in masks {
            w.write_record(mask.iter().map(|b| b.to_string()))
                .map_err(|e| CraftError::Csv {
                    path: path.display().to_string(),
                    source: e,
                })?;
        }
        w.flush().map_err(|e| io_err(path, e))?;
    }
    atomic_write(path, &out)
}
