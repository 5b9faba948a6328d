//! CSV input and output of survival samples.

use super::{CliError, CliResult, DataArgs};
use crate::survival::SurvivalSample;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

/// Which CSV columns hold which variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub time: String,
    pub status: String,
    pub arm: String,
    pub mediator: String,
    /// Used when present, otherwise ids are row numbers.
    pub id: String,
    pub covariates: Vec<String>,
    pub causes: Option<u32>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            time: "time".into(),
            status: "status".into(),
            arm: "arm".into(),
            mediator: "mediator".into(),
            id: "id".into(),
            covariates: Vec::new(),
            causes: None,
        }
    }
}

impl ColumnSpec {
    pub(crate) fn from_args(args: &DataArgs, covariates: Vec<String>) -> Self {
        Self {
            time: args.time_col.clone(),
            status: args.status_col.clone(),
            arm: args.arm_col.clone(),
            mediator: args.mediator_col.clone(),
            id: args.id_col.clone(),
            covariates,
            causes: args.causes,
        }
    }
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "na" | "NaN" | "nan" | "null" | "NULL" | ".")
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    line: u64,
}

impl Row<'_> {
    fn field(&self, index: usize, name: &str) -> CliResult<&str> {
        let raw = self.record.get(index).unwrap_or("");
        if is_missing(raw) {
            return Err(CliError::MalformedCsv(format!("missing value in column '{name}' on line {}", self.line)));
        }
        Ok(raw)
    }

    fn parse<T: std::str::FromStr>(&self, index: usize, name: &str, what: &str) -> CliResult<T> {
        let raw = self.field(index, name)?;
        raw.parse().map_err(|_| {
            CliError::MalformedCsv(format!("column '{name}' on line {}: '{raw}' is not {what}", self.line))
        })
    }
}

/// Reads a sample from CSV text. Missing values are an error, never imputed.
pub fn parse_sample_csv<R: Read>(reader: R, columns: &ColumnSpec) -> CliResult<SurvivalSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::MalformedCsv(e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CliError::Schema("input has no header row".into()));
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| CliError::Schema(format!("required column '{name}' not found in header")))
    };
    let time_ix = require(&columns.time)?;
    let status_ix = require(&columns.status)?;
    let arm_ix = require(&columns.arm)?;
    let mediator_ix = require(&columns.mediator)?;
    let id_ix = find(&columns.id);
    let cov_ix = columns
        .covariates
        .iter()
        .map(|c| require(c))
        .collect::<CliResult<Vec<_>>>()?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    let mut arm = Vec::new();
    let mut mediator = Vec::new();
    let mut ids = Vec::new();
    let mut covs = vec![Vec::new(); cov_ix.len()];
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(CliError::MalformedCsv(e.to_string())),
        }
        let row = Row {
            record: &record,
            line: record.position().map_or(0, |p| p.line()),
        };
        times.push(row.parse::<f64>(time_ix, &columns.time, "a number")?);
        status.push(row.parse::<u32>(status_ix, &columns.status, "a non-negative integer status code")?);
        let a: u8 = row.parse(arm_ix, &columns.arm, "an arm code")?;
        if a > 1 {
            return Err(CliError::Schema(format!(
                "column '{}' on line {} is {a}; arms must be coded 0 or 1",
                columns.arm, row.line
            )));
        }
        arm.push(a);
        mediator.push(row.parse::<f64>(mediator_ix, &columns.mediator, "a number")?);
        if let Some(ix) = id_ix {
            ids.push(row.parse::<u64>(ix, &columns.id, "a non-negative integer id")?);
        }
        for ((ix, name), col) in cov_ix.iter().zip(&columns.covariates).zip(covs.iter_mut()) {
            col.push(row.parse::<f64>(*ix, name, "a number")?);
        }
    }
    if times.is_empty() {
        return Err(CliError::Schema("input has a header but no data rows".into()));
    }
    if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
        return Err(CliError::Schema(format!("row {} has time {}; times must be finite and non-negative", i + 1, times[i])));
    }
    let mut sample = SurvivalSample::new(times, status, arm, mediator)?;
    if id_ix.is_some() {
        sample = sample.with_ids(ids)?;
    }
    if !columns.covariates.is_empty() {
        sample = sample.with_covariates(columns.covariates.clone(), covs)?;
    }
    if let Some(j) = columns.causes {
        sample = sample.with_num_causes(j)?;
    }
    Ok(sample)
}

pub fn read_sample_csv(path: &Path, columns: &ColumnSpec) -> CliResult<SurvivalSample> {
    let file = File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_sample_csv(std::io::BufReader::new(file), columns)
}

/// Writes `id,time,status,arm,mediator[,covariates...]`. Floats use the
/// shortest representation that parses back to the same value, so a
/// written sample reads back bit-for-bit.
pub fn write_sample<W: Write>(writer: W, sample: &SurvivalSample) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "time".into(), "status".into(), "arm".into(), "mediator".into()];
    header.extend(sample.covariate_names().iter().cloned());
    w.write_record(&header).map_err(csv_write_error)?;
    for i in 0..sample.len() {
        let mut rec = vec![
            sample.ids()[i].to_string(),
            sample.times()[i].to_string(),
            sample.status()[i].to_string(),
            sample.arm()[i].to_string(),
            sample.mediator()[i].to_string(),
        ];
        rec.extend(sample.covariates().iter().map(|c| c[i].to_string()));
        w.write_record(&rec).map_err(csv_write_error)?;
    }
    w.flush().map_err(|e| CliError::io("output", e))
}

pub fn write_sample_csv(path: &Path, sample: &SurvivalSample) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    write_sample(std::io::BufWriter::new(file), sample)
}

pub(crate) fn csv_write_error(e: csv::Error) -> CliError {
    CliError::io("output", std::io::Error::other(e.to_string()))
}
