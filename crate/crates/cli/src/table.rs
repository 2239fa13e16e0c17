//! CSV ingestion and emission.
//!
//! Input contract: a header row, the outcome in the first column, numeric
//! predictors after it, `.` as the decimal separator.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use sandwich_lab::{Dataset, Matrix, QqData};

use crate::error::{CliError, CliResult};

pub const INTERCEPT_NAME: &str = "(intercept)";

/// Parsed CSV contents before any modelling choices are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub source: String,
    pub outcome: String,
    pub predictors: Vec<String>,
    pub y: Vec<f64>,
    /// One vector per predictor column.
    pub columns: Vec<Vec<f64>>,
}

/// A dataset ready for fitting, with coefficient names in design order.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub coefficient_names: Vec<String>,
    pub intercept: bool,
    pub binary_name: Option<String>,
    pub source: String,
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    read_table_from(file, &path.display().to_string())
}

pub fn read_table_from<R: Read>(reader: R, source: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{source}: {e}")))?
        .clone();
    if headers.len() < 2 {
        return Err(CliError::Input(format!(
            "{source}: need an outcome column and at least one predictor column, found {} column(s)",
            headers.len()
        )));
    }
    let names: Vec<String> = headers.iter().map(str::to_owned).collect();
    let mut y = Vec::new();
    let mut columns = vec![Vec::new(); names.len() - 1];
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        let line = record.position().map_or(i as u64 + 2, |p| p.line());
        for (j, field) in record.iter().enumerate() {
            let value = field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                CliError::Input(format!(
                    "{source}: row {} (line {line}), column {} ({}): '{field}' is not a finite number",
                    i + 1,
                    j + 1,
                    names[j]
                ))
            })?;
            if j == 0 {
                y.push(value);
            } else {
                columns[j - 1].push(value);
            }
        }
    }
    if y.is_empty() {
        return Err(CliError::Input(format!("{source}: no data rows")));
    }
    Ok(Table {
        source: source.to_owned(),
        outcome: names[0].clone(),
        predictors: names[1..].to_vec(),
        y,
        columns,
    })
}

fn is_binary(col: &[f64]) -> bool {
    col.iter().all(|&v| v == 0.0 || v == 1.0) && col.contains(&0.0) && col.contains(&1.0)
}

impl Table {
    /// Resolves `--binary-col` as a predictor name, or failing that a
    /// zero-based predictor index. Without it, a single 0/1 predictor is
    /// picked up automatically.
    pub fn binary_predictor(&self, spec: Option<&str>) -> CliResult<Option<usize>> {
        let Some(spec) = spec else {
            let candidates: Vec<usize> = (0..self.columns.len())
                .filter(|&j| is_binary(&self.columns[j]))
                .collect();
            return Ok((candidates.len() == 1).then(|| candidates[0]));
        };
        let idx = match self.predictors.iter().position(|p| p == spec) {
            Some(i) => i,
            None => match spec.parse::<usize>() {
                Ok(i) if i < self.predictors.len() => i,
                _ => {
                    return Err(CliError::Input(format!(
                        "{}: no predictor column '{spec}' (columns: {})",
                        self.source,
                        self.predictors.join(", ")
                    )))
                }
            },
        };
        let col = &self.columns[idx];
        if let Some(row) = col.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(CliError::Input(format!(
                "{}: row {}, column {} ({}): binary column holds {}",
                self.source,
                row + 1,
                idx + 2,
                self.predictors[idx],
                col[row]
            )));
        }
        if !is_binary(col) {
            return Err(CliError::Input(format!(
                "{}: binary column {} must contain both 0 and 1",
                self.source, self.predictors[idx]
            )));
        }
        Ok(Some(idx))
    }

    pub fn to_dataset(&self, intercept: bool, binary: Option<&str>) -> CliResult<Loaded> {
        let binary_idx = self.binary_predictor(binary)?;
        let offset = usize::from(intercept);
        let mut cols = Vec::with_capacity(self.columns.len() + offset);
        let mut names = Vec::with_capacity(self.columns.len() + offset);
        if intercept {
            cols.push(vec![1.0; self.y.len()]);
            names.push(INTERCEPT_NAME.to_owned());
        }
        cols.extend(self.columns.iter().cloned());
        names.extend(self.predictors.iter().cloned());
        let dataset = Dataset::new(
            self.y.clone(),
            Matrix::from_columns(&cols),
            binary_idx.map(|j| j + offset),
        )
        .map_err(|e| with_source(&self.source, e))?;
        Ok(Loaded {
            dataset,
            coefficient_names: names,
            intercept,
            binary_name: binary_idx.map(|j| self.predictors[j].clone()),
            source: self.source.clone(),
        })
    }
}

fn with_source(source: &str, e: sandwich_lab::Error) -> CliError {
    match CliError::from(e) {
        CliError::Input(m) => CliError::Input(format!("{source}: {m}")),
        CliError::Estimation(m) => CliError::Estimation(format!("{source}: {m}")),
    }
}

/// Writes outcome and predictor columns with shortest round-trip float
/// formatting. Design columns `skip` (typically the intercept) are omitted.
pub fn write_dataset<W: Write>(
    w: W,
    outcome: &str,
    names: &[String],
    d: &Dataset,
    skip: &[usize],
) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let keep: Vec<usize> = (0..d.p()).filter(|j| !skip.contains(j)).collect();
    let mut header = vec![outcome.to_owned()];
    header.extend(keep.iter().map(|&j| names[j].clone()));
    wtr.write_record(&header).map_err(csv_err)?;
    for i in 0..d.n() {
        let mut row = vec![d.y()[i].to_string()];
        row.extend(keep.iter().map(|&j| d.x()[(i, j)].to_string()));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| CliError::io("writing CSV", e))
}

pub fn write_qq<W: Write>(w: W, qq: &QqData) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["theoretical", "sample"])
        .map_err(csv_err)?;
    for (t, s) in &qq.pairs {
        wtr.write_record([t.to_string(), s.to_string()])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| CliError::io("writing CSV", e))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(format!("writing CSV: {e}"))
}
