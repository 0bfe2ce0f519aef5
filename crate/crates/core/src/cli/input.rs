//! CSV ingestion and standardization.

use std::io::Read;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RegressionData;

/// Response column, covariate names and the raw values of a CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub covariates: Vec<String>,
    pub response: String,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

/// Reads a comma-separated table with a header row. `response` names the
/// response column; the last column is used when it is `None`.
pub fn read_table<R: Read>(reader: R, response: Option<&str>) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.len() < 2 {
        return Err(Error::Validation(
            "the table needs a response column and at least one covariate".into(),
        ));
    }
    let target = match response {
        None => headers.len() - 1,
        Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Validation(format!("response column {name:?} not found in header"))
        })?,
    };

    let mut cells: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (i, record) in rdr.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = i + 2;
        let record = record.map_err(|e| csv_error(e, row))?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: record.len().min(headers.len()) + 1,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                message: format!("{:?} in column {:?} is not a number", field, headers[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("non-finite value in column {:?}", headers[c]),
                });
            }
            cells.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Validation("the table has no data rows".into()));
    }
    let width = headers.len();
    let all = Array2::from_shape_vec((rows, width), cells).expect("row lengths checked");
    let keep: Vec<usize> = (0..width).filter(|&c| c != target).collect();
    Ok(Table {
        covariates: keep.iter().map(|&c| headers[c].clone()).collect(),
        response: headers[target].clone(),
        x: all.select(ndarray::Axis(1), &keep),
        y: all.column(target).to_owned(),
    })
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    let row = e.position().map_or(row, |p| p.line() as usize);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

/// Centering and scaling applied to the data before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    /// Variances divide by `n`.
    pub variance_convention: String,
    pub response_variance: f64,
    pub covariate_means: Vec<f64>,
    pub covariate_sds: Vec<f64>,
    pub response_mean: f64,
    pub response_sd: f64,
}

fn mean_sd(v: ndarray::ArrayView1<'_, f64>) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.sum() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Centers every column, scales covariates to unit variance and the response
/// to `response_variance`.
pub fn standardize(table: &mut Table, response_variance: f64) -> Result<Standardization> {
    if !(response_variance > 0.0 && response_variance.is_finite()) {
        return Err(Error::invalid(format!(
            "response variance must be positive, got {response_variance}"
        )));
    }
    let mut means = Vec::with_capacity(table.covariates.len());
    let mut sds = Vec::with_capacity(table.covariates.len());
    for (c, name) in table.covariates.iter().enumerate() {
        let (m, s) = mean_sd(table.x.column(c));
        if !(s > 1e-12 * m.abs().max(1.0)) {
            return Err(Error::Validation(format!(
                "covariate {name:?} is constant and cannot be standardized"
            )));
        }
        table.x.column_mut(c).mapv_inplace(|v| (v - m) / s);
        means.push(m);
        sds.push(s);
    }
    let (ym, ys) = mean_sd(table.y.view());
    if !(ys > 1e-12 * ym.abs().max(1.0)) {
        return Err(Error::Validation(format!(
            "response {:?} is constant and cannot be standardized",
            table.response
        )));
    }
    let scale = response_variance.sqrt() / ys;
    table.y.mapv_inplace(|v| (v - ym) * scale);
    Ok(Standardization {
        variance_convention: "population".into(),
        response_variance,
        covariate_means: means,
        covariate_sds: sds,
        response_mean: ym,
        response_sd: ys,
    })
}

pub fn log_transform_response(table: &mut Table) -> Result<()> {
    if let Some(i) = table.y.iter().position(|&v| v <= 0.0) {
        return Err(Error::Validation(format!(
            "log transform needs a positive response; row {} has {}",
            i + 2,
            table.y[i]
        )));
    }
    table.y.mapv_inplace(f64::ln);
    Ok(())
}

impl Table {
    pub fn into_data(self) -> Result<RegressionData> {
        RegressionData::new(self.x, self.y)
    }
}
