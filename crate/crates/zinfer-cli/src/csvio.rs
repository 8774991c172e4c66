//! CSV ingestion: header-addressed columns, integer response, implicit
//! intercept, and the outlier-dropping filter.

use nalgebra::DMatrix;
use zinfer::Dataset;

/// Input-layer errors; all reported on stderr with exit code 1.
#[derive(Debug)]
pub enum InputError {
    Io(String),
    MissingColumn(String),
    BadResponse {
        row: usize,
        value: String,
    },
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    Invalid(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Io(e) => write!(f, "{e}"),
            InputError::MissingColumn(name) => {
                write!(f, "column '{name}' not found in the CSV header")
            }
            InputError::BadResponse { row, value } => {
                write!(
                    f,
                    "row {row}: response value '{value}' is not a non-negative integer"
                )
            }
            InputError::BadNumber { row, column, value } => {
                write!(f, "row {row}, column '{column}': '{value}' is not a number")
            }
            InputError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

/// A parsed CSV: response counts and named covariate columns.
#[derive(Debug)]
pub struct Table {
    pub y: Vec<u64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

pub fn read_table(
    path: &str,
    response: &str,
    covariates: &[String],
    drop_response_above: Option<u64>,
) -> Result<Table, InputError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError::Io(format!("cannot read '{path}': {e}")))?;
    let headers = rdr
        .headers()
        .map_err(|e| InputError::Io(format!("cannot read header of '{path}': {e}")))?
        .clone();
    let find = |name: &str| -> Result<usize, InputError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| InputError::MissingColumn(name.to_string()))
    };
    let y_idx = find(response)?;
    let mut cov_idx = Vec::new();
    for name in covariates {
        cov_idx.push((name.clone(), find(name)?));
    }

    let mut y = Vec::new();
    let mut columns: Vec<(String, Vec<f64>)> = cov_idx
        .iter()
        .map(|(name, _)| (name.clone(), Vec::new()))
        .collect();
    for (row_no, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| InputError::Io(format!("row {}: {e}", row_no + 2)))?;
        let raw = record.get(y_idx).unwrap_or("");
        let value: u64 = raw.parse().map_err(|_| InputError::BadResponse {
            row: row_no + 2,
            value: raw.to_string(),
        })?;
        if let Some(cap) = drop_response_above {
            if value > cap {
                continue;
            }
        }
        y.push(value);
        for (k, (name, idx)) in cov_idx.iter().enumerate() {
            let raw = record.get(*idx).unwrap_or("");
            let x: f64 = raw.parse().map_err(|_| InputError::BadNumber {
                row: row_no + 2,
                column: name.clone(),
                value: raw.to_string(),
            })?;
            columns[k].1.push(x);
        }
    }
    Ok(Table { y, columns })
}

/// Assemble a design matrix from named columns, adding an implicit intercept
/// unless disabled. The pseudo-column name `intercept` always maps to the
/// constant column.
fn design(
    n: usize,
    requested: &[String],
    table: &Table,
    add_intercept: bool,
) -> Result<(DMatrix<f64>, Vec<String>), InputError> {
    let mut names = Vec::new();
    if add_intercept {
        names.push("intercept".to_string());
    }
    for name in requested {
        if name == "intercept" {
            if !names.iter().any(|n| n == "intercept") {
                names.insert(0, "intercept".to_string());
            }
            continue;
        }
        names.push(name.clone());
    }
    let m = DMatrix::from_fn(n, names.len(), |i, j| {
        let name = &names[j];
        if name == "intercept" {
            1.0
        } else {
            table
                .columns
                .iter()
                .find(|(cn, _)| cn == name)
                .map(|(_, col)| col[i])
                .unwrap_or(f64::NAN)
        }
    });
    Ok((m, names))
}

/// Build the model dataset from a parsed table.
pub fn dataset_from_table(
    table: &Table,
    theta_covariates: &[String],
    alpha_covariates: &[String],
    add_intercept: bool,
) -> Result<Dataset, InputError> {
    let n = table.y.len();
    let (x_beta, beta_names) = design(n, theta_covariates, table, add_intercept)?;
    let (x_alpha, alpha_names) = design(n, alpha_covariates, table, add_intercept)?;
    Dataset::new(table.y.clone(), x_beta, x_alpha, beta_names, alpha_names)
        .map_err(|e| InputError::Invalid(e.to_string()))
}
