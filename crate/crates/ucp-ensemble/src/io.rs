//! CSV dataset files: a header `e1,...,e8,ucp,effort` and one project per
//! row. Productivity is never stored; it is derived on load.

use std::io::{Read, Write};

use ucp_ensemble_core::{Dataset, EnvFactors, ProjectRecord};

use crate::error::{AppError, AppResult};

pub const HEADER: [&str; 10] = ["e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "ucp", "effort"];

/// Reads a dataset. Row numbers in errors count data rows from 1.
pub fn load_dataset<R: Read>(source: R, name: &str) -> AppResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(source);
    let header = reader.headers()?.clone();
    if header.len() != HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
        return Err(AppError::Header { expected: HEADER.join(","), found: header.iter().collect::<Vec<_>>().join(",") });
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let fail = |message: String| AppError::Row { row: row_no, message };
        if row.len() != HEADER.len() {
            return Err(fail(format!("expected {} fields, found {}", HEADER.len(), row.len())));
        }
        let mut values = [0.0; 10];
        for (slot, (field, column)) in values.iter_mut().zip(row.iter().zip(HEADER)) {
            *slot = field.parse().map_err(|_| fail(format!("`{column}` value {field:?} is not a number")))?;
        }
        let ratings: [f64; 8] = values[..8].try_into().expect("eight ratings");
        let env = EnvFactors::new(ratings).map_err(|e| fail(e.to_string()))?;
        let (ucp, effort) = (values[8], values[9]);
        if !(ucp > 0.0) || !ucp.is_finite() {
            return Err(fail("non-positive UCP".into()));
        }
        if !(effort > 0.0) || !effort.is_finite() {
            return Err(fail("non-positive effort".into()));
        }
        records.push(ProjectRecord::new(env, ucp, effort).map_err(|e| fail(e.to_string()))?);
    }
    Ok(Dataset::new(name, records))
}

/// Writes a dataset so that [`load_dataset`] reads back identical values.
pub fn write_dataset<W: Write>(dataset: &Dataset, sink: W) -> AppResult<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(HEADER)?;
    for r in dataset.records() {
        let mut row: Vec<String> = r.env().ratings().iter().map(f64::to_string).collect();
        row.push(r.ucp().to_string());
        row.push(r.effort().to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
