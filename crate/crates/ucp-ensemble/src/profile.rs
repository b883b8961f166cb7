//! Key/value profile files for the synthetic generator.
//!
//! ```text
//! # industrial-style projects
//! n = 40
//! prod_mean = 24.1
//! prod_stdev = 5.1
//! ucp_mean = 739.3
//! ucp_stdev = 1563.9
//! coef_1 = -1.2
//! noise_stdev = 4.2
//! ```
//!
//! `n`, `prod_mean`, `prod_stdev`, `ucp_mean` and `ucp_stdev` are required.
//! Missing `coef_j` default to zero. Without `noise_stdev` the noise level is
//! chosen so that productivity has standard deviation `prod_stdev`.

use ucp_ensemble_core::dataset::FACTOR_COUNT;
use ucp_ensemble_core::DatasetProfile;

use crate::error::{AppError, AppResult};

const REQUIRED: [&str; 5] = ["n", "prod_mean", "prod_stdev", "ucp_mean", "ucp_stdev"];

pub fn parse_profile(text: &str) -> AppResult<DatasetProfile> {
    let mut values: Vec<(String, f64, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |message: String| AppError::Profile { line: line_no, message };
        let (key, value) = line.split_once('=').ok_or_else(|| fail("expected `key = value`".into()))?;
        let key = key.trim().to_ascii_lowercase();
        if !is_known(&key) {
            return Err(fail(format!("unknown key `{key}`")));
        }
        if values.iter().any(|(k, _, _)| *k == key) {
            return Err(fail(format!("duplicate key `{key}`")));
        }
        let value = value.trim();
        let number: f64 = value.parse().map_err(|_| fail(format!("`{key}` value {value:?} is not a number")))?;
        values.push((key, number, line_no));
    }
    let get = |key: &str| values.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (*v, *l));
    for key in REQUIRED {
        if get(key).is_none() {
            return Err(AppError::Profile { line: 0, message: format!("missing required key `{key}`") });
        }
    }
    let (n, n_line) = get("n").expect("checked");
    if n.fract() != 0.0 || n < 0.0 {
        return Err(AppError::Profile { line: n_line, message: format!("`n` must be a whole number, got {n}") });
    }
    let required = |key: &str| get(key).expect("checked").0;
    let coefficients = std::array::from_fn(|j| get(&format!("coef_{}", j + 1)).map_or(0.0, |v| v.0));
    let (prod_stdev, ucp_mean, ucp_stdev) = (required("prod_stdev"), required("ucp_mean"), required("ucp_stdev"));
    let profile = match get("noise_stdev") {
        Some((noise_stdev, _)) => {
            let p = DatasetProfile {
                n: n as usize,
                prod_mean: required("prod_mean"),
                prod_stdev,
                ucp_mean,
                ucp_stdev,
                coefficients,
                noise_stdev,
            };
            p.validate()?;
            p
        }
        None => DatasetProfile::calibrated(n as usize, required("prod_mean"), prod_stdev, ucp_mean, ucp_stdev, coefficients)?,
    };
    Ok(profile)
}

fn is_known(key: &str) -> bool {
    REQUIRED.contains(&key)
        || key == "noise_stdev"
        || key
            .strip_prefix("coef_")
            .and_then(|j| j.parse::<usize>().ok())
            .is_some_and(|j| (1..=FACTOR_COUNT).contains(&j))
}

/// Renders a profile in the format read by [`parse_profile`].
pub fn format_profile(p: &DatasetProfile) -> String {
    let mut out = format!(
        "n = {}\nprod_mean = {}\nprod_stdev = {}\nucp_mean = {}\nucp_stdev = {}\n",
        p.n, p.prod_mean, p.prod_stdev, p.ucp_mean, p.ucp_stdev
    );
    for (j, c) in p.coefficients.iter().enumerate() {
        out.push_str(&format!("coef_{} = {c}\n", j + 1));
    }
    out.push_str(&format!("noise_stdev = {}\n", p.noise_stdev));
    out
}
