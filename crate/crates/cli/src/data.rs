//! CSV ingestion. Levels are the `|`-joined covariate values, numbered in
//! lexicographic label order.

use std::collections::BTreeMap;
use std::path::Path;

use followup::{CovariateLevel, Observation, SurvivalDataset};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub struct Columns<'a> {
    pub time: &'a str,
    pub event: &'a str,
    pub covariates: &'a [String],
}

pub struct Loaded {
    pub dataset: SurvivalDataset,
    pub sha256: String,
    pub rows: usize,
}

pub fn load(path: &Path, cols: &Columns) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let dataset = parse(&bytes, cols)?;
    Ok(Loaded {
        rows: dataset.len(),
        dataset,
        sha256,
    })
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Config(format!("column '{name}' not found in header")))
}

pub fn parse(bytes: &[u8], cols: &Columns) -> Result<SurvivalDataset, CliError> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers().map_err(|e| CliError::Parse(e.to_string()))?.clone();
    let t_idx = column(&headers, cols.time)?;
    let d_idx = column(&headers, cols.event)?;
    let x_idx = cols
        .covariates
        .iter()
        .map(|c| column(&headers, c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<(f64, bool, String)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).map(str::trim).unwrap_or("");
        let time: f64 = field(t_idx).parse().map_err(|_| {
            CliError::Parse(format!("line {line}: time '{}' is not a number", field(t_idx)))
        })?;
        let event = match field(d_idx) {
            "1" => true,
            "0" => false,
            other => {
                return Err(CliError::Parse(format!(
                    "line {line}: event indicator must be 0 or 1, got '{other}'"
                )))
            }
        };
        let label = if x_idx.is_empty() {
            "all".to_owned()
        } else {
            x_idx.iter().map(|&k| field(k)).collect::<Vec<_>>().join("|")
        };
        rows.push((time, event, label));
    }

    let ids: BTreeMap<&str, usize> = {
        let mut labels: Vec<&str> = rows.iter().map(|r| r.2.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
    };
    let levels = ids
        .iter()
        .map(|(label, &id)| CovariateLevel {
            id,
            label: (*label).to_owned(),
        })
        .collect();
    let observations = rows
        .iter()
        .map(|(t, e, l)| Observation::new(*t, *e, ids[l.as_str()]))
        .collect();
    Ok(SurvivalDataset::new(observations, levels)?)
}
