//! Correspondence analysis, age-group clustering and log-OR heatmaps.

mod ca;
mod cluster;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lexical_bias::OrResult;

pub use ca::{correspondence_analysis, CaSolution, ContingencyTable};
pub use cluster::{hierarchical_cluster, DendrogramLinkage, Merge};

/// `ln(OR)` laid out as categories (rows) by groups (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Heatmap {
    /// One profile per group: its column of log-ORs across categories.
    pub fn group_profiles(&self) -> Vec<(String, Vec<f64>)> {
        self.cols
            .iter()
            .enumerate()
            .map(|(j, g)| (g.clone(), self.values.iter().map(|row| row[j]).collect()))
            .collect()
    }
}

/// Natural log of each (category, group) OR; every cell must be present.
pub fn log_or_matrix(results: &[OrResult]) -> Result<Heatmap> {
    let mut rows: IndexMap<&str, IndexMap<&str, f64>> = IndexMap::new();
    let mut cols: Vec<String> = Vec::new();
    for r in results {
        if !(r.odds_ratio > 0.0) || !r.odds_ratio.is_finite() {
            return Err(Error::Internal(format!(
                "odds ratio {} for {:?}/{:?} is not a positive number",
                r.odds_ratio, r.label, r.group
            )));
        }
        if !cols.contains(&r.group) {
            cols.push(r.group.clone());
        }
        rows.entry(r.label.as_str())
            .or_default()
            .insert(r.group.as_str(), r.odds_ratio.ln());
    }
    let values = rows
        .iter()
        .map(|(label, cells)| {
            cols.iter()
                .map(|g| {
                    cells.get(g.as_str()).copied().ok_or_else(|| {
                        Error::Invariant(format!("no odds ratio for {label:?} in group {g:?}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Heatmap {
        rows: rows.keys().map(|s| s.to_string()).collect(),
        cols,
        values,
    })
}
