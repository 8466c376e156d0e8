use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{FamilyReport, Resources, RunConfig};
use crate::corpus::{Coverage, EnrichedCorpus};
use crate::error::{Error, Result};

/// Shortest round-trip form, scientific below 1e-4 or from 1e15 in magnitude;
/// `NA` for missing or NaN values.
pub fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "NA".to_string(),
        Some(x) if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) => format!("{x:e}"),
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

/// A named CSV table; cells are pre-formatted strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(name: &str, header: &[S]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cells of column `name`, in row order.
    pub fn values(&self, name: &str) -> Vec<&str> {
        match self.column(name) {
            Some(j) => self.rows.iter().map(|r| r[j].as_str()).collect(),
            None => Vec::new(),
        }
    }

    fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>> {
        let mut out = format!("# config_hash={config_hash}\n").into_bytes();
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io("<csv buffer>", e))?;
        drop(w);
        Ok(out)
    }
}

/// SHA-256 over the run config and the content hashes of every resource.
pub fn config_hash(config: &RunConfig, resources: &Resources) -> Result<String> {
    let canonical = serde_json::to_vec(&json!({
        "engine": env!("CARGO_PKG_VERSION"),
        "config": config,
        "resources": resources.hashes(),
    }))?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

#[derive(Debug, Clone, Default)]
struct FamilyOutput {
    tables: IndexMap<String, Table>,
    models: IndexMap<String, Value>,
    warnings: Vec<String>,
}

/// Reports of every family across models, ready to be written.
#[derive(Debug, Clone)]
pub struct AuditOutput {
    pub config_hash: String,
    provenance: Value,
    corpus: Value,
    families: IndexMap<&'static str, FamilyOutput>,
}

fn coverage_summary(c: &Coverage) -> Value {
    let present: IndexMap<&str, usize> = Coverage::FIELDS.iter().map(|f| (*f, c.present(f))).collect();
    json!({ "messages": c.total, "annotated": present })
}

impl AuditOutput {
    pub(super) fn new(
        config_hash: String,
        config: &RunConfig,
        resources: &Resources,
        corpus: &EnrichedCorpus,
    ) -> Self {
        let provenance = json!({
            "config_hash": config_hash,
            "config": config,
            "resources": resources.hashes(),
            "markers": resources.markers,
            "methods": {
                "odds_ratio": "smoothed focal-vs-rest odds ratio",
                "ca": "principal coordinates, axes signed so the largest-magnitude row coordinate is positive",
                "clustering": "average linkage, Euclidean distance on log-OR profiles",
            },
        });
        let summary = json!({
            "models": corpus.corpus().model_ids(),
            "coverage": coverage_summary(&corpus.coverage()),
        });
        AuditOutput {
            config_hash,
            provenance,
            corpus: summary,
            families: IndexMap::new(),
        }
    }

    pub(super) fn add(&mut self, family: &'static str, model: &str, report: FamilyReport) {
        let out = self.families.entry(family).or_default();
        for table in report.tables {
            let merged = out.tables.entry(table.name.clone()).or_insert_with(|| {
                let mut header = vec!["model_id".to_string()];
                header.extend(table.header.iter().cloned());
                Table {
                    name: table.name.clone(),
                    header,
                    rows: Vec::new(),
                }
            });
            debug_assert_eq!(merged.header[1..], table.header[..], "header of {}", table.name);
            for row in table.rows {
                let mut full = Vec::with_capacity(row.len() + 1);
                full.push(model.to_string());
                full.extend(row);
                merged.rows.push(full);
            }
        }
        out.models.insert(model.to_string(), report.json);
        out.warnings
            .extend(report.warnings.into_iter().map(|w| format!("[{model}] {w}")));
    }

    pub fn families(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.families.values().find_map(|f| f.tables.get(name))
    }

    pub fn warnings(&self) -> Vec<&str> {
        self.families
            .values()
            .flat_map(|f| f.warnings.iter().map(String::as_str))
            .collect()
    }

    /// Directory the reports land in: `<root>/<first 12 hex digits of the config hash>`.
    pub fn run_dir(&self, root: &Path) -> PathBuf {
        root.join(&self.config_hash[..12])
    }

    /// Writes every table as CSV plus one JSON per family and a manifest; returns the run directory.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let dir = self.run_dir(root);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut files: Vec<String> = Vec::new();
        let mut write = |name: String, bytes: Vec<u8>| -> Result<()> {
            let path = dir.join(&name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            files.push(name);
            Ok(())
        };
        for (family, out) in &self.families {
            for table in out.tables.values() {
                write(format!("{}.csv", table.name), table.to_csv(&self.config_hash)?)?;
            }
            let doc = json!({
                "config_hash": self.config_hash,
                "family": family,
                "provenance": self.provenance,
                "models": out.models,
                "warnings": out.warnings,
            });
            write(format!("{family}.json"), pretty(&doc)?)?;
        }
        let manifest = json!({
            "config_hash": self.config_hash,
            "provenance": self.provenance,
            "corpus": self.corpus,
            "families": self.families(),
            "files": files,
        });
        let path = dir.join("manifest.json");
        std::fs::write(&path, pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(dir)
    }
}

fn pretty(v: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}
