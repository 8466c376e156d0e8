//! Audit families behind a common trait, selected by name, and the run driver.

mod config;
mod families;
mod output;

use indexmap::IndexMap;

use crate::corpus::EnrichedCorpus;
use crate::error::{Error, Result};

pub use config::{Resources, RunConfig, WeatSpec};
pub use families::{EmotionAudit, InsightsAudit, LexicalAudit, PersuasionAudit, StyleAudit};
pub use output::{config_hash, fmt_num, AuditOutput, Table};

/// Inputs one family run sees: a single model's messages plus the run settings.
pub struct AuditContext<'a> {
    pub model_id: &'a str,
    pub corpus: &'a EnrichedCorpus,
    pub config: &'a RunConfig,
    pub resources: &'a Resources,
}

/// What one family produced for one model.
#[derive(Debug, Clone, Default)]
pub struct FamilyReport {
    pub tables: Vec<Table>,
    pub json: serde_json::Value,
    pub warnings: Vec<String>,
}

pub trait Audit: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Inputs this family cannot run without, described for the user; empty when satisfied.
    fn missing_inputs(&self, corpus: &EnrichedCorpus, config: &RunConfig, resources: &Resources) -> Vec<String>;

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport>;
}

/// Audit families by name, in registration order.
pub struct AuditRegistry {
    audits: IndexMap<&'static str, Box<dyn Audit>>,
}

impl AuditRegistry {
    pub fn empty() -> Self {
        AuditRegistry { audits: IndexMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LexicalAudit));
        r.register(Box::new(StyleAudit));
        r.register(Box::new(EmotionAudit));
        r.register(Box::new(PersuasionAudit));
        r.register(Box::new(InsightsAudit));
        r
    }

    pub fn register(&mut self, audit: Box<dyn Audit>) {
        self.audits.insert(audit.name(), audit);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.audits.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn Audit> {
        self.audits.get(name).map(|a| a.as_ref())
    }

    /// The named family, or every family for `"all"`.
    pub fn select(&self, name: &str) -> Result<Vec<&dyn Audit>> {
        if name == "all" {
            return Ok(self.audits.values().map(|a| a.as_ref()).collect());
        }
        self.get(name).map(|a| vec![a]).ok_or_else(|| {
            Error::Config(format!(
                "unknown audit family {name:?}; expected one of {} or all",
                self.names().join(", ")
            ))
        })
    }
}

/// Validates inputs for every selected family, then runs each family per model.
pub fn run_audit(
    audits: &[&dyn Audit],
    corpus: &EnrichedCorpus,
    config: &RunConfig,
    resources: &Resources,
) -> Result<AuditOutput> {
    let config = &config.resolve(corpus.corpus().axes())?;
    let mut missing = Vec::new();
    if corpus.is_empty() {
        missing.push("the corpus has no messages".to_string());
    }
    for a in audits {
        for m in a.missing_inputs(corpus, config, resources) {
            missing.push(format!("{}: {m}", a.name()));
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    let hash = config_hash(config, resources)?;
    let mut out = AuditOutput::new(hash, config, resources, corpus);
    for model in corpus.corpus().model_ids() {
        let subset = corpus.filter(|m| m.model_id == model);
        for a in audits {
            let ctx = AuditContext {
                model_id: &model,
                corpus: &subset,
                config,
                resources,
            };
            let report = a.run(&ctx)?;
            for w in &report.warnings {
                log::warn!("{} [{model}]: {w}", a.name());
            }
            out.add(a.name(), &model, report);
        }
    }
    Ok(out)
}
