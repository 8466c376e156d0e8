//! Formality bias across gender and age, and within-theme emotion contrasts.

mod emotion;

use indexmap::IndexMap;
use serde::Serialize;

use crate::corpus::{Axis, EnrichedCorpus};
use crate::error::{Error, Result};
use crate::stats::{anova_f, tukey_hsd, welch_t, TestResult, TukeyPair};

pub use emotion::{
    emotion_contrast, emotion_matrices, theme_emotion_means, ContrastMode, EmotionContrast,
    EmotionMatrix, EmotionRow, NO_THEME,
};

/// Formality probabilities grouped by label.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StyleScoreSet {
    pub groups: IndexMap<String, Vec<f64>>,
}

impl StyleScoreSet {
    pub fn new(groups: IndexMap<String, Vec<f64>>) -> Result<Self> {
        for (g, scores) in &groups {
            if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(Error::Invariant(format!(
                    "formality score {bad} for {g:?} outside [0, 1]"
                )));
            }
        }
        Ok(StyleScoreSet { groups })
    }

    /// Formality scores per label of `axis`; messages without a score are skipped.
    pub fn from_corpus(enriched: &EnrichedCorpus, axis: Axis) -> Self {
        let mut groups: IndexMap<String, Vec<f64>> = enriched
            .corpus()
            .axes()
            .labels(axis)
            .into_iter()
            .map(|l| (l.to_string(), Vec::new()))
            .collect();
        for (m, a) in enriched.iter() {
            if let (Some(label), Some(p)) = (m.label(axis), a.formality_prob) {
                groups.entry(label.to_string()).or_default().push(p);
            }
        }
        StyleScoreSet { groups }
    }

    pub fn group(&self, label: &str) -> Result<&[f64]> {
        self.groups
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingGroup(label.to_string()))
    }
}

/// Welch t of male minus female formality; negative means female-targeted text is more formal.
pub fn gender_formality_bias(scores: &StyleScoreSet, male: &str, female: &str) -> Result<TestResult> {
    welch_t(scores.group(male)?, scores.group(female)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgeFormality {
    pub anova: TestResult,
    pub groups: Vec<GroupSummary>,
    pub tukey: Vec<TukeyPair>,
}

/// One-way ANOVA over the age groups followed by the full Tukey HSD table.
pub fn age_formality_bias(scores: &StyleScoreSet) -> Result<AgeFormality> {
    for (g, s) in &scores.groups {
        if s.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "age group {g:?} has {} formality scores, need at least 2",
                s.len()
            )));
        }
    }
    let samples: Vec<&[f64]> = scores.groups.values().map(Vec::as_slice).collect();
    let anova = anova_f(&samples)?;
    let labelled: Vec<(&str, &[f64])> = scores
        .groups
        .iter()
        .map(|(g, s)| (g.as_str(), s.as_slice()))
        .collect();
    let tukey = tukey_hsd(&labelled)?;
    let groups = scores
        .groups
        .iter()
        .map(|(g, s)| GroupSummary {
            group: g.clone(),
            n: s.len(),
            mean: s.iter().sum::<f64>() / s.len() as f64,
        })
        .collect();
    Ok(AgeFormality { anova, groups, tukey })
}
