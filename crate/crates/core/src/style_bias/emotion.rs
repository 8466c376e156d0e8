use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Axis, EnrichedCorpus, Keyed, EMOTION_COUNT, EMOTION_LABELS};
use crate::error::{Error, Result};
use crate::stats::{paired_t, welch_t, TestResult};

/// Theme used for messages that carry no theme (SG corpora).
pub const NO_THEME: &str = "ALL";

/// Emotion probability vectors of one theme, grouped by label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionMatrix {
    pub theme: String,
    pub groups: IndexMap<String, Vec<Keyed<Vec<f64>>>>,
}

impl EmotionMatrix {
    fn group(&self, label: &str) -> Result<&[Keyed<Vec<f64>>]> {
        self.groups
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingGroup(label.to_string()))
    }
}

/// One matrix per theme (axis order), grouping vectors by `axis`.
///
/// Vectors are keyed by [`Message::pairing_key`](crate::corpus::Message::pairing_key)
/// on `axis`, so paired contrasts match messages that differ only on `axis`.
pub fn emotion_matrices(enriched: &EnrichedCorpus, axis: Axis) -> Vec<EmotionMatrix> {
    let axes = enriched.corpus().axes();
    let mut by_theme: IndexMap<String, EmotionMatrix> = IndexMap::new();
    for t in axes.labels(Axis::Theme) {
        by_theme.insert(t.to_string(), EmotionMatrix { theme: t.to_string(), groups: IndexMap::new() });
    }
    let labels: Vec<String> = axes.labels(axis).into_iter().map(str::to_string).collect();
    for (m, a) in enriched.iter() {
        let (Some(label), Some(p)) = (m.label(axis), &a.emotion_probs) else { continue };
        let theme = m.theme.clone().unwrap_or_else(|| NO_THEME.to_string());
        let matrix = by_theme.entry(theme.clone()).or_insert_with(|| EmotionMatrix {
            theme,
            groups: IndexMap::new(),
        });
        if matrix.groups.is_empty() {
            for l in &labels {
                matrix.groups.insert(l.clone(), Vec::new());
            }
        }
        let key = m.pairing_key(axis);
        matrix.groups.entry(label.to_string()).or_default().push(Keyed {
            key,
            value: p.clone(),
        });
    }
    by_theme.into_values().filter(|m| !m.groups.is_empty()).collect()
}

/// Componentwise mean of the group's probability vectors.
pub fn theme_emotion_means(matrix: &EmotionMatrix, group: &str) -> Result<Vec<f64>> {
    let rows = matrix.group(group)?;
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!(
            "group {group:?} has no emotion vectors in theme {:?}",
            matrix.theme
        )));
    }
    let mut acc = vec![0.0; EMOTION_COUNT];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(&r.value) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastMode {
    Independent,
    Paired,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionRow {
    pub emotion: &'static str,
    pub mean_g1: f64,
    pub mean_g2: f64,
    /// `None` when the test was undefined for this emotion; see `skipped`.
    pub test: Option<TestResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionContrast {
    pub theme: String,
    pub group1: String,
    pub group2: String,
    pub mode: ContrastMode,
    pub n1: usize,
    pub n2: usize,
    pub rows: Vec<EmotionRow>,
}

impl EmotionContrast {
    /// Rows with p below `threshold`; statistics are untouched.
    pub fn reported(&self, threshold: f64) -> impl Iterator<Item = &EmotionRow> {
        self.rows
            .iter()
            .filter(move |r| r.test.is_some_and(|t| t.p_value < threshold))
    }
}

fn paired_samples(
    g1: &[Keyed<Vec<f64>>],
    g2: &[Keyed<Vec<f64>>],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut index = HashMap::new();
    for (i, r) in g2.iter().enumerate() {
        if index.insert(r.key.as_str(), i).is_some() {
            return Err(Error::Invariant(format!("duplicate pairing key {:?}", r.key)));
        }
    }
    let mut seen = HashSet::new();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in g1 {
        if !seen.insert(r.key.as_str()) {
            return Err(Error::Invariant(format!("duplicate pairing key {:?}", r.key)));
        }
        if let Some(&j) = index.get(r.key.as_str()) {
            a.push(r.value.clone());
            b.push(g2[j].value.clone());
        }
    }
    let dropped = g1.len() + g2.len() - 2 * a.len();
    if dropped > 0 {
        log::warn!("{dropped} emotion vectors had no partner and were left out of the paired test");
    }
    Ok((a, b))
}

/// Per-emotion t-test of group1 against group2; positive t means higher in group1.
pub fn emotion_contrast(
    matrix: &EmotionMatrix,
    group1: &str,
    group2: &str,
    mode: ContrastMode,
) -> Result<EmotionContrast> {
    let g1 = matrix.group(group1)?;
    let g2 = matrix.group(group2)?;
    let (s1, s2): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match mode {
        ContrastMode::Independent => (
            g1.iter().map(|r| r.value.clone()).collect(),
            g2.iter().map(|r| r.value.clone()).collect(),
        ),
        ContrastMode::Paired => paired_samples(g1, g2)?,
    };
    if s1.len() < 2 || s2.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "theme {:?}: {group1} has {} and {group2} has {} usable vectors",
            matrix.theme,
            s1.len(),
            s2.len()
        )));
    }
    let column = |s: &[Vec<f64>], e: usize| s.iter().map(|v| v[e]).collect::<Vec<f64>>();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let rows = EMOTION_LABELS
        .iter()
        .enumerate()
        .map(|(e, &emotion)| {
            let (a, b) = (column(&s1, e), column(&s2, e));
            let result = match mode {
                ContrastMode::Independent => welch_t(&a, &b),
                ContrastMode::Paired => paired_t(&a, &b),
            };
            let (test, skipped) = match result {
                Ok(t) => (Some(t), None),
                Err(err) => (None, Some(err.to_string())),
            };
            EmotionRow {
                emotion,
                mean_g1: mean(&a),
                mean_g2: mean(&b),
                test,
                skipped,
            }
        })
        .collect();
    Ok(EmotionContrast {
        theme: matrix.theme.clone(),
        group1: group1.to_string(),
        group2: group2.to_string(),
        mode,
        n1: s1.len(),
        n2: s2.len(),
        rows,
    })
}
