use std::collections::HashMap;

use serde::Serialize;

use super::{Feature, FeatureGroups, PersuasionFeatures};
use crate::error::{Error, Result};
use crate::stats::{anova_f, paired_t, pearson, spearman, welch_t, TestResult};
use crate::style_bias::ContrastMode;

/// One feature compared between two groups; positive t means higher in group1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureTest {
    pub feature: Feature,
    pub group1: String,
    pub group2: String,
    pub mode: ContrastMode,
    pub n1: usize,
    pub n2: usize,
    pub mean1: Option<f64>,
    pub mean2: Option<f64>,
    pub test: Option<TestResult>,
    pub skipped: Option<String>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn samples(
    groups: &FeatureGroups<'_>,
    feature: Feature,
    g1: &str,
    g2: &str,
    mode: ContrastMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let get = |g: &str| groups.get(g).ok_or_else(|| Error::MissingGroup(g.to_string()));
    let (r1, r2) = (get(g1)?, get(g2)?);
    match mode {
        ContrastMode::Independent => Ok((
            r1.iter().filter_map(|r| feature.value(r.value)).collect(),
            r2.iter().filter_map(|r| feature.value(r.value)).collect(),
        )),
        ContrastMode::Paired => {
            let mut index: HashMap<&str, &PersuasionFeatures> = HashMap::new();
            for r in r2 {
                if index.insert(r.key.as_str(), r.value).is_some() {
                    return Err(Error::Invariant(format!("duplicate pairing key {:?}", r.key)));
                }
            }
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for r in r1 {
                let Some(other) = index.remove(r.key.as_str()) else { continue };
                if let (Some(x), Some(y)) = (feature.value(r.value), feature.value(other)) {
                    a.push(x);
                    b.push(y);
                }
            }
            Ok((a, b))
        }
    }
}

fn feature_test(
    groups: &FeatureGroups<'_>,
    feature: Feature,
    g1: &str,
    g2: &str,
    mode: ContrastMode,
) -> Result<FeatureTest> {
    let (a, b) = samples(groups, feature, g1, g2, mode)?;
    let result = match mode {
        ContrastMode::Independent => welch_t(&a, &b),
        ContrastMode::Paired => paired_t(&a, &b),
    };
    let (test, skipped) = match result {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(FeatureTest {
        feature,
        group1: g1.to_string(),
        group2: g2.to_string(),
        mode,
        n1: a.len(),
        n2: b.len(),
        mean1: mean(&a),
        mean2: mean(&b),
        test,
        skipped,
    })
}

/// Welch t of male minus female for A, M (defined subsets), I and PBI.
pub fn gender_persuasion_tests(
    groups: &FeatureGroups<'_>,
    male: &str,
    female: &str,
) -> Result<Vec<FeatureTest>> {
    Feature::ALL
        .iter()
        .map(|f| feature_test(groups, *f, male, female, ContrastMode::Independent))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgePersuasionTests {
    /// One-way ANOVA of PBI across all age groups.
    pub anova: Option<TestResult>,
    pub anova_skipped: Option<String>,
    pub pairwise: Vec<FeatureTest>,
}

/// PBI ANOVA over every age group plus per-feature tests for the requested pairs.
pub fn age_persuasion_tests<S: AsRef<str>>(
    groups: &FeatureGroups<'_>,
    pairs: &[(S, S)],
    mode: ContrastMode,
) -> Result<AgePersuasionTests> {
    let pbi: Vec<Vec<f64>> = groups
        .values()
        .map(|rows| rows.iter().map(|r| r.value.pbi).collect())
        .collect();
    let (anova, anova_skipped) = match anova_f(&pbi) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut pairwise = Vec::new();
    for (g1, g2) in pairs {
        for f in Feature::ALL {
            pairwise.push(feature_test(groups, f, g1.as_ref(), g2.as_ref(), mode)?);
        }
    }
    Ok(AgePersuasionTests {
        anova,
        anova_skipped,
        pairwise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub component: Feature,
    pub n: usize,
    pub pearson: Option<TestResult>,
    pub spearman: Option<TestResult>,
    pub skipped: Option<String>,
}

/// Pearson and Spearman correlation of each component with sentiment.
///
/// A and M use only messages where they are defined; I and PBI use every
/// message with a sentiment score.
pub fn sanity_correlations(
    features: &[PersuasionFeatures],
    sentiment: &[Option<f64>],
) -> Result<Vec<CorrelationRow>> {
    if features.len() != sentiment.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: sentiment.len(),
        });
    }
    let order = [Feature::Pbi, Feature::Agency, Feature::Modal, Feature::Imperative];
    Ok(order
        .into_iter()
        .map(|component| {
            let (x, y): (Vec<f64>, Vec<f64>) = features
                .iter()
                .zip(sentiment)
                .filter_map(|(f, s)| Some((component.value(f)?, (*s)?)))
                .unzip();
            let n = x.len();
            match (pearson(&x, &y), spearman(&x, &y)) {
                (Ok(p), Ok(s)) => CorrelationRow {
                    component,
                    n,
                    pearson: Some(p),
                    spearman: Some(s),
                    skipped: None,
                },
                (Err(e), _) | (_, Err(e)) => CorrelationRow {
                    component,
                    n,
                    pearson: None,
                    spearman: None,
                    skipped: Some(e.to_string()),
                },
            }
        })
        .collect())
}
