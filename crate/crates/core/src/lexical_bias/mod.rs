//! Smoothed odds ratios over lexicon categories and salient words, and WEAT scoring.

mod salient;
mod weat;

use indexmap::IndexMap;
use serde::Serialize;

use crate::corpus::{Axis, EnrichedCorpus};
use crate::error::{Error, Result};
use crate::lexicons::{match_categories, CategoryCounts, CompiledLexicon};

pub use salient::{salient_word_or, SalientWords};
pub use weat::{weat, EmbeddingTable, WeatResult, WordSetCoverage};

pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Odds ratio of one category (or word) for a focal group against the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrResult {
    pub label: String,
    pub group: String,
    #[serde(rename = "OR")]
    pub odds_ratio: f64,
    #[serde(rename = "E_focal")]
    pub e_focal: u64,
    #[serde(rename = "T_focal")]
    pub t_focal: u64,
    #[serde(rename = "E_rest")]
    pub e_rest: u64,
    #[serde(rename = "T_rest")]
    pub t_rest: u64,
    pub s: f64,
}

/// `((E_f+s)/(T_f-E_f+s)) / ((E_r+s)/(T_r-E_r+s))`.
pub fn odds_ratio(e_focal: u64, t_focal: u64, e_rest: u64, t_rest: u64, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Config(format!("smoothing must be positive, got {s}")));
    }
    if e_focal > t_focal || e_rest > t_rest {
        return Err(Error::Invariant(format!(
            "count exceeds total ({e_focal}/{t_focal}, {e_rest}/{t_rest})"
        )));
    }
    let odds = |e: u64, t: u64| (e as f64 + s) / ((t - e) as f64 + s);
    Ok(odds(e_focal, t_focal) / odds(e_rest, t_rest))
}

/// One OR per category of `focal`, contrasted with `rest`.
pub fn category_or(
    focal_label: &str,
    focal: &CategoryCounts,
    rest: &CategoryCounts,
    s: f64,
) -> Result<Vec<OrResult>> {
    let mut labels: Vec<&String> = focal.counts.keys().collect();
    for k in rest.counts.keys() {
        if !focal.counts.contains_key(k) {
            labels.push(k);
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let (ef, er) = (focal.get(label), rest.get(label));
            Ok(OrResult {
                label: label.clone(),
                group: focal_label.to_string(),
                odds_ratio: odds_ratio(ef, focal.total, er, rest.total, s)?,
                e_focal: ef,
                t_focal: focal.total,
                e_rest: er,
                t_rest: rest.total,
                s,
            })
        })
        .collect()
}

/// Male-vs-female category ORs; above 1 means male-salient.
pub fn gender_category_or(
    counts_m: &CategoryCounts,
    counts_f: &CategoryCounts,
    s: f64,
) -> Result<Vec<OrResult>> {
    category_or("Male", counts_m, counts_f, s)
}

/// Focal age group against the pooled remaining groups.
pub fn age_category_or(
    counts_by_group: &IndexMap<String, CategoryCounts>,
    focal: &str,
    s: f64,
) -> Result<Vec<OrResult>> {
    if counts_by_group.len() < 2 {
        return Err(Error::InsufficientData(
            "age ORs need at least two groups".into(),
        ));
    }
    let focal_counts = counts_by_group
        .get(focal)
        .ok_or_else(|| Error::MissingGroup(focal.to_string()))?;
    let mut rest = CategoryCounts {
        counts: focal_counts.counts.keys().map(|k| (k.clone(), 0)).collect(),
        total: 0,
    };
    for (label, counts) in counts_by_group {
        if label != focal {
            rest.add(counts);
        }
    }
    category_or(focal, focal_counts, &rest, s)
}

/// Category counts for every label of `axis`, in axis declaration order.
pub fn counts_by_label(
    enriched: &EnrichedCorpus,
    axis: Axis,
    lexicon: &CompiledLexicon,
) -> IndexMap<String, CategoryCounts> {
    let mut out: IndexMap<String, CategoryCounts> = enriched
        .corpus()
        .axes()
        .labels(axis)
        .into_iter()
        .map(|l| (l.to_string(), CategoryCounts::zeros(lexicon)))
        .collect();
    for (m, a) in enriched.iter() {
        let Some(label) = m.label(axis) else { continue };
        let tokens = a.tokens_or_tokenize(&m.text);
        let lowers: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
        let counts = match_categories(&lowers, lexicon);
        out.entry(label.to_string())
            .or_insert_with(|| CategoryCounts::zeros(lexicon))
            .add(&counts);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)], total: u64) -> CategoryCounts {
        CategoryCounts {
            counts: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            total,
        }
    }

    #[test]
    fn hand_evaluated_examples() {
        let or = odds_ratio(4, 10, 1, 10, 0.5).unwrap();
        assert!((or - (4.5 / 6.5) / (1.5 / 9.5)).abs() < 1e-12);
        assert!((or - 4.385).abs() < 1e-3);
        assert_eq!(odds_ratio(3, 10, 3, 10, 0.5).unwrap(), 1.0);
        let mut by_group = IndexMap::new();
        by_group.insert("YA".to_string(), counts(&[("Warmth", 3)], 10));
        by_group.insert("EW".to_string(), counts(&[("Warmth", 1)], 10));
        by_group.insert("S".to_string(), counts(&[("Warmth", 2)], 20));
        let r = age_category_or(&by_group, "YA", 0.5).unwrap();
        assert!((r[0].odds_ratio - (3.5 / 7.5) / (3.5 / 27.5)).abs() < 1e-12);
        assert_eq!((r[0].e_rest, r[0].t_rest), (3, 30));
    }

    #[test]
    fn errors() {
        assert!(matches!(odds_ratio(1, 2, 1, 2, 0.0), Err(Error::Config(_))));
        assert!(matches!(odds_ratio(1, 2, 1, 2, -1.0), Err(Error::Config(_))));
        let mut g = IndexMap::new();
        g.insert("a".to_string(), counts(&[], 0));
        assert!(age_category_or(&g, "a", 0.5).is_err());
        g.insert("b".to_string(), counts(&[], 0));
        assert!(matches!(age_category_or(&g, "z", 0.5), Err(Error::MissingGroup(_))));
    }

    #[test]
    fn focal_only_category_is_overrepresented() {
        let mut g = IndexMap::new();
        g.insert("a".to_string(), counts(&[("c", 2)], 5));
        g.insert("b".to_string(), counts(&[("c", 0)], 7));
        for s in [1e-3, 0.5, 10.0] {
            assert!(age_category_or(&g, "a", s).unwrap()[0].odds_ratio > 1.0);
        }
    }
}
