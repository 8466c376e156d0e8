//! Persuasion features (agency, modal certainty, imperatives), the Persuasion
//! Bias Index, group aggregates, gaps and tests.

mod significance;

use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::corpus::{Axis, EnrichedCorpus, Keyed};
use crate::error::{Error, Result};
use crate::lexicons::{Agency, BaseVerbs, MarkerSet, Token};

pub use significance::{
    age_persuasion_tests, gender_persuasion_tests, sanity_correlations, AgePersuasionTests,
    CorrelationRow, FeatureTest,
};

pub const DEFAULT_LAMBDA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImperativeSource {
    Sidecar,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenSource {
    Sidecar,
    Builtin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersuasionFeatures {
    pub message_id: String,
    pub high_agency: u32,
    pub low_agency: u32,
    pub certainty: u32,
    pub hedges: u32,
    pub imp_count: u32,
    /// `(H-L)/(H+L)`, undefined without agency verbs.
    pub agency: Option<f64>,
    /// `(C-Hdg)/(C+Hdg)`, undefined without modal markers.
    pub modal: Option<f64>,
    /// `lambda * imp_count`.
    pub imperative: f64,
    pub pbi: f64,
    pub imperative_source: ImperativeSource,
    pub token_source: TokenSource,
}

/// A per-message feature that can be aggregated and tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Feature {
    #[serde(rename = "A")]
    Agency,
    #[serde(rename = "M")]
    Modal,
    #[serde(rename = "I")]
    Imperative,
    #[serde(rename = "PBI")]
    Pbi,
}

impl Feature {
    pub const ALL: [Feature; 4] = [Feature::Agency, Feature::Modal, Feature::Imperative, Feature::Pbi];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Agency => "A",
            Feature::Modal => "M",
            Feature::Imperative => "I",
            Feature::Pbi => "PBI",
        }
    }

    /// The feature value; `None` when undefined for this message.
    pub fn value(self, f: &PersuasionFeatures) -> Option<f64> {
        match self {
            Feature::Agency => f.agency,
            Feature::Modal => f.modal,
            Feature::Imperative => Some(f.imperative),
            Feature::Pbi => Some(f.pbi),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn balance(pos: u32, neg: u32) -> Option<f64> {
    let total = pos + neg;
    (total > 0).then(|| (pos as f64 - neg as f64) / total as f64)
}

/// Resources the feature extractor reads.
#[derive(Debug, Clone, Copy)]
pub struct PersuasionLexicons<'a> {
    pub markers: &'a MarkerSet,
    pub base_verbs: &'a BaseVerbs,
}

/// Sentences opening with a base-form or agency verb that is not a modal marker.
pub fn heuristic_imperatives(tokens: &[Token], lex: PersuasionLexicons<'_>) -> u32 {
    tokens
        .iter()
        .filter(|t| t.sent_initial)
        .filter(|t| !lex.markers.is_marker(&t.lower))
        .filter(|t| {
            lex.base_verbs.contains(&t.lower)
                || lex.markers.agency_high.contains(&t.lower)
                || lex.markers.agency_low.contains(&t.lower)
        })
        .count() as u32
}

/// Features of one message.
///
/// Agency verbs are matched on every token, or only on `VERB` tokens when
/// POS tags are present. `imperative_count` from a sidecar wins over the heuristic.
pub fn persuasion_features(
    message_id: &str,
    tokens: &[Token],
    token_source: TokenSource,
    imperative_count: Option<u32>,
    lex: PersuasionLexicons<'_>,
    lambda: f64,
) -> Result<PersuasionFeatures> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let (mut h, mut l, mut c, mut hdg) = (0, 0, 0, 0);
    for t in tokens {
        if lex.markers.is_certainty(&t.lower) {
            c += 1;
        } else if lex.markers.is_hedge(&t.lower) {
            hdg += 1;
        }
        if t.pos.as_deref().is_some_and(|p| p != "VERB") {
            continue;
        }
        match lex.markers.agency(&t.lower) {
            Some(Agency::High) => h += 1,
            Some(Agency::Low) => l += 1,
            None => {}
        }
    }
    let (imp_count, imperative_source) = match imperative_count {
        Some(n) => (n, ImperativeSource::Sidecar),
        None => (heuristic_imperatives(tokens, lex), ImperativeSource::Heuristic),
    };
    let agency = balance(h, l);
    let modal = balance(c, hdg);
    let imperative = lambda * imp_count as f64;
    Ok(PersuasionFeatures {
        message_id: message_id.to_string(),
        high_agency: h,
        low_agency: l,
        certainty: c,
        hedges: hdg,
        imp_count,
        agency,
        modal,
        imperative,
        pbi: agency.unwrap_or(0.0) + modal.unwrap_or(0.0) + imperative,
        imperative_source,
        token_source,
    })
}

/// Features for every message, in corpus order.
pub fn corpus_features(
    enriched: &EnrichedCorpus,
    lex: PersuasionLexicons<'_>,
    lambda: f64,
) -> Result<Vec<PersuasionFeatures>> {
    enriched
        .iter()
        .map(|(m, a)| {
            let source = if a.tokens.is_some() { TokenSource::Sidecar } else { TokenSource::Builtin };
            let tokens = a.tokens_or_tokenize(&m.text);
            persuasion_features(&m.id, &tokens, source, a.imperative_count, lex, lambda)
        })
        .collect()
}

pub type FeatureGroups<'a> = IndexMap<String, Vec<Keyed<&'a PersuasionFeatures>>>;

/// Groups features (aligned with `enriched`) by the labels of `axis`, keyed for pairing.
pub fn group_features<'a>(
    enriched: &EnrichedCorpus,
    features: &'a [PersuasionFeatures],
    axis: Axis,
) -> FeatureGroups<'a> {
    let mut groups: FeatureGroups<'a> = enriched
        .corpus()
        .axes()
        .labels(axis)
        .into_iter()
        .map(|l| (l.to_string(), Vec::new()))
        .collect();
    for ((m, _), f) in enriched.iter().zip(features) {
        if let Some(label) = m.label(axis) {
            groups.entry(label.to_string()).or_default().push(Keyed {
                key: m.pairing_key(axis),
                value: f,
            });
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPersuasion {
    pub group: String,
    pub n_total: usize,
    pub n_a_defined: usize,
    pub n_m_defined: usize,
    pub mean_a: Option<f64>,
    pub mean_m: Option<f64>,
    pub mean_i: f64,
    pub mean_pbi: f64,
    /// Mean raw imperative count.
    pub mean_imp_count: f64,
}

fn mean_defined<I: Iterator<Item = Option<f64>>>(values: I) -> (usize, Option<f64>) {
    let defined: Vec<f64> = values.flatten().collect();
    let n = defined.len();
    (n, (n > 0).then(|| defined.iter().sum::<f64>() / n as f64))
}

/// Group means: A and M over their defined subsets, I and PBI over all messages.
pub fn group_persuasion(groups: &FeatureGroups<'_>) -> Result<Vec<GroupPersuasion>> {
    groups
        .iter()
        .map(|(label, rows)| {
            if rows.is_empty() {
                return Err(Error::InsufficientData(format!("group {label:?} has no messages")));
            }
            let n = rows.len() as f64;
            let (n_a, mean_a) = mean_defined(rows.iter().map(|r| r.value.agency));
            let (n_m, mean_m) = mean_defined(rows.iter().map(|r| r.value.modal));
            Ok(GroupPersuasion {
                group: label.clone(),
                n_total: rows.len(),
                n_a_defined: n_a,
                n_m_defined: n_m,
                mean_a,
                mean_m,
                mean_i: rows.iter().map(|r| r.value.imperative).sum::<f64>() / n,
                mean_pbi: rows.iter().map(|r| r.value.pbi).sum::<f64>() / n,
                mean_imp_count: rows.iter().map(|r| r.value.imp_count as f64).sum::<f64>() / n,
            })
        })
        .collect()
}

fn pb<'a>(groups: &'a [GroupPersuasion], label: &str) -> Result<&'a GroupPersuasion> {
    groups
        .iter()
        .find(|g| g.group == label)
        .ok_or_else(|| Error::MissingGroup(label.to_string()))
}

/// `PB(male) - PB(female)`.
pub fn gender_gap(groups: &[GroupPersuasion], male: &str, female: &str) -> Result<f64> {
    Ok(pb(groups, male)?.mean_pbi - pb(groups, female)?.mean_pbi)
}

/// Population variance of the age-group PBI means.
pub fn age_gap<S: AsRef<str>>(groups: &[GroupPersuasion], ages: &[S]) -> Result<f64> {
    if ages.len() < 2 {
        return Err(Error::InsufficientData("age gap needs at least two groups".into()));
    }
    let means = ages
        .iter()
        .map(|a| pb(groups, a.as_ref()).map(|g| g.mean_pbi))
        .collect::<Result<Vec<f64>>>()?;
    let mu = means.iter().sum::<f64>() / means.len() as f64;
    Ok(means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / means.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PersuasionGaps {
    pub delta_gender: f64,
    pub delta_age: f64,
}

pub fn persuasion_gaps<S: AsRef<str>>(
    gender_groups: &[GroupPersuasion],
    male: &str,
    female: &str,
    age_groups: &[GroupPersuasion],
    ages: &[S],
) -> Result<PersuasionGaps> {
    Ok(PersuasionGaps {
        delta_gender: gender_gap(gender_groups, male, female)?,
        delta_age: age_gap(age_groups, ages)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicons::tokenize;

    fn lex_fixture() -> (MarkerSet, BaseVerbs) {
        let markers = MarkerSet::new(
            &["will", "must", "shall", "definitely", "certainly"],
            &["might", "may", "could", "can", "perhaps", "possible"],
            &["lead", "build", "act", "win"],
            &["wait", "suffer"],
        )
        .unwrap();
        (markers, BaseVerbs::parse("join\nact\nplant\n"))
    }

    fn features(text: &str, imp: Option<u32>) -> PersuasionFeatures {
        let (m, v) = lex_fixture();
        let lex = PersuasionLexicons { markers: &m, base_verbs: &v };
        persuasion_features("x", &tokenize(text), TokenSource::Builtin, imp, lex, 0.05).unwrap()
    }

    #[test]
    fn agency_ratio() {
        let f = features("They lead, build and win while others wait.", Some(0));
        assert_eq!((f.high_agency, f.low_agency), (3, 1));
        assert_eq!(f.agency, Some(0.5));
    }

    #[test]
    fn balanced_modals() {
        let f = features("We will act. We might act.", Some(0));
        assert_eq!((f.certainty, f.hedges, f.modal), (1, 1, Some(0.0)));
    }

    #[test]
    fn undefined_agency_counts_as_zero() {
        let f = features("It definitely will happen.", Some(2));
        assert_eq!(f.agency, None);
        assert_eq!(f.modal, Some(1.0));
        assert!((f.imperative - 0.1).abs() < 1e-15);
        assert!((f.pbi - 1.1).abs() < 1e-12);
        assert_eq!(f.imperative_source, ImperativeSource::Sidecar);
    }

    #[test]
    fn heuristic_imperatives_skip_markers() {
        let f = features("Join us. Plant trees! Will you? Maybe later. Act now.", None);
        assert_eq!(f.imp_count, 3);
        assert_eq!(f.imperative_source, ImperativeSource::Heuristic);
    }

    #[test]
    fn lambda_must_be_positive() {
        let (m, v) = lex_fixture();
        let lex = PersuasionLexicons { markers: &m, base_verbs: &v };
        assert!(matches!(
            persuasion_features("x", &[], TokenSource::Builtin, None, lex, 0.0),
            Err(Error::Config(_))
        ));
    }

    fn group(label: &str, pbis: &[f64]) -> GroupPersuasion {
        GroupPersuasion {
            group: label.into(),
            n_total: pbis.len(),
            n_a_defined: 0,
            n_m_defined: 0,
            mean_a: None,
            mean_m: None,
            mean_i: 0.0,
            mean_pbi: pbis.iter().sum::<f64>() / pbis.len() as f64,
            mean_imp_count: 0.0,
        }
    }

    #[test]
    fn gaps() {
        let g = [group("Male", &[0.5]), group("Female", &[0.2])];
        assert!((gender_gap(&g, "Male", "Female").unwrap() - 0.3).abs() < 1e-15);
        assert!((gender_gap(&g, "Female", "Male").unwrap() + 0.3).abs() < 1e-15);
        let a = [group("y", &[0.1]), group("s", &[0.3])];
        assert!((age_gap(&a, &["y", "s"]).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(gender_gap(&g, "Male", "X"), Err(Error::MissingGroup(_))));
    }

    #[test]
    fn group_means_over_defined_subsets() {
        let mk = |a: Option<f64>, pbi: f64| PersuasionFeatures {
            message_id: "m".into(),
            high_agency: 0,
            low_agency: 0,
            certainty: 0,
            hedges: 0,
            imp_count: 0,
            agency: a,
            modal: None,
            imperative: 0.0,
            pbi,
            imperative_source: ImperativeSource::Sidecar,
            token_source: TokenSource::Sidecar,
        };
        let f = [mk(Some(1.0), 0.2), mk(None, 0.6)];
        let mut groups: FeatureGroups = IndexMap::new();
        groups.insert("g".into(), f.iter().map(|v| Keyed { key: String::new(), value: v }).collect());
        let r = &group_persuasion(&groups).unwrap()[0];
        assert_eq!((r.n_total, r.n_a_defined, r.mean_a, r.mean_m), (2, 1, Some(1.0), None));
        assert!((r.mean_pbi - 0.4).abs() < 1e-15);
    }
}
