use std::borrow::Cow;
use std::collections::BTreeSet;
use std::io::BufRead;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Corpus, Message};
use crate::error::{Error, Result};
use crate::lexicons::{tokenize, Token};

pub const EMOTION_COUNT: usize = 28;

/// The 27 fine-grained emotion classes plus neutral, in classifier output order.
pub const EMOTION_LABELS: [&str; EMOTION_COUNT] = [
    "admiration",
    "amusement",
    "anger",
    "annoyance",
    "approval",
    "caring",
    "confusion",
    "curiosity",
    "desire",
    "disappointment",
    "disapproval",
    "disgust",
    "embarrassment",
    "excitement",
    "fear",
    "gratitude",
    "grief",
    "joy",
    "love",
    "nervousness",
    "optimism",
    "pride",
    "realization",
    "relief",
    "remorse",
    "sadness",
    "surprise",
    "neutral",
];

/// Externally computed annotations for one message (`sidecar.jsonl` line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub message_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<Token>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imperative_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formality_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
}

impl SidecarRecord {
    pub fn validate(&self) -> Result<()> {
        let id = &self.message_id;
        if let Some(p) = self.formality_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invariant(format!(
                    "{id}: formality_prob {p} outside [0, 1]"
                )));
            }
        }
        if let Some(s) = self.sentiment {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::Invariant(format!(
                    "{id}: sentiment {s} outside [-1, 1]"
                )));
            }
        }
        if let Some(e) = &self.emotion_probs {
            if e.len() != EMOTION_COUNT {
                return Err(Error::Invariant(format!(
                    "{id}: emotion_probs has {} entries, expected {EMOTION_COUNT}",
                    e.len()
                )));
            }
            if let Some(bad) = e.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Invariant(format!(
                    "{id}: emotion probability {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = e.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Invariant(format!(
                    "{id}: emotion probabilities sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Reads `sidecar.jsonl`, validating each record.
pub fn read_sidecars<R: BufRead>(reader: R) -> Result<Vec<SidecarRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SidecarRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        rec.validate().map_err(|e| match e {
            Error::Invariant(m) => Error::Invariant(format!("line {line_no}: {m}")),
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Merged annotations for one message.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub tokens: Option<Vec<Token>>,
    pub imperative_count: Option<u32>,
    pub formality_prob: Option<f64>,
    pub emotion_probs: Option<Vec<f64>>,
    pub sentiment: Option<f64>,
}

impl Annotation {
    fn merge(&mut self, rec: SidecarRecord) {
        if rec.tokens.is_some() {
            self.tokens = rec.tokens;
        }
        if rec.imperative_count.is_some() {
            self.imperative_count = rec.imperative_count;
        }
        if rec.formality_prob.is_some() {
            self.formality_prob = rec.formality_prob;
        }
        if rec.emotion_probs.is_some() {
            self.emotion_probs = rec.emotion_probs;
        }
        if rec.sentiment.is_some() {
            self.sentiment = rec.sentiment;
        }
    }

    /// Sidecar tokens when present, otherwise the built-in tokenizer over `text`.
    pub fn tokens_or_tokenize(&self, text: &str) -> Cow<'_, [Token]> {
        match &self.tokens {
            Some(t) => Cow::Borrowed(t.as_slice()),
            None => Cow::Owned(tokenize(text)),
        }
    }

    pub fn has_pos(&self) -> bool {
        self.tokens
            .as_ref()
            .is_some_and(|t| t.iter().all(|tok| tok.pos.is_some()))
    }
}

/// Which messages carry each optional annotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub total: usize,
    /// field name → ids of messages missing it
    pub missing: IndexMap<&'static str, Vec<String>>,
}

impl Coverage {
    pub const FIELDS: [&'static str; 5] = [
        "tokens",
        "imperative_count",
        "formality_prob",
        "emotion_probs",
        "sentiment",
    ];

    pub fn present(&self, field: &str) -> usize {
        self.total - self.missing.get(field).map_or(0, Vec::len)
    }

    pub fn fraction(&self, field: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.present(field) as f64 / self.total as f64
    }
}

/// A corpus with per-message annotations aligned by position.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichedCorpus {
    corpus: Corpus,
    annotations: Vec<Annotation>,
}

/// Joins sidecar records onto `corpus`; later records overwrite earlier ones field by field.
pub fn join_sidecars(corpus: Corpus, sidecars: Vec<SidecarRecord>) -> Result<EnrichedCorpus> {
    let orphans: BTreeSet<String> = sidecars
        .iter()
        .filter(|r| corpus.position(&r.message_id).is_none())
        .map(|r| r.message_id.clone())
        .collect();
    if !orphans.is_empty() {
        return Err(Error::OrphanSidecar(orphans.into_iter().collect()));
    }
    let mut annotations = vec![Annotation::default(); corpus.len()];
    for rec in sidecars {
        rec.validate()?;
        let pos = corpus.position(&rec.message_id).expect("checked above");
        annotations[pos].merge(rec);
    }
    Ok(EnrichedCorpus {
        corpus,
        annotations,
    })
}

impl EnrichedCorpus {
    pub fn bare(corpus: Corpus) -> Self {
        let annotations = vec![Annotation::default(); corpus.len()];
        EnrichedCorpus {
            corpus,
            annotations,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn len(&self) -> usize {
        self.corpus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corpus.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Message, &Annotation)> {
        self.corpus.messages().iter().zip(&self.annotations)
    }

    pub fn annotation(&self, id: &str) -> Option<&Annotation> {
        self.corpus.position(id).map(|i| &self.annotations[i])
    }

    /// The sub-corpus of messages satisfying `keep`.
    pub fn filter<F: Fn(&Message) -> bool>(&self, keep: F) -> EnrichedCorpus {
        let (messages, annotations): (Vec<Message>, Vec<Annotation>) = self
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, a)| (m.clone(), a.clone()))
            .unzip();
        let corpus = Corpus::new(messages, self.corpus.axes().clone())
            .expect("subset of a valid corpus is valid");
        EnrichedCorpus {
            corpus,
            annotations,
        }
    }

    pub fn coverage(&self) -> Coverage {
        let mut missing: IndexMap<&'static str, Vec<String>> =
            Coverage::FIELDS.iter().map(|f| (*f, Vec::new())).collect();
        for (m, a) in self.iter() {
            let flags = [
                a.tokens.is_some(),
                a.imperative_count.is_some(),
                a.formality_prob.is_some(),
                a.emotion_probs.is_some(),
                a.sentiment.is_some(),
            ];
            for (field, present) in Coverage::FIELDS.iter().zip(flags) {
                if !present {
                    missing[*field].push(m.id.clone());
                }
            }
        }
        Coverage {
            total: self.len(),
            missing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DemographicAxes, Setting};

    fn corpus(n: usize) -> Corpus {
        let messages = (0..n)
            .map(|i| Message {
                id: format!("m{i}"),
                model_id: "x".into(),
                setting: Setting::Sg,
                gender: "Male".into(),
                age_group: "Senior (65+)".into(),
                stance: "pro-energy".into(),
                region: None,
                theme: None,
                text: "Act now.".into(),
            })
            .collect();
        Corpus::new(messages, DemographicAxes::builtin()).unwrap()
    }

    fn full(id: &str) -> SidecarRecord {
        let mut e = vec![0.0; EMOTION_COUNT];
        e[EMOTION_COUNT - 1] = 1.0;
        SidecarRecord {
            message_id: id.into(),
            tokens: Some(vec![]),
            imperative_count: Some(1),
            formality_prob: Some(0.5),
            emotion_probs: Some(e),
            sentiment: Some(0.1),
        }
    }

    #[test]
    fn full_join_covers_everything() {
        let e = join_sidecars(corpus(3), vec![full("m0"), full("m1"), full("m2")]).unwrap();
        let cov = e.coverage();
        for f in Coverage::FIELDS {
            assert_eq!(cov.fraction(f), 1.0);
        }
    }

    #[test]
    fn partial_join_reports_missing() {
        let e = join_sidecars(corpus(3), vec![full("m0"), full("m2")]).unwrap();
        let cov = e.coverage();
        assert_eq!(cov.present("formality_prob"), 2);
        assert_eq!(cov.missing["formality_prob"], vec!["m1".to_string()]);
    }

    #[test]
    fn later_records_overwrite_field_by_field() {
        let later = SidecarRecord {
            message_id: "m0".into(),
            tokens: None,
            imperative_count: None,
            formality_prob: Some(0.9),
            emotion_probs: None,
            sentiment: None,
        };
        let e = join_sidecars(corpus(1), vec![full("m0"), later]).unwrap();
        let a = e.annotation("m0").unwrap();
        assert_eq!(a.formality_prob, Some(0.9));
        assert_eq!(a.imperative_count, Some(1));
    }

    #[test]
    fn orphans_and_bad_emotions() {
        let err = join_sidecars(corpus(1), vec![full("zz"), full("yy")]).unwrap_err();
        match err {
            Error::OrphanSidecar(ids) => assert_eq!(ids, vec!["yy", "zz"]),
            other => panic!("unexpected {other:?}"),
        }
        let mut bad = full("m0");
        bad.emotion_probs = Some(vec![1.0 / 27.0; 27]);
        assert!(matches!(bad.validate(), Err(Error::Invariant(_))));
        let line = serde_json::to_string(&bad).unwrap();
        assert!(matches!(read_sidecars(line.as_bytes()), Err(Error::Invariant(_))));
    }
}
