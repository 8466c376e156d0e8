use std::collections::BTreeSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MARKERS: &str = include_str!("../../data/markers.toml");
const AGENCY: &str = include_str!("../../data/agency_default.tsv");
const BASE_VERBS: &str = include_str!("../../data/base_verbs.txt");
const WEAT_SETS: &str = include_str!("../../data/weat_sets.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agency {
    High,
    Low,
}

#[derive(Debug, Deserialize)]
struct RawMarkers {
    certainty: Vec<String>,
    hedges: Vec<String>,
}

/// Certainty and hedge markers plus high/low agency verb lemmas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkerSet {
    pub certainty: BTreeSet<String>,
    pub hedges: BTreeSet<String>,
    pub agency_high: BTreeSet<String>,
    pub agency_low: BTreeSet<String>,
}

fn lower_set<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> BTreeSet<String> {
    words
        .into_iter()
        .map(|w| w.as_ref().trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

impl MarkerSet {
    pub fn new<S: AsRef<str>>(
        certainty: &[S],
        hedges: &[S],
        agency_high: &[S],
        agency_low: &[S],
    ) -> Result<Self> {
        let set = MarkerSet {
            certainty: lower_set(certainty),
            hedges: lower_set(hedges),
            agency_high: lower_set(agency_high),
            agency_low: lower_set(agency_low),
        };
        set.check()?;
        Ok(set)
    }

    fn check(&self) -> Result<()> {
        if let Some(w) = self.certainty.intersection(&self.hedges).next() {
            return Err(Error::Config(format!("{w:?} is both a certainty marker and a hedge")));
        }
        if let Some(w) = self.agency_high.intersection(&self.agency_low).next() {
            return Err(Error::Config(format!("{w:?} is both high- and low-agency")));
        }
        Ok(())
    }

    /// Shipped markers and the placeholder agency list.
    pub fn default_set() -> Self {
        let raw: RawMarkers = toml::from_str(MARKERS).expect("embedded markers parse");
        let (high, low) = parse_agency(AGENCY, "<embedded>").expect("embedded agency parses");
        let set = MarkerSet {
            certainty: lower_set(&raw.certainty),
            hedges: lower_set(&raw.hedges),
            agency_high: high,
            agency_low: low,
        };
        set.check().expect("embedded markers are disjoint");
        set
    }

    /// Replaces certainty/hedge lists from a `{certainty, hedges}` file.
    pub fn with_marker_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: RawMarkers = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, e))?
        };
        self.certainty = lower_set(&raw.certainty);
        self.hedges = lower_set(&raw.hedges);
        self.check()?;
        Ok(self)
    }

    /// Replaces the agency lemmas from a `verb<TAB>high|low` file.
    pub fn with_agency_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (high, low) = parse_agency(&text, &path.display().to_string())?;
        self.agency_high = high;
        self.agency_low = low;
        self.check()?;
        Ok(self)
    }

    pub fn is_certainty(&self, lower: &str) -> bool {
        self.certainty.contains(lower)
    }

    pub fn is_hedge(&self, lower: &str) -> bool {
        self.hedges.contains(lower)
    }

    pub fn is_marker(&self, lower: &str) -> bool {
        self.is_certainty(lower) || self.is_hedge(lower)
    }

    /// Agency of a token, matching its lower form or a naive `-s`/`-ed`/`-ing` strip.
    pub fn agency(&self, lower: &str) -> Option<Agency> {
        lemma_candidates(lower).into_iter().find_map(|c| {
            if self.agency_high.contains(&c) {
                Some(Agency::High)
            } else if self.agency_low.contains(&c) {
                Some(Agency::Low)
            } else {
                None
            }
        })
    }
}

fn parse_agency(text: &str, origin: &str) -> Result<(BTreeSet<String>, BTreeSet<String>)> {
    let mut high = BTreeSet::new();
    let mut low = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(verb), Some(level), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Config(format!(
                "{origin}:{}: expected verb<TAB>high|low",
                i + 1
            )));
        };
        let verb = verb.trim().to_lowercase();
        match level.trim().to_lowercase().as_str() {
            "high" => high.insert(verb),
            "low" => low.insert(verb),
            other => {
                return Err(Error::Config(format!(
                    "{origin}:{}: agency level {other:?} is not high or low",
                    i + 1
                )))
            }
        };
    }
    Ok((high, low))
}

/// The word itself followed by naive lemma guesses.
pub(crate) fn lemma_candidates(word: &str) -> Vec<String> {
    let mut out = vec![word.to_string()];
    let mut push = |s: String| {
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    };
    for suffix in ["ing", "ed", "es", "s"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            if stem.len() < 2 {
                continue;
            }
            push(stem.to_string());
            if suffix == "ing" || suffix == "ed" {
                push(format!("{stem}e"));
                let b = stem.as_bytes();
                if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
                    push(stem[..stem.len() - 1].to_string());
                }
            }
            if suffix == "ed" {
                if let Some(s) = stem.strip_suffix('i') {
                    push(format!("{s}y"));
                }
            }
        }
    }
    out
}

/// Base-form verbs used to recognise imperative sentence openers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseVerbs(pub BTreeSet<String>);

impl BaseVerbs {
    pub fn parse(text: &str) -> Self {
        BaseVerbs(lower_set(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn default_set() -> Self {
        Self::parse(BASE_VERBS)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, lower: &str) -> bool {
        self.0.contains(lower)
    }
}

/// Named attribute word sets for association tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSets {
    pub sets: IndexMap<String, Vec<String>>,
}

impl WordSets {
    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let mut sets: WordSets =
            toml::from_str(raw).map_err(|e| Error::Config(format!("word sets: {e}")))?;
        for words in sets.sets.values_mut() {
            for w in words.iter_mut() {
                *w = w.trim().to_lowercase();
            }
        }
        Ok(sets)
    }

    pub fn default_sets() -> Self {
        Self::from_toml_str(WEAT_SETS).expect("embedded word sets parse")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn get(&self, name: &str) -> Result<&[String]> {
        self.sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("unknown word set {name:?}")))
    }
}
