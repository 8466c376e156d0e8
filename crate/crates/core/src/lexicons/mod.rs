//! Trait lexicons, marker lists and the tokenizer they are matched against.

mod markers;
mod tokenize;

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use markers::{Agency, BaseVerbs, MarkerSet, WordSets};
pub use tokenize::{tokenize, Token};

const GENDER_LEXICON: &str = include_str!("../../data/gender_lexicon.toml");
const AGE_LEXICON: &str = include_str!("../../data/age_lexicon.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Exact,
    StemPrefix,
    /// Hyphen-joined compound; `stem` marks a trailing `*`. Interior `*` match any run.
    Multiword { stem: bool },
}

/// One compiled table entry. `pattern` is lowercase with any trailing `*` removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconPattern {
    pub kind: PatternKind,
    pub pattern: String,
}

impl LexiconPattern {
    pub fn compile(raw: &str) -> Option<Self> {
        let lower = raw
            .trim()
            .to_lowercase()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join("-");
        let stem = lower.ends_with('*');
        let pattern = lower.trim_end_matches('*').to_string();
        if pattern.is_empty() {
            return None;
        }
        let kind = if pattern.contains('-') || pattern.contains('*') {
            PatternKind::Multiword { stem }
        } else if stem {
            PatternKind::StemPrefix
        } else {
            PatternKind::Exact
        };
        Some(LexiconPattern { kind, pattern })
    }

    pub fn matches(&self, token: &str) -> bool {
        match self.kind {
            PatternKind::Exact => token == self.pattern,
            PatternKind::StemPrefix => token.starts_with(&self.pattern),
            PatternKind::Multiword { stem } => glob_match(&self.pattern, token, stem),
        }
    }

    /// The literal text every match starts with.
    pub fn leading_literal(&self) -> &str {
        self.pattern.split('*').next().unwrap_or("")
    }
}

fn glob_match(pattern: &str, token: &str, open_end: bool) -> bool {
    let pieces: Vec<&str> = pattern.split('*').collect();
    let (first, rest) = pieces.split_first().expect("split yields one piece");
    let Some(mut tail) = token.strip_prefix(first) else {
        return false;
    };
    for (i, piece) in rest.iter().enumerate() {
        let last = i + 1 == rest.len();
        if last && !open_end {
            return tail.ends_with(piece);
        }
        match tail.find(piece) {
            Some(at) => tail = &tail[at + piece.len()..],
            None => return false,
        }
    }
    open_end || tail.is_empty()
}

/// On-disk lexicon: `{name, categories: {label: [words]}}`.
#[derive(Debug, Clone, Deserialize)]
struct RawLexicon {
    name: String,
    categories: IndexMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledLexicon {
    pub name: String,
    pub categories: IndexMap<String, Vec<LexiconPattern>>,
}

/// Compiles raw table rows; duplicates within a category are dropped.
pub fn compile_lexicon(
    name: &str,
    raw: &IndexMap<String, Vec<String>>,
) -> Result<CompiledLexicon> {
    if raw.is_empty() {
        return Err(Error::Config(format!("lexicon {name:?} has no categories")));
    }
    let mut categories = IndexMap::new();
    for (label, words) in raw {
        let mut patterns: Vec<LexiconPattern> = Vec::new();
        for w in words {
            if let Some(p) = LexiconPattern::compile(w) {
                if !patterns.contains(&p) {
                    patterns.push(p);
                }
            }
        }
        if patterns.is_empty() {
            return Err(Error::Config(format!(
                "lexicon {name:?}: category {label:?} is empty"
            )));
        }
        categories.insert(label.clone(), patterns);
    }
    Ok(CompiledLexicon {
        name: name.to_string(),
        categories,
    })
}

impl CompiledLexicon {
    fn from_raw(raw: RawLexicon) -> Result<Self> {
        compile_lexicon(&raw.name, &raw.categories)
    }

    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let raw: RawLexicon =
            toml::from_str(raw).map_err(|e| Error::Config(format!("lexicon: {e}")))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: RawLexicon = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, e))?
        };
        Self::from_raw(raw)
    }

    /// The nine gender-trait categories.
    pub fn default_gender() -> Self {
        Self::from_toml_str(GENDER_LEXICON).expect("embedded gender lexicon compiles")
    }

    /// The twelve age-trait categories.
    pub fn default_age() -> Self {
        Self::from_toml_str(AGE_LEXICON).expect("embedded age lexicon compiles")
    }

    pub fn category_labels(&self) -> Vec<&str> {
        self.categories.keys().map(String::as_str).collect()
    }

    /// Categories `token` falls into, each at most once.
    pub fn categories_of<'a>(&'a self, token: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.categories
            .iter()
            .filter(move |(_, pats)| pats.iter().any(|p| p.matches(token)))
            .map(|(label, _)| label.as_str())
    }

    pub fn matches_any(&self, token: &str) -> bool {
        self.categories_of(token).next().is_some()
    }
}

/// Per-category occurrence counts `E(c)` and their sum `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub counts: IndexMap<String, u64>,
    pub total: u64,
}

impl CategoryCounts {
    pub fn zeros(lexicon: &CompiledLexicon) -> Self {
        CategoryCounts {
            counts: lexicon.categories.keys().map(|k| (k.clone(), 0)).collect(),
            total: 0,
        }
    }

    pub fn get(&self, category: &str) -> u64 {
        self.counts.get(category).copied().unwrap_or(0)
    }

    pub fn add(&mut self, other: &CategoryCounts) {
        for (k, v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.total += other.total;
    }
}

/// Counts category hits over lowercase token forms.
pub fn match_categories<S: AsRef<str>>(tokens: &[S], lexicon: &CompiledLexicon) -> CategoryCounts {
    let mut counts = CategoryCounts::zeros(lexicon);
    for tok in tokens {
        for label in lexicon.categories_of(tok.as_ref()) {
            counts.counts[label] += 1;
            counts.total += 1;
        }
    }
    counts
}
