use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Axis, DemographicAxes};
use crate::error::{Error, Result};
use crate::lexical_bias::{EmbeddingTable, DEFAULT_SMOOTHING};
use crate::lexicons::{BaseVerbs, CompiledLexicon, MarkerSet, WordSets};
use crate::persuasion::{PersuasionLexicons, DEFAULT_LAMBDA};
use crate::style_bias::ContrastMode;

/// One association test: salient words of an axis against two attribute sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatSpec {
    pub axis: Axis,
    pub attr_a: String,
    pub attr_b: String,
}

/// Knobs of an audit run. Every field has a default; a config file may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub smoothing: f64,
    pub lambda: f64,
    /// Emotion rows with p below this are reported in the filtered table.
    pub p_threshold: f64,
    pub top_k: usize,
    pub pos_filter: Vec<String>,
    pub male: String,
    pub female: String,
    pub emotion_age_pairs: Vec<(String, String)>,
    pub persuasion_age_pairs: Vec<(String, String)>,
    pub age_mode: ContrastMode,
    pub weat: Vec<WeatSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
        let weat = |axis, a: &str, b: &str| WeatSpec {
            axis,
            attr_a: a.into(),
            attr_b: b.into(),
        };
        RunConfig {
            smoothing: DEFAULT_SMOOTHING,
            lambda: DEFAULT_LAMBDA,
            p_threshold: 0.05,
            top_k: 10,
            pos_filter: vec!["NOUN".into(), "ADJ".into()],
            male: "Male".into(),
            female: "Female".into(),
            emotion_age_pairs: vec![
                pair("Young Adult (18-24)", "Senior (65+)"),
                pair("Early Working Age Group (25-44)", "Late Working Age Group (45-64)"),
            ],
            persuasion_age_pairs: vec![pair("Late Working Age Group (45-64)", "Senior (65+)")],
            age_mode: ContrastMode::Paired,
            weat: vec![
                weat(Axis::Gender, "Career", "Family"),
                weat(Axis::Gender, "Power", "Support"),
                weat(Axis::AgeGroup, "Innovation", "Tradition"),
                weat(Axis::AgeGroup, "Energy", "Experience"),
            ],
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(raw: &str) -> Result<Self> {
        toml::from_str(raw).map_err(|e| Error::Config(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Config(format!(
                "smoothing must be positive, got {}",
                self.smoothing
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(Error::Config(format!(
                "p threshold must lie in (0, 1), got {}",
                self.p_threshold
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top-k must be at least 1".into()));
        }
        for w in &self.weat {
            if !matches!(w.axis, Axis::Gender | Axis::AgeGroup) {
                return Err(Error::Config(format!(
                    "association tests run on gender or age_group, not {}",
                    w.axis.name()
                )));
            }
        }
        Ok(())
    }

    /// Validates and rewrites group labels to their canonical form under `axes`.
    pub fn resolve(&self, axes: &DemographicAxes) -> Result<RunConfig> {
        self.validate()?;
        let norm = |axis: Axis, v: &str| {
            axes.normalize(axis, v)
                .ok_or_else(|| Error::Config(format!("unknown {} label {v:?} in run config", axis.name())))
        };
        let pairs = |ps: &[(String, String)]| {
            ps.iter()
                .map(|(a, b)| Ok((norm(Axis::AgeGroup, a)?, norm(Axis::AgeGroup, b)?)))
                .collect::<Result<Vec<_>>>()
        };
        let mut out = self.clone();
        out.male = norm(Axis::Gender, &self.male)?;
        out.female = norm(Axis::Gender, &self.female)?;
        out.emotion_age_pairs = pairs(&self.emotion_age_pairs)?;
        out.persuasion_age_pairs = pairs(&self.persuasion_age_pairs)?;
        out.pos_filter = self.pos_filter.iter().map(|p| p.trim().to_uppercase()).collect();
        Ok(out)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_of<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("resource serializes"))
}

/// Lexical resources an audit reads, each with a content hash for provenance.
#[derive(Debug, Clone)]
pub struct Resources {
    pub gender_lexicon: CompiledLexicon,
    pub age_lexicon: CompiledLexicon,
    pub markers: MarkerSet,
    pub base_verbs: BaseVerbs,
    pub word_sets: WordSets,
    pub embeddings: Option<EmbeddingTable>,
    embeddings_hash: Option<String>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            gender_lexicon: CompiledLexicon::default_gender(),
            age_lexicon: CompiledLexicon::default_age(),
            markers: MarkerSet::default_set(),
            base_verbs: BaseVerbs::default_set(),
            word_sets: WordSets::default_sets(),
            embeddings: None,
            embeddings_hash: None,
        }
    }
}

impl Resources {
    /// Reads whitespace-separated word vectors from `path`.
    pub fn with_embeddings_file(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let table = EmbeddingTable::read(bytes.as_slice())?;
        self.embeddings_hash = Some(sha256_hex(&bytes));
        self.embeddings = Some(table);
        Ok(self)
    }

    pub fn with_embeddings(mut self, table: EmbeddingTable, content_hash: String) -> Self {
        self.embeddings = Some(table);
        self.embeddings_hash = Some(content_hash);
        self
    }

    pub fn persuasion(&self) -> PersuasionLexicons<'_> {
        PersuasionLexicons {
            markers: &self.markers,
            base_verbs: &self.base_verbs,
        }
    }

    /// Resource name to SHA-256 of its canonical content.
    pub fn hashes(&self) -> IndexMap<&'static str, String> {
        let mut out = IndexMap::new();
        out.insert("gender_lexicon", hash_of(&self.gender_lexicon));
        out.insert("age_lexicon", hash_of(&self.age_lexicon));
        out.insert("markers", hash_of(&self.markers));
        out.insert("base_verbs", hash_of(&self.base_verbs));
        out.insert("word_sets", hash_of(&self.word_sets));
        if let Some(h) = &self.embeddings_hash {
            out.insert("embeddings", h.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_resolve() {
        let axes = DemographicAxes::builtin();
        let cfg = RunConfig::default().resolve(&axes).unwrap();
        assert_eq!(cfg.emotion_age_pairs[0].1, "Senior (65+)");
        let short = RunConfig::from_toml_str("persuasion_age_pairs = [['LW', 'S']]").unwrap();
        let short = short.resolve(&axes).unwrap();
        assert_eq!(short.persuasion_age_pairs, cfg.persuasion_age_pairs);
    }

    #[test]
    fn invalid_knobs_rejected() {
        for raw in ["smoothing = 0.0", "lambda = -1.0", "p_threshold = 1.0", "top_k = 0"] {
            let cfg = RunConfig::from_toml_str(raw).unwrap();
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{raw}");
        }
        assert!(RunConfig::from_toml_str("nonsense = 1").is_err());
        let bad = RunConfig::from_toml_str("male = 'Man'").unwrap();
        assert!(bad.resolve(&DemographicAxes::builtin()).is_err());
    }

    #[test]
    fn hashes_are_stable_and_content_sensitive() {
        let a = Resources::default().hashes();
        assert_eq!(a, Resources::default().hashes());
        let mut r = Resources::default();
        r.markers.hedges.insert("arguably".into());
        assert_ne!(a["markers"], r.hashes()["markers"]);
    }
}
