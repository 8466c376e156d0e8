//! Config-file defaults merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use demobias::audit::{Resources, RunConfig};
use demobias::corpus::DemographicAxes;
use demobias::lexicons::{BaseVerbs, CompiledLexicon, MarkerSet, WordSets};
use serde::Deserialize;

/// Resource paths a config file may name; relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub axes: Option<PathBuf>,
    pub gender_lexicon: Option<PathBuf>,
    pub age_lexicon: Option<PathBuf>,
    pub markers: Option<PathBuf>,
    pub agency: Option<PathBuf>,
    pub base_verbs: Option<PathBuf>,
    pub weat_sets: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Contents of the file named by `--config` or `DEMOBIAS_CONFIG`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub paths: Paths,
    pub run: RunConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| demobias::Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.axes,
            &mut p.gender_lexicon,
            &mut p.age_lexicon,
            &mut p.markers,
            &mut p.agency,
            &mut p.base_verbs,
            &mut p.weat_sets,
            &mut p.embeddings,
            &mut p.out,
        ] {
            if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                *slot = Some(base.join(rel));
            }
        }
        Ok(cfg)
    }
}

pub fn load_axes(path: Option<&Path>) -> Result<DemographicAxes> {
    Ok(match path {
        Some(p) => DemographicAxes::load(p)?,
        None => DemographicAxes::builtin(),
    })
}

/// A `--lexicon kind=path` argument.
#[derive(Debug, Clone)]
pub struct LexiconArg {
    pub kind: LexiconKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    Gender,
    Age,
}

pub fn parse_lexicon_arg(raw: &str) -> std::result::Result<LexiconArg, String> {
    let (kind, path) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected gender=PATH or age=PATH, got {raw:?}"))?;
    let kind = match kind.trim() {
        "gender" => LexiconKind::Gender,
        "age" | "age_group" => LexiconKind::Age,
        other => return Err(format!("unknown lexicon kind {other:?}; use gender or age")),
    };
    Ok(LexiconArg {
        kind,
        path: PathBuf::from(path),
    })
}

/// Loads every resource, preferring flags over config-file paths over shipped defaults.
pub fn load_resources(paths: &Paths, lexicons: &[LexiconArg]) -> Result<Resources> {
    let mut res = Resources::default();
    let pick = |kind: LexiconKind, fallback: &Option<PathBuf>| -> Option<PathBuf> {
        lexicons
            .iter()
            .rev()
            .find(|l| l.kind == kind)
            .map(|l| l.path.clone())
            .or_else(|| fallback.clone())
    };
    if let Some(p) = pick(LexiconKind::Gender, &paths.gender_lexicon) {
        res.gender_lexicon = CompiledLexicon::load(&p)?;
    }
    if let Some(p) = pick(LexiconKind::Age, &paths.age_lexicon) {
        res.age_lexicon = CompiledLexicon::load(&p)?;
    }
    let mut markers = MarkerSet::default_set();
    if let Some(p) = &paths.markers {
        markers = markers.with_marker_file(p)?;
    }
    if let Some(p) = &paths.agency {
        markers = markers.with_agency_file(p)?;
    }
    res.markers = markers;
    if let Some(p) = &paths.base_verbs {
        res.base_verbs = BaseVerbs::load(p)?;
    }
    if let Some(p) = &paths.weat_sets {
        res.word_sets = WordSets::load(p)?;
    }
    if let Some(p) = &paths.embeddings {
        res = res.with_embeddings_file(p)?;
    }
    Ok(res)
}

pub fn check_out_dir(out: &Path) -> Result<()> {
    if out.exists() && !out.is_dir() {
        bail!("output path {} exists and is not a directory", out.display());
    }
    Ok(())
}
