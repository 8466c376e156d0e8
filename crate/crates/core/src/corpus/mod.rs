//! Conditioned-message data model, prompt grids, and corpus/sidecar ingestion.

mod axes;
mod grid;
mod sidecar;

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use axes::{Axis, DemographicAxes};
pub use grid::{build_prompt_grid, stamp_models, PromptRecord, PromptTemplates};
pub use sidecar::{
    join_sidecars, read_sidecars, Annotation, Coverage, EnrichedCorpus, SidecarRecord,
    EMOTION_COUNT, EMOTION_LABELS,
};

/// Generation setting: descriptor-only (SG) or context-rich (CRG).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "SG")]
    Sg,
    #[serde(rename = "CRG")]
    Crg,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Sg => "SG",
            Setting::Crg => "CRG",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sg" => Ok(Setting::Sg),
            "crg" => Ok(Setting::Crg),
            other => Err(Error::Config(format!("unknown setting {other:?}"))),
        }
    }
}

/// One cell of a prompt grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub setting: Setting,
    pub gender: String,
    pub age_group: String,
    pub stance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<String>,
    pub rendered_prompt: String,
}

/// A generated message with its conditioning labels.
///
/// Field order here is the canonical `messages.jsonl` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub model_id: String,
    pub setting: Setting,
    pub gender: String,
    pub age_group: String,
    pub stance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme: Option<String>,
    pub text: String,
}

impl Message {
    pub fn label(&self, axis: Axis) -> Option<&str> {
        match axis {
            Axis::Gender => Some(&self.gender),
            Axis::AgeGroup => Some(&self.age_group),
            Axis::Stance => Some(&self.stance),
            Axis::Region => self.region.as_deref(),
            Axis::Theme => self.theme.as_deref(),
        }
    }

    /// Key shared by messages that differ only in age group.
    pub fn age_pairing_key(&self) -> String {
        self.pairing_key(Axis::AgeGroup)
    }

    /// The (region, theme, stance, gender, age group) cell with `axis` left out,
    /// shared by messages that differ only on `axis`.
    pub fn pairing_key(&self, axis: Axis) -> String {
        [Axis::Region, Axis::Theme, Axis::Stance, Axis::Gender, Axis::AgeGroup]
            .into_iter()
            .filter(|a| *a != axis)
            .map(|a| self.label(a).unwrap_or(""))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// A value tagged with the pairing key of the message it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Keyed<T> {
    pub key: String,
    pub value: T,
}

/// A validated collection of messages; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    messages: Vec<Message>,
    axes: DemographicAxes,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, validating every message against `axes`.
    pub fn new(messages: Vec<Message>, axes: DemographicAxes) -> Result<Self> {
        let mut corpus = Corpus {
            messages: Vec::with_capacity(messages.len()),
            axes,
            index: HashMap::new(),
        };
        for (i, m) in messages.into_iter().enumerate() {
            corpus.push(i + 1, m)?;
        }
        Ok(corpus)
    }

    fn push(&mut self, line: usize, m: Message) -> Result<()> {
        let m = validate_message(&self.axes, line, m)?;
        if self.index.contains_key(&m.id) {
            return Err(Error::DuplicateId { line, id: m.id });
        }
        self.index.insert(m.id.clone(), self.messages.len());
        self.messages.push(m);
        Ok(())
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn axes(&self) -> &DemographicAxes {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Distinct model ids, sorted.
    pub fn model_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.messages.iter().map(|m| m.model_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

fn validate_message(axes: &DemographicAxes, line: usize, mut m: Message) -> Result<Message> {
    if m.id.trim().is_empty() {
        return Err(Error::Malformed {
            line,
            message: "empty id".into(),
        });
    }
    if m.text.trim().is_empty() {
        return Err(Error::Malformed {
            line,
            message: format!("message {:?} has empty text", m.id),
        });
    }
    let norm = |axis: Axis, value: &str| {
        axes.normalize(axis, value).ok_or_else(|| Error::UnknownLabel {
            line,
            axis: axis.name(),
            value: value.to_string(),
        })
    };
    m.gender = norm(Axis::Gender, &m.gender)?;
    m.age_group = norm(Axis::AgeGroup, &m.age_group)?;
    m.stance = norm(Axis::Stance, &m.stance)?;
    match m.setting {
        Setting::Sg => {
            if m.region.is_some() || m.theme.is_some() {
                return Err(Error::Malformed {
                    line,
                    message: "SG messages carry no region or theme".into(),
                });
            }
        }
        Setting::Crg => {
            let (Some(region), Some(theme)) = (&m.region, &m.theme) else {
                return Err(Error::Malformed {
                    line,
                    message: "CRG messages need both region and theme".into(),
                });
            };
            let region = norm(Axis::Region, region)?;
            let theme = norm(Axis::Theme, theme)?;
            if !axes.themes_for(&m.stance).contains(&theme) {
                return Err(Error::UnknownLabel {
                    line,
                    axis: "theme",
                    value: format!("{theme} (stance {})", m.stance),
                });
            }
            m.region = Some(region);
            m.theme = Some(theme);
        }
    }
    Ok(m)
}

/// Reads line-delimited message records into a validated corpus.
///
/// Blank lines are skipped; an empty stream yields an empty corpus.
pub fn ingest_corpus<R: BufRead>(reader: R, axes: &DemographicAxes) -> Result<Corpus> {
    let mut corpus = Corpus::new(Vec::new(), axes.clone())?;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let m: Message = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        corpus.push(line_no, m)?;
    }
    if corpus.is_empty() {
        log::warn!("ingested an empty corpus");
    }
    Ok(corpus)
}

/// Writes the canonical line-delimited form of `corpus`.
pub fn emit_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for m in corpus.messages() {
        serde_json::to_writer(&mut writer, m)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}
