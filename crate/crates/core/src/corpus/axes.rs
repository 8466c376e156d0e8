use std::collections::HashSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_AXES: &str = include_str!("../../data/axes.toml");

/// Descriptor axes the prompt grid iterates over.
///
/// `aliases` maps alternative spellings (e.g. `"YA"`) to canonical labels and
/// is the only normalization applied to incoming labels besides trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DemographicAxes {
    #[serde(default)]
    pub genders: Vec<String>,
    #[serde(default)]
    pub age_groups: Vec<String>,
    #[serde(default)]
    pub stances: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub themes_by_stance: Option<IndexMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub aliases: IndexMap<String, String>,
}

/// A labelled dimension of a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Gender,
    AgeGroup,
    Stance,
    Region,
    Theme,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Gender => "gender",
            Axis::AgeGroup => "age_group",
            Axis::Stance => "stance",
            Axis::Region => "region",
            Axis::Theme => "theme",
        }
    }
}

impl DemographicAxes {
    /// The CRG descriptor axes; SG uses the gender, age and stance subset.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_AXES).expect("embedded axes parse")
    }

    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let axes: DemographicAxes =
            toml::from_str(raw).map_err(|e| Error::Config(format!("axes: {e}")))?;
        axes.check_unique()?;
        Ok(axes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let axes: DemographicAxes = if is_json {
            serde_json::from_str(&raw).map_err(|e| Error::parse(path, e))?
        } else {
            toml::from_str(&raw).map_err(|e| Error::parse(path, e))?
        };
        axes.check_unique()?;
        Ok(axes)
    }

    fn check_unique(&self) -> Result<()> {
        fn unique(axis: &str, labels: &[String]) -> Result<()> {
            let mut seen = HashSet::new();
            for l in labels {
                if !seen.insert(l.as_str()) {
                    return Err(Error::Config(format!("duplicate {axis} label {l:?}")));
                }
            }
            Ok(())
        }
        unique("gender", &self.genders)?;
        unique("age_group", &self.age_groups)?;
        unique("stance", &self.stances)?;
        if let Some(r) = &self.regions {
            unique("region", r)?;
        }
        if let Some(themes) = &self.themes_by_stance {
            for (stance, list) in themes {
                if !self.stances.contains(stance) {
                    return Err(Error::Config(format!(
                        "themes declared for unknown stance {stance:?}"
                    )));
                }
                unique(&format!("theme ({stance})"), list)?;
            }
        }
        for (alias, target) in &self.aliases {
            if !self.all_labels().any(|l| l == target) {
                return Err(Error::Config(format!(
                    "alias {alias:?} points at unknown label {target:?}"
                )));
            }
        }
        Ok(())
    }

    fn all_labels(&self) -> impl Iterator<Item = &String> {
        self.genders
            .iter()
            .chain(&self.age_groups)
            .chain(&self.stances)
            .chain(self.regions.iter().flatten())
            .chain(self.themes_by_stance.iter().flat_map(|m| m.values().flatten()))
    }

    /// Labels declared on `axis`. Themes are the union over stances in first-seen order.
    pub fn labels(&self, axis: Axis) -> Vec<&str> {
        match axis {
            Axis::Gender => self.genders.iter().map(String::as_str).collect(),
            Axis::AgeGroup => self.age_groups.iter().map(String::as_str).collect(),
            Axis::Stance => self.stances.iter().map(String::as_str).collect(),
            Axis::Region => self.regions.iter().flatten().map(String::as_str).collect(),
            Axis::Theme => {
                let mut out: Vec<&str> = Vec::new();
                for t in self.themes_by_stance.iter().flat_map(|m| m.values().flatten()) {
                    if !out.contains(&t.as_str()) {
                        out.push(t);
                    }
                }
                out
            }
        }
    }

    pub fn themes_for(&self, stance: &str) -> &[String] {
        self.themes_by_stance
            .as_ref()
            .and_then(|m| m.get(stance))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Normalizes `value` against `axis`, returning the canonical label.
    pub fn normalize(&self, axis: Axis, value: &str) -> Option<String> {
        let trimmed = value.trim();
        let candidate = self
            .aliases
            .get(trimmed)
            .map(String::as_str)
            .unwrap_or(trimmed);
        self.labels(axis)
            .into_iter()
            .find(|l| *l == candidate)
            .map(str::to_string)
    }
}
