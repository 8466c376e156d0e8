use std::path::Path;

use serde::{Deserialize, Serialize};

use super::axes::DemographicAxes;
use super::{PromptSpec, Setting};
use crate::error::{Error, Result};

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.toml");

const PLACEHOLDERS: [&str; 5] = ["gender", "age_group", "stance", "region", "theme"];

/// Prompt templates with `{gender}`, `{age_group}`, `{stance}`, `{region}`
/// and `{theme}` placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub sg: String,
    pub crg: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        toml::from_str(DEFAULT_TEMPLATES).expect("embedded templates parse")
    }
}

impl PromptTemplates {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&raw).map_err(|e| Error::parse(path, e))
    }

    pub fn for_setting(&self, setting: Setting) -> &str {
        match setting {
            Setting::Sg => &self.sg,
            Setting::Crg => &self.crg,
        }
    }
}

fn required_placeholders(setting: Setting) -> &'static [&'static str] {
    match setting {
        Setting::Sg => &PLACEHOLDERS[..3],
        Setting::Crg => &PLACEHOLDERS,
    }
}

fn check_template(setting: Setting, template: &str) -> Result<()> {
    for name in required_placeholders(setting) {
        if !template.contains(&format!("{{{name}}}")) {
            return Err(Error::Template(format!(
                "{} template lacks the {{{name}}} placeholder",
                setting.as_str()
            )));
        }
    }
    if setting == Setting::Sg {
        for name in &PLACEHOLDERS[3..] {
            if template.contains(&format!("{{{name}}}")) {
                return Err(Error::Template(format!(
                    "SG template uses {{{name}}}, which SG prompts do not carry"
                )));
            }
        }
    }
    Ok(())
}

fn residual_placeholder(text: &str) -> Option<&str> {
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        let tail = &rest[start + 1..];
        if let Some(end) = tail.find('}') {
            let name = &tail[..end];
            if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Some(name);
            }
        }
        rest = tail;
    }
    None
}

fn render(template: &str, fields: &[(&str, &str)]) -> Result<String> {
    let mut out = template.to_string();
    for (name, value) in fields {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    if let Some(name) = residual_placeholder(&out) {
        return Err(Error::Template(format!("unresolved placeholder {{{name}}}")));
    }
    Ok(out)
}

fn non_empty<'a>(axis: &str, labels: &'a [String]) -> Result<&'a [String]> {
    if labels.is_empty() {
        return Err(Error::Config(format!("axis {axis} is empty")));
    }
    Ok(labels)
}

/// Cartesian product of the setting's axes in declaration order, row-major.
///
/// SG iterates gender, age group, stance. CRG iterates gender, age group,
/// stance, region, then the stance's themes.
pub fn build_prompt_grid(
    axes: &DemographicAxes,
    setting: Setting,
    template: &str,
) -> Result<Vec<PromptSpec>> {
    check_template(setting, template)?;
    let genders = non_empty("gender", &axes.genders)?;
    let ages = non_empty("age_group", &axes.age_groups)?;
    let stances = non_empty("stance", &axes.stances)?;
    let mut out = Vec::new();
    match setting {
        Setting::Sg => {
            for g in genders {
                for a in ages {
                    for s in stances {
                        let rendered =
                            render(template, &[("gender", g), ("age_group", a), ("stance", s)])?;
                        out.push(PromptSpec {
                            setting,
                            gender: g.clone(),
                            age_group: a.clone(),
                            stance: s.clone(),
                            region: None,
                            theme: None,
                            rendered_prompt: rendered,
                        });
                    }
                }
            }
        }
        Setting::Crg => {
            let regions = non_empty("region", axes.regions.as_deref().unwrap_or(&[]))?;
            for s in stances {
                non_empty(&format!("theme ({s})"), axes.themes_for(s))?;
            }
            for g in genders {
                for a in ages {
                    for s in stances {
                        for r in regions {
                            for t in axes.themes_for(s) {
                                let rendered = render(
                                    template,
                                    &[
                                        ("gender", g),
                                        ("age_group", a),
                                        ("stance", s),
                                        ("region", r),
                                        ("theme", t),
                                    ],
                                )?;
                                out.push(PromptSpec {
                                    setting,
                                    gender: g.clone(),
                                    age_group: a.clone(),
                                    stance: s.clone(),
                                    region: Some(r.clone()),
                                    theme: Some(t.clone()),
                                    rendered_prompt: rendered,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One line of `prompts.jsonl`: a prompt spec, optionally stamped with a model id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(flatten)]
    pub spec: PromptSpec,
}

/// Expands a grid over model profiles; without models the grid is returned unstamped.
pub fn stamp_models(grid: &[PromptSpec], models: &[String]) -> Vec<PromptRecord> {
    if models.is_empty() {
        return grid
            .iter()
            .map(|spec| PromptRecord {
                model_id: None,
                spec: spec.clone(),
            })
            .collect();
    }
    models
        .iter()
        .flat_map(|m| {
            grid.iter().map(move |spec| PromptRecord {
                model_id: Some(m.clone()),
                spec: spec.clone(),
            })
        })
        .collect()
}
