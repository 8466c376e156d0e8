use std::collections::HashMap;
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};

/// Word vectors keyed by lowercase word, stored unit-normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

fn normalise(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(v.into_iter().map(|x| x / norm).collect())
}

impl EmbeddingTable {
    /// Builds a table; zero vectors are dropped, the first of duplicate words wins.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut table = EmbeddingTable {
            dim: 0,
            vectors: HashMap::new(),
        };
        for (word, v) in pairs {
            table.insert(word.as_ref(), v)?;
        }
        Ok(table)
    }

    fn insert(&mut self, word: &str, v: Vec<f64>) -> Result<()> {
        if self.dim == 0 {
            self.dim = v.len();
        } else if v.len() != self.dim {
            return Err(Error::Invariant(format!(
                "vector for {word:?} has dimension {}, expected {}",
                v.len(),
                self.dim
            )));
        }
        let key = word.to_lowercase();
        if self.vectors.contains_key(&key) {
            return Ok(());
        }
        match normalise(v) {
            Some(u) => {
                self.vectors.insert(key, u);
            }
            None => log::warn!("embedding for {word:?} has zero norm; dropped"),
        }
        Ok(())
    }

    /// Reads `word v1 ... vd` lines; a leading `count dim` header is skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = EmbeddingTable {
            dim: 0,
            vectors: HashMap::new(),
        };
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let rest: Vec<&str> = parts.collect();
            if line_no == 1 && rest.len() == 1 && word.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
            let v = rest
                .iter()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Malformed {
                    line: line_no,
                    message: format!("bad vector component: {e}"),
                })?;
            if v.is_empty() {
                return Err(Error::Malformed {
                    line: line_no,
                    message: format!("no vector for {word:?}"),
                });
            }
            table.insert(word, v).map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSetCoverage {
    pub set: &'static str,
    pub found: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeatResult {
    pub raw_statistic: f64,
    pub effect_size: f64,
    pub coverage: Vec<WordSetCoverage>,
}

fn lookup<'a, S: AsRef<str>>(
    name: &'static str,
    words: &[S],
    emb: &'a EmbeddingTable,
) -> (Vec<&'a [f64]>, WordSetCoverage) {
    let found: Vec<&[f64]> = words.iter().filter_map(|w| emb.get(w.as_ref())).collect();
    let cov = WordSetCoverage {
        set: name,
        found: found.len(),
        missing: words.len() - found.len(),
    };
    (found, cov)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Differential association of targets X vs Y with attributes A vs B.
///
/// `effect_size` divides by the sample standard deviation of the per-word
/// associations over X ∪ Y; it is 0 when those associations are all equal.
pub fn weat<S: AsRef<str>>(
    targets_x: &[S],
    targets_y: &[S],
    attrs_a: &[S],
    attrs_b: &[S],
    emb: &EmbeddingTable,
) -> Result<WeatResult> {
    let (x, cx) = lookup("X", targets_x, emb);
    let (y, cy) = lookup("Y", targets_y, emb);
    let (a, ca) = lookup("A", attrs_a, emb);
    let (b, cb) = lookup("B", attrs_b, emb);
    for (vecs, cov) in [(&x, &cx), (&y, &cy), (&a, &ca), (&b, &cb)] {
        if vecs.is_empty() {
            return Err(Error::InsufficientVocabulary(format!(
                "no word of set {} is in the embedding table ({} missing)",
                cov.set, cov.missing
            )));
        }
    }
    let mean_cos = |w: &[f64], set: &[&[f64]]| set.iter().map(|v| dot(w, v)).sum::<f64>() / set.len() as f64;
    let assoc = |w: &[f64]| mean_cos(w, &a) - mean_cos(w, &b);
    let sx: Vec<f64> = x.iter().map(|w| assoc(w)).collect();
    let sy: Vec<f64> = y.iter().map(|w| assoc(w)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let raw = mean(&sx) - mean(&sy);
    let all: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    let m = mean(&all);
    let var = all.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (all.len() - 1) as f64;
    let sd = var.sqrt();
    let effect = if sd > 1e-15 { raw / sd } else { 0.0 };
    Ok(WeatResult {
        raw_statistic: raw,
        effect_size: effect,
        coverage: vec![cx, cy, ca, cb],
    })
}
