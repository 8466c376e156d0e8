use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use super::{odds_ratio, OrResult};
use crate::corpus::{Axis, EnrichedCorpus};
use crate::error::{Error, Result};
use crate::lexicons::CompiledLexicon;

/// Highest- and lowest-OR words for group A against group B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalientWords {
    /// Descending OR: words most characteristic of group A.
    pub top: Vec<OrResult>,
    /// Ascending OR: words most characteristic of group B. Disjoint from `top`.
    pub bottom: Vec<OrResult>,
}

#[derive(Default)]
struct WordCounts {
    words: BTreeMap<String, (u64, u64)>,
    total_a: u64,
    total_b: u64,
}

fn rank(a: &OrResult, b: &OrResult) -> Ordering {
    b.odds_ratio
        .total_cmp(&a.odds_ratio)
        .then((b.e_focal + b.e_rest).cmp(&(a.e_focal + a.e_rest)))
        .then(a.label.cmp(&b.label))
}

fn rank_bottom(a: &OrResult, b: &OrResult) -> Ordering {
    a.odds_ratio
        .total_cmp(&b.odds_ratio)
        .then((b.e_focal + b.e_rest).cmp(&(a.e_focal + a.e_rest)))
        .then(a.label.cmp(&b.label))
}

/// Word-level ORs over POS-filtered tokens.
///
/// `T` for each group is its count of tokens passing the POS filter. With
/// `restrict`, only words matching the lexicon are scored (totals unchanged).
#[allow(clippy::too_many_arguments)]
pub fn salient_word_or<S: AsRef<str>>(
    enriched: &EnrichedCorpus,
    axis: Axis,
    group_a: &[S],
    group_b: &[S],
    pos_filter: &[S],
    restrict: Option<&CompiledLexicon>,
    s: f64,
    k: usize,
) -> Result<SalientWords> {
    let in_group = |label: &str, g: &[S]| g.iter().any(|x| x.as_ref() == label);
    let pos_ok = |pos: &str| pos_filter.iter().any(|p| p.as_ref().eq_ignore_ascii_case(pos));
    let group_name = group_a.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("+");

    let mut uncovered = Vec::new();
    let mut counts = WordCounts::default();
    for (m, ann) in enriched.iter() {
        let Some(label) = m.label(axis) else { continue };
        let side_a = in_group(label, group_a);
        if !side_a && !in_group(label, group_b) {
            continue;
        }
        if !ann.has_pos() {
            uncovered.push(m.id.clone());
            continue;
        }
        for tok in ann.tokens.as_deref().unwrap_or(&[]) {
            if !tok.pos.as_deref().is_some_and(pos_ok) {
                continue;
            }
            if side_a {
                counts.total_a += 1;
            } else {
                counts.total_b += 1;
            }
            if restrict.is_some_and(|lex| !lex.matches_any(&tok.lower)) {
                continue;
            }
            let entry = counts.words.entry(tok.lower.clone()).or_default();
            if side_a {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    if !uncovered.is_empty() {
        return Err(Error::MissingPos(uncovered));
    }

    let mut all = counts
        .words
        .into_iter()
        .map(|(word, (ea, eb))| {
            Ok(OrResult {
                odds_ratio: odds_ratio(ea, counts.total_a, eb, counts.total_b, s)?,
                label: word,
                group: group_name.clone(),
                e_focal: ea,
                t_focal: counts.total_a,
                e_rest: eb,
                t_rest: counts.total_b,
                s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(rank);
    let top: Vec<OrResult> = all.iter().take(k).cloned().collect();
    let mut rest: Vec<OrResult> = all.into_iter().skip(top.len()).collect();
    rest.sort_by(rank_bottom);
    rest.truncate(k);
    Ok(SalientWords { top, bottom: rest })
}
