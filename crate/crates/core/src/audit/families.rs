use indexmap::IndexMap;
use serde_json::{json, Value};

use super::{fmt_num, Audit, AuditContext, FamilyReport, Resources, RunConfig, Table};
use crate::corpus::{Axis, EnrichedCorpus};
use crate::error::{Error, Result};
use crate::insights::{correspondence_analysis, hierarchical_cluster, log_or_matrix, ContingencyTable};
use crate::lexical_bias::{
    age_category_or, counts_by_label, gender_category_or, salient_word_or, weat, OrResult,
    SalientWords,
};
use crate::lexicons::CategoryCounts;
use crate::persuasion::{
    age_persuasion_tests, corpus_features, gender_persuasion_tests, group_features,
    group_persuasion, sanity_correlations, FeatureGroups, FeatureTest, GroupPersuasion,
    ImperativeSource, TokenSource,
};
use crate::stats::{Df, TestResult, Tier};
use crate::style_bias::{
    age_formality_bias, emotion_contrast, emotion_matrices, gender_formality_bias, ContrastMode,
    EmotionContrast, StyleScoreSet,
};

/// Turns data-shaped failures of one analysis into a warning; anything else propagates.
fn soft<T>(res: Result<T>, what: &str, warnings: &mut Vec<String>) -> Result<Option<T>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(
            e @ (Error::InsufficientData(_)
            | Error::DegenerateVariance(_)
            | Error::UndefinedCorrelation(_)
            | Error::MissingGroup(_)
            | Error::MissingPos(_)
            | Error::InsufficientVocabulary(_)),
        ) => {
            warnings.push(format!("{what} skipped: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Labels of `axis` carried by at least one message, in axis order.
fn present_labels(corpus: &EnrichedCorpus, axis: Axis) -> Vec<String> {
    corpus
        .corpus()
        .axes()
        .labels(axis)
        .into_iter()
        .filter(|l| corpus.iter().any(|(m, _)| m.label(axis) == Some(*l)))
        .map(str::to_string)
        .collect()
}

fn num(x: f64) -> String {
    fmt_num(Some(x))
}

fn int<T: ToString>(x: T) -> String {
    x.to_string()
}

fn test_cells(t: Option<&TestResult>) -> Vec<String> {
    match t {
        Some(t) => vec![
            num(t.statistic),
            fmt_num(t.df.single()),
            num(t.p_value),
            t.tier.to_string(),
        ],
        None => vec!["NA".into(); 4],
    }
}

fn anova_cells(t: Option<&TestResult>) -> Vec<String> {
    match t {
        Some(TestResult {
            statistic,
            df: Df::Pair(d1, d2),
            p_value,
            tier,
        }) => vec![num(*statistic), num(*d1), num(*d2), num(*p_value), tier.to_string()],
        _ => vec!["NA".into(); 5],
    }
}

fn missing_field_warning(corpus: &EnrichedCorpus, field: &str, warnings: &mut Vec<String>) {
    let cov = corpus.coverage();
    let absent = cov.total - cov.present(field);
    if absent > 0 && absent < cov.total {
        warnings.push(format!(
            "{absent} of {} messages lack {field} and are left out",
            cov.total
        ));
    }
}

fn no_field(corpus: &EnrichedCorpus, field: &str, hint: &str) -> Vec<String> {
    if corpus.coverage().present(field) == 0 {
        vec![format!("no message carries {field} ({hint})")]
    } else {
        Vec::new()
    }
}

// ---------------------------------------------------------------- lexical

const OR_HEADER: [&str; 9] = [
    "category", "group", "OR", "log_OR", "E_focal", "T_focal", "E_rest", "T_rest", "s",
];

fn or_row(r: &OrResult) -> Vec<String> {
    vec![
        r.label.clone(),
        r.group.clone(),
        num(r.odds_ratio),
        num(r.odds_ratio.ln()),
        int(r.e_focal),
        int(r.t_focal),
        int(r.e_rest),
        int(r.t_rest),
        num(r.s),
    ]
}

/// Age-category ORs of every present age group against the pooled others.
fn age_ors(
    corpus: &EnrichedCorpus,
    lexicon: &crate::lexicons::CompiledLexicon,
    s: f64,
    warnings: &mut Vec<String>,
) -> Result<Vec<OrResult>> {
    let ages = present_labels(corpus, Axis::AgeGroup);
    if ages.len() < 2 {
        warnings.push(format!(
            "age odds ratios skipped: {} age group(s) present, need 2",
            ages.len()
        ));
        return Ok(Vec::new());
    }
    let counts: IndexMap<String, CategoryCounts> = counts_by_label(corpus, Axis::AgeGroup, lexicon)
        .into_iter()
        .filter(|(k, _)| ages.contains(k))
        .collect();
    let mut out = Vec::new();
    for a in &ages {
        out.extend(age_category_or(&counts, a, s)?);
    }
    Ok(out)
}

/// Category ORs, salient words and association tests.
pub struct LexicalAudit;

impl LexicalAudit {
    fn salient(
        &self,
        ctx: &AuditContext<'_>,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<(Axis, String, String, SalientWords)>> {
        let (corpus, cfg) = (ctx.corpus, ctx.config);
        if !corpus.iter().any(|(_, a)| a.has_pos()) {
            warnings.push(
                "salient words and association tests skipped: no POS-tagged tokens in the sidecars"
                    .into(),
            );
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let genders = present_labels(corpus, Axis::Gender);
        if genders.contains(&cfg.male) && genders.contains(&cfg.female) {
            let words = salient_word_or(
                corpus,
                Axis::Gender,
                &[cfg.male.as_str()],
                &[cfg.female.as_str()],
                &cfg.pos_filter.iter().map(String::as_str).collect::<Vec<_>>(),
                None,
                cfg.smoothing,
                cfg.top_k,
            );
            if let Some(w) = soft(words, "gender salient words", warnings)? {
                out.push((Axis::Gender, cfg.male.clone(), cfg.female.clone(), w));
            }
        } else {
            warnings.push("gender salient words skipped: both genders are needed".into());
        }
        let ages = present_labels(corpus, Axis::AgeGroup);
        if ages.len() >= 2 {
            for focal in &ages {
                let rest: Vec<&str> = ages.iter().filter(|a| *a != focal).map(String::as_str).collect();
                let words = salient_word_or(
                    corpus,
                    Axis::AgeGroup,
                    &[focal.as_str()],
                    &rest,
                    &cfg.pos_filter.iter().map(String::as_str).collect::<Vec<_>>(),
                    None,
                    cfg.smoothing,
                    cfg.top_k,
                );
                if let Some(w) = soft(words, &format!("salient words for {focal}"), warnings)? {
                    out.push((Axis::AgeGroup, focal.clone(), "rest".to_string(), w));
                }
            }
        }
        Ok(out)
    }
}

impl Audit for LexicalAudit {
    fn name(&self) -> &'static str {
        "lexical"
    }

    fn description(&self) -> &'static str {
        "lexicon-category and salient-word odds ratios, word-embedding association tests"
    }

    fn missing_inputs(&self, _corpus: &EnrichedCorpus, config: &RunConfig, resources: &Resources) -> Vec<String> {
        let mut unknown: Vec<&str> = config
            .weat
            .iter()
            .flat_map(|w| [w.attr_a.as_str(), w.attr_b.as_str()])
            .filter(|name| resources.word_sets.get(name).is_err())
            .collect();
        unknown.sort_unstable();
        unknown.dedup();
        let out: Vec<String> = unknown.iter().map(|n| format!("word set {n:?} is not defined")).collect();
        out
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport> {
        let (corpus, cfg, res) = (ctx.corpus, ctx.config, ctx.resources);
        let mut warnings = Vec::new();

        let mut gender_table = Table::new("gender_category_or", &OR_HEADER);
        let genders = present_labels(corpus, Axis::Gender);
        let mut gender_ors = Vec::new();
        if genders.contains(&cfg.male) && genders.contains(&cfg.female) {
            let counts = counts_by_label(corpus, Axis::Gender, &res.gender_lexicon);
            gender_ors = gender_category_or(&counts[&cfg.male], &counts[&cfg.female], cfg.smoothing)?;
            for r in &mut gender_ors {
                r.group = cfg.male.clone();
            }
            for r in &gender_ors {
                gender_table.push(or_row(r));
            }
        } else {
            warnings.push("gender odds ratios skipped: both genders are needed".into());
        }

        let mut age_table = Table::new("age_category_or", &OR_HEADER);
        let age_results = age_ors(corpus, &res.age_lexicon, cfg.smoothing, &mut warnings)?;
        for r in &age_results {
            age_table.push(or_row(r));
        }

        let mut salient_table = Table::new(
            "salient_words",
            &[
                "axis", "group", "contrast", "direction", "rank", "word", "OR", "E_focal",
                "T_focal", "E_rest", "T_rest",
            ],
        );
        let salient = self.salient(ctx, &mut warnings)?;
        for (axis, group, contrast, words) in &salient {
            for (direction, list) in [("top", &words.top), ("bottom", &words.bottom)] {
                for (i, r) in list.iter().enumerate() {
                    salient_table.push(vec![
                        axis.name().into(),
                        group.clone(),
                        contrast.clone(),
                        direction.into(),
                        int(i + 1),
                        r.label.clone(),
                        num(r.odds_ratio),
                        int(r.e_focal),
                        int(r.t_focal),
                        int(r.e_rest),
                        int(r.t_rest),
                    ]);
                }
            }
        }

        let mut weat_table = Table::new(
            "weat",
            &[
                "axis", "target_x", "target_y", "attr_a", "attr_b", "raw_statistic",
                "effect_size", "found_x", "missing_x", "found_y", "missing_y", "found_a",
                "missing_a", "found_b", "missing_b",
            ],
        );
        let mut weat_json = Vec::new();
        match &res.embeddings {
            None => warnings.push("association tests skipped: no embeddings given".into()),
            Some(emb) => {
                for spec in &cfg.weat {
                    let (a, b) = (res.word_sets.get(&spec.attr_a)?, res.word_sets.get(&spec.attr_b)?);
                    for (axis, group, contrast, words) in salient.iter().filter(|s| s.0 == spec.axis) {
                        let x: Vec<&str> = words.top.iter().map(|r| r.label.as_str()).collect();
                        let y: Vec<&str> = words.bottom.iter().map(|r| r.label.as_str()).collect();
                        let a: Vec<&str> = a.iter().map(String::as_str).collect();
                        let b: Vec<&str> = b.iter().map(String::as_str).collect();
                        let what = format!(
                            "association test {group} vs {contrast} on {}/{}",
                            spec.attr_a, spec.attr_b
                        );
                        let Some(w) = soft(weat(&x, &y, &a, &b, emb), &what, &mut warnings)? else {
                            continue;
                        };
                        let mut row = vec![
                            axis.name().to_string(),
                            group.clone(),
                            contrast.clone(),
                            spec.attr_a.clone(),
                            spec.attr_b.clone(),
                            num(w.raw_statistic),
                            num(w.effect_size),
                        ];
                        for c in &w.coverage {
                            row.push(int(c.found));
                            row.push(int(c.missing));
                        }
                        weat_table.push(row);
                        weat_json.push(json!({
                            "axis": axis, "target_x": group, "target_y": contrast,
                            "attr_a": spec.attr_a, "attr_b": spec.attr_b, "result": w,
                        }));
                    }
                }
            }
        }

        let salient_json: Vec<Value> = salient
            .iter()
            .map(|(axis, g, c, w)| json!({"axis": axis, "group": g, "contrast": c, "words": w}))
            .collect();
        Ok(FamilyReport {
            tables: vec![gender_table, age_table, salient_table, weat_table],
            json: json!({
                "gender_category_or": gender_ors,
                "age_category_or": age_results,
                "salient_words": salient_json,
                "weat": weat_json,
            }),
            warnings,
        })
    }
}

// ---------------------------------------------------------------- style

/// Formality gaps across gender (Welch t) and age (ANOVA + Tukey HSD).
pub struct StyleAudit;

impl Audit for StyleAudit {
    fn name(&self) -> &'static str {
        "style"
    }

    fn description(&self) -> &'static str {
        "formality differences by gender and age group"
    }

    fn missing_inputs(&self, corpus: &EnrichedCorpus, _config: &RunConfig, _resources: &Resources) -> Vec<String> {
        no_field(corpus, "formality_prob", "add formality scores to sidecar.jsonl")
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport> {
        let (corpus, cfg) = (ctx.corpus, ctx.config);
        let mut warnings = Vec::new();
        missing_field_warning(corpus, "formality_prob", &mut warnings);

        let mut gender_table = Table::new(
            "formality_gender",
            &[
                "group1", "group2", "n1", "n2", "mean1", "mean2", "b_form", "df", "p_value", "tier",
            ],
        );
        let by_gender = StyleScoreSet::from_corpus(corpus, Axis::Gender);
        let gender = soft(
            gender_formality_bias(&by_gender, &cfg.male, &cfg.female),
            "gender formality test",
            &mut warnings,
        )?;
        if let Some(t) = &gender {
            let (m, f) = (by_gender.group(&cfg.male)?, by_gender.group(&cfg.female)?);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let mut row = vec![
                cfg.male.clone(),
                cfg.female.clone(),
                int(m.len()),
                int(f.len()),
                num(mean(m)),
                num(mean(f)),
            ];
            row.extend(test_cells(Some(t)));
            gender_table.push(row);
        }

        let mut by_age = StyleScoreSet::from_corpus(corpus, Axis::AgeGroup);
        by_age.groups.retain(|_, v| !v.is_empty());
        let age = soft(age_formality_bias(&by_age), "age formality ANOVA", &mut warnings)?;
        let mut anova_table = Table::new(
            "formality_age_anova",
            &["F", "df_between", "df_within", "p_value", "tier"],
        );
        let mut groups_table = Table::new("formality_age_groups", &["group", "n", "mean"]);
        let mut tukey_table = Table::new(
            "formality_tukey",
            &["group1", "group2", "mean_diff", "q", "p_adj", "tier", "reject"],
        );
        if let Some(a) = &age {
            anova_table.push(anova_cells(Some(&a.anova)));
            for g in &a.groups {
                groups_table.push(vec![g.group.clone(), int(g.n), num(g.mean)]);
            }
            for p in &a.tukey {
                tukey_table.push(vec![
                    p.group1.clone(),
                    p.group2.clone(),
                    num(p.mean_diff),
                    num(p.q),
                    num(p.p_adj),
                    Tier::from_p(p.p_adj).to_string(),
                    p.reject.to_string(),
                ]);
            }
        }
        Ok(FamilyReport {
            tables: vec![gender_table, anova_table, groups_table, tukey_table],
            json: json!({"gender": gender, "age": age}),
            warnings,
        })
    }
}

// ---------------------------------------------------------------- emotion

/// Within-theme per-emotion contrasts for gender and selected age pairs.
pub struct EmotionAudit;

const EMOTION_HEADER: [&str; 15] = [
    "axis", "theme", "group1", "group2", "mode", "n1", "n2", "emotion", "mean_g1", "mean_g2",
    "t", "df", "p_value", "tier", "skipped",
];

fn emotion_rows(axis: Axis, c: &EmotionContrast, all: &mut Table, reported: &mut Table, threshold: f64) {
    let mode = match c.mode {
        ContrastMode::Independent => "independent",
        ContrastMode::Paired => "paired",
    };
    for r in &c.rows {
        let mut row = vec![
            axis.name().to_string(),
            c.theme.clone(),
            c.group1.clone(),
            c.group2.clone(),
            mode.into(),
            int(c.n1),
            int(c.n2),
            r.emotion.to_string(),
            num(r.mean_g1),
            num(r.mean_g2),
        ];
        row.extend(test_cells(r.test.as_ref()));
        row.push(r.skipped.clone().unwrap_or_default());
        if r.test.is_some_and(|t| t.p_value < threshold) {
            reported.push(row.clone());
        }
        all.push(row);
    }
}

impl Audit for EmotionAudit {
    fn name(&self) -> &'static str {
        "emotion"
    }

    fn description(&self) -> &'static str {
        "theme-specific emotion contrasts by gender and age"
    }

    fn missing_inputs(&self, corpus: &EnrichedCorpus, _config: &RunConfig, _resources: &Resources) -> Vec<String> {
        no_field(corpus, "emotion_probs", "add emotion distributions to sidecar.jsonl")
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport> {
        let (corpus, cfg) = (ctx.corpus, ctx.config);
        let mut warnings = Vec::new();
        missing_field_warning(corpus, "emotion_probs", &mut warnings);
        let mut all = Table::new("emotion_bias_all", &EMOTION_HEADER);
        let mut reported = Table::new("emotion_bias", &EMOTION_HEADER);
        let mut contrasts = Vec::new();

        let mut run = |axis: Axis, g1: &str, g2: &str, mode: ContrastMode, warnings: &mut Vec<String>| -> Result<()> {
            for matrix in emotion_matrices(corpus, axis) {
                let what = format!("emotion contrast {g1} vs {g2} in theme {:?}", matrix.theme);
                let res = match emotion_contrast(&matrix, g1, g2, mode) {
                    // duplicate pairing keys make the pairing ambiguous; skip like sparse cells
                    Err(Error::Invariant(m)) => Err(Error::InsufficientData(m)),
                    other => other,
                };
                if let Some(c) = soft(res, &what, warnings)? {
                    emotion_rows(axis, &c, &mut all, &mut reported, cfg.p_threshold);
                    contrasts.push(c);
                }
            }
            Ok(())
        };
        // Female first: positive t means the emotion is stronger in female-targeted text.
        run(Axis::Gender, &cfg.female, &cfg.male, ContrastMode::Independent, &mut warnings)?;
        for (a, b) in &cfg.emotion_age_pairs {
            run(Axis::AgeGroup, a, b, cfg.age_mode, &mut warnings)?;
        }
        Ok(FamilyReport {
            tables: vec![reported, all],
            json: json!({"p_threshold": cfg.p_threshold, "contrasts": contrasts}),
            warnings,
        })
    }
}

// ---------------------------------------------------------------- persuasion

/// Agency, modal certainty, imperatives and the Persuasion Bias Index.
pub struct PersuasionAudit;

fn non_empty(groups: FeatureGroups<'_>) -> FeatureGroups<'_> {
    groups.into_iter().filter(|(_, v)| !v.is_empty()).collect()
}

const REPORT_HEADER: [&str; 15] = [
    "contrast", "feature", "group1", "group2", "mode", "n1", "n2", "mean1", "mean2", "t", "df",
    "p_value", "tier", "t_direction", "skipped",
];

fn mode_name(m: ContrastMode) -> &'static str {
    match m {
        ContrastMode::Independent => "independent",
        ContrastMode::Paired => "paired",
    }
}

/// Gender rows list Female before Male; `t` stays male minus female.
fn report_row(contrast: &str, t: &FeatureTest, swap: bool) -> Vec<String> {
    let (g1, g2, n1, n2, m1, m2) = if swap {
        (&t.group2, &t.group1, t.n2, t.n1, t.mean2, t.mean1)
    } else {
        (&t.group1, &t.group2, t.n1, t.n2, t.mean1, t.mean2)
    };
    let mut row = vec![
        contrast.to_string(),
        t.feature.name().to_string(),
        g1.clone(),
        g2.clone(),
        mode_name(t.mode).into(),
        int(n1),
        int(n2),
        fmt_num(m1),
        fmt_num(m2),
    ];
    row.extend(test_cells(t.test.as_ref()));
    row.push(format!("{} - {}", t.group1, t.group2));
    row.push(t.skipped.clone().unwrap_or_default());
    row
}

fn group_rows(axis: Axis, groups: &[GroupPersuasion], table: &mut Table) {
    for g in groups {
        table.push(vec![
            axis.name().into(),
            g.group.clone(),
            int(g.n_total),
            int(g.n_a_defined),
            int(g.n_m_defined),
            fmt_num(g.mean_a),
            fmt_num(g.mean_m),
            num(g.mean_i),
            num(g.mean_pbi),
            num(g.mean_imp_count),
        ]);
    }
}

impl Audit for PersuasionAudit {
    fn name(&self) -> &'static str {
        "persuasion"
    }

    fn description(&self) -> &'static str {
        "agency, modal certainty, imperatives and the Persuasion Bias Index"
    }

    fn missing_inputs(&self, _corpus: &EnrichedCorpus, _config: &RunConfig, _resources: &Resources) -> Vec<String> {
        Vec::new()
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport> {
        let (corpus, cfg) = (ctx.corpus, ctx.config);
        let mut warnings = Vec::new();
        let features = corpus_features(corpus, ctx.resources.persuasion(), cfg.lambda)?;
        let builtin = features.iter().filter(|f| f.token_source == TokenSource::Builtin).count();
        if builtin > 0 {
            warnings.push(format!(
                "{builtin} of {} messages have no sidecar tokens; the built-in tokenizer was used",
                features.len()
            ));
        }
        let heuristic = features
            .iter()
            .filter(|f| f.imperative_source == ImperativeSource::Heuristic)
            .count();
        if heuristic > 0 {
            warnings.push(format!(
                "{heuristic} of {} messages have no imperative_count; the sentence-initial verb heuristic was used",
                features.len()
            ));
        }

        let mut feature_table = Table::new(
            "persuasion_features",
            &[
                "message_id", "gender", "age_group", "theme", "H", "L", "C", "Hdg", "imp_count",
                "A", "M", "I", "PBI", "imperative_source", "token_source",
            ],
        );
        for ((m, _), f) in corpus.iter().zip(&features) {
            feature_table.push(vec![
                f.message_id.clone(),
                m.gender.clone(),
                m.age_group.clone(),
                m.theme.clone().unwrap_or_default(),
                int(f.high_agency),
                int(f.low_agency),
                int(f.certainty),
                int(f.hedges),
                int(f.imp_count),
                fmt_num(f.agency),
                fmt_num(f.modal),
                num(f.imperative),
                num(f.pbi),
                serde_json::to_value(f.imperative_source)?.as_str().unwrap_or_default().into(),
                serde_json::to_value(f.token_source)?.as_str().unwrap_or_default().into(),
            ]);
        }

        let by_gender = non_empty(group_features(corpus, &features, Axis::Gender));
        let by_age = non_empty(group_features(corpus, &features, Axis::AgeGroup));
        let gender_groups = group_persuasion(&by_gender)?;
        let age_groups = group_persuasion(&by_age)?;
        let mut groups_table = Table::new(
            "persuasion_groups",
            &[
                "axis", "group", "n_total", "n_A", "n_M", "mean_A", "mean_M", "mean_I",
                "mean_PBI", "mean_imp_count",
            ],
        );
        group_rows(Axis::Gender, &gender_groups, &mut groups_table);
        group_rows(Axis::AgeGroup, &age_groups, &mut groups_table);

        let mut report = Table::new("persuasion_report", &REPORT_HEADER);
        let gender_tests = soft(
            gender_persuasion_tests(&by_gender, &cfg.male, &cfg.female),
            "gender persuasion tests",
            &mut warnings,
        )?;
        for t in gender_tests.iter().flatten() {
            report.push(report_row("gender", t, true));
        }
        let pairs: Vec<&(String, String)> = cfg
            .persuasion_age_pairs
            .iter()
            .filter(|(a, b)| {
                let ok = by_age.contains_key(a) && by_age.contains_key(b);
                if !ok {
                    warnings.push(format!("persuasion test {a} vs {b} skipped: group absent"));
                }
                ok
            })
            .collect();
        let pairs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let age_tests = age_persuasion_tests(&by_age, &pairs, cfg.age_mode);
        let age_tests = match age_tests {
            Err(Error::Invariant(m)) => Err(Error::InsufficientData(m)),
            other => other,
        };
        let age_tests = soft(age_tests, "age persuasion tests", &mut warnings)?;
        let mut anova_table = Table::new(
            "persuasion_anova",
            &["feature", "F", "df_between", "df_within", "p_value", "tier", "skipped"],
        );
        if let Some(a) = &age_tests {
            for t in &a.pairwise {
                report.push(report_row("age", t, false));
            }
            let mut row = vec!["PBI".to_string()];
            row.extend(anova_cells(a.anova.as_ref()));
            row.push(a.anova_skipped.clone().unwrap_or_default());
            anova_table.push(row);
        }

        let delta_gender = soft(
            crate::persuasion::gender_gap(&gender_groups, &cfg.male, &cfg.female),
            "gender PBI gap",
            &mut warnings,
        )?;
        let ages: Vec<&str> = age_groups.iter().map(|g| g.group.as_str()).collect();
        let delta_age = soft(
            crate::persuasion::age_gap(&age_groups, &ages),
            "age PBI gap",
            &mut warnings,
        )?;
        let mut gaps = Table::new("persuasion_gaps", &["delta_gender", "delta_age", "lambda"]);
        gaps.push(vec![fmt_num(delta_gender), fmt_num(delta_age), num(cfg.lambda)]);

        let mut sentiment_table = Table::new(
            "persuasion_sentiment",
            &[
                "component", "n", "pearson_r", "pearson_p", "pearson_tier", "spearman_rho",
                "spearman_p", "spearman_tier", "skipped",
            ],
        );
        let sentiment: Vec<Option<f64>> = corpus.iter().map(|(_, a)| a.sentiment).collect();
        let mut correlations = Vec::new();
        if sentiment.iter().any(Option::is_some) {
            correlations = sanity_correlations(&features, &sentiment)?;
            for c in &correlations {
                let cells = |t: Option<&TestResult>| match t {
                    Some(t) => vec![num(t.statistic), num(t.p_value), t.tier.to_string()],
                    None => vec!["NA".into(); 3],
                };
                let mut row = vec![c.component.name().to_string(), int(c.n)];
                row.extend(cells(c.pearson.as_ref()));
                row.extend(cells(c.spearman.as_ref()));
                row.push(c.skipped.clone().unwrap_or_default());
                sentiment_table.push(row);
            }
        } else {
            warnings.push("sentiment correlations skipped: no sentiment scores in the sidecars".into());
        }

        Ok(FamilyReport {
            tables: vec![feature_table, groups_table, report, anova_table, gaps, sentiment_table],
            json: json!({
                "lambda": cfg.lambda,
                "groups": {"gender": gender_groups, "age_group": age_groups},
                "gender_tests": gender_tests,
                "age_tests": age_tests,
                "gaps": {"delta_gender": delta_gender, "delta_age": delta_age},
                "sentiment_correlations": correlations,
            }),
            warnings,
        })
    }
}

// ---------------------------------------------------------------- insights

/// Correspondence analysis, age-group clustering and the log-OR heatmap.
pub struct InsightsAudit;

impl Audit for InsightsAudit {
    fn name(&self) -> &'static str {
        "insights"
    }

    fn description(&self) -> &'static str {
        "correspondence analysis, age-group dendrogram and log-OR heatmap data"
    }

    fn missing_inputs(&self, _corpus: &EnrichedCorpus, _config: &RunConfig, _resources: &Resources) -> Vec<String> {
        Vec::new()
    }

    fn run(&self, ctx: &AuditContext<'_>) -> Result<FamilyReport> {
        let (corpus, cfg, res) = (ctx.corpus, ctx.config, ctx.resources);
        let mut warnings = Vec::new();
        let coord_header = ["label", "dim1", "dim2"];
        let mut rows_table = Table::new("ca_rows", &coord_header);
        let mut cols_table = Table::new("ca_cols", &coord_header);
        let mut axes_table = Table::new("ca_axes", &["axis", "singular_value", "inertia_share"]);
        let mut linkage_table = Table::new(
            "linkage",
            &["step", "cluster_a", "cluster_b", "distance", "size", "members"],
        );
        let mut heatmap_table = Table::new("heatmap", &["category", "group", "OR", "log_OR"]);

        let ages = present_labels(corpus, Axis::AgeGroup);
        let counts = counts_by_label(corpus, Axis::AgeGroup, &res.age_lexicon);
        let mut ca_rows = Vec::new();
        let mut ca_counts = Vec::new();
        for a in &ages {
            let c = &counts[a];
            let row: Vec<f64> = res.age_lexicon.category_labels().iter().map(|k| c.get(k) as f64).collect();
            if row.iter().all(|v| *v == 0.0) {
                warnings.push(format!("{a} has no lexicon hits and is left out of the CA"));
                continue;
            }
            ca_rows.push(a.clone());
            ca_counts.push(row);
        }
        let cols: Vec<String> = res.age_lexicon.category_labels().iter().map(|s| s.to_string()).collect();
        let table = ContingencyTable::new(ca_rows, cols, ca_counts).and_then(|mut t| {
            let dropped = t.drop_empty_columns();
            if !dropped.is_empty() {
                warnings.push(format!("categories without hits left out of the CA: {}", dropped.join(", ")));
            }
            ContingencyTable::new(t.rows, t.cols, t.counts)
        });
        let ca = match soft(table, "correspondence analysis", &mut warnings)? {
            Some(t) => Some(correspondence_analysis(&t)?),
            None => None,
        };
        if let Some(ca) = &ca {
            if let Some(w) = &ca.warning {
                warnings.push(w.clone());
            }
            for (l, c) in ca.row_labels.iter().zip(&ca.row_coords) {
                rows_table.push(vec![l.clone(), num(c[0]), num(c[1])]);
            }
            for (l, c) in ca.col_labels.iter().zip(&ca.col_coords) {
                cols_table.push(vec![l.clone(), num(c[0]), num(c[1])]);
            }
            for (i, (sv, share)) in ca.singular_values.iter().zip(&ca.inertia_shares).enumerate() {
                axes_table.push(vec![int(i + 1), num(*sv), num(*share)]);
            }
        }

        let ors = age_ors(corpus, &res.age_lexicon, cfg.smoothing, &mut Vec::new())?;
        let heatmap = if ors.is_empty() { None } else { Some(log_or_matrix(&ors)?) };
        let mut linkage = None;
        for r in &ors {
            heatmap_table.push(vec![r.label.clone(), r.group.clone(), num(r.odds_ratio), num(r.odds_ratio.ln())]);
        }
        if let Some(h) = &heatmap {
            linkage = soft(hierarchical_cluster(&h.group_profiles()), "age-group clustering", &mut warnings)?;
            for (step, m) in linkage.iter().flat_map(|l| l.merges.iter()).enumerate() {
                linkage_table.push(vec![
                    int(step + 1),
                    int(m.a),
                    int(m.b),
                    num(m.distance),
                    int(m.size),
                    m.members.join("; "),
                ]);
            }
        } else {
            warnings.push("heatmap and clustering skipped: fewer than two age groups".into());
        }

        Ok(FamilyReport {
            tables: vec![rows_table, cols_table, axes_table, linkage_table, heatmap_table],
            json: json!({"ca": ca, "linkage": linkage, "heatmap": heatmap}),
            warnings,
        })
    }
}
