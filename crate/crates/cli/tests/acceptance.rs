//! Acceptance suite: one `ACCEPTANCE <criterion>: PASS|FAIL` line per criterion.
//!
//! Runs without the libtest harness so the report stays one line per
//! criterion; the process exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use demobias::audit::{run_audit, Audit, PersuasionAudit, Resources, RunConfig, StyleAudit};
use demobias::corpus::{
    build_prompt_grid, join_sidecars, stamp_models, Axis, Corpus, DemographicAxes, EnrichedCorpus,
    Message, PromptTemplates, SidecarRecord, Setting,
};
use demobias::insights::{correspondence_analysis, hierarchical_cluster, ContingencyTable};
use demobias::lexical_bias::{age_category_or, odds_ratio, weat, EmbeddingTable};
use demobias::lexicons::{BaseVerbs, CategoryCounts, MarkerSet, Token};
use demobias::persuasion::{
    corpus_features, group_features, group_persuasion, sanity_correlations, Feature,
    PersuasionLexicons,
};
use demobias::stats::{anova_f, paired_t, pearson, pooled_t, spearman, tukey_hsd, welch_t};
use indexmap::IndexMap;
use serde::Deserialize;

type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Check {
    ensure!((got - want).abs() <= tol, "{what}: got {got}, want {want} (tol {tol})");
    Ok(())
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_demobias"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run_cli(args: &[&str]) -> std::result::Result<String, String> {
    let out = cli().args(args).output().map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "demobias {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

// ---------------------------------------------------------------- grid

fn grid_counts() -> Check {
    let axes = DemographicAxes::builtin();
    let templates = PromptTemplates::default();
    let models: Vec<String> = ["profile-a", "profile-b", "profile-c"].map(String::from).to_vec();
    let started = Instant::now();
    for (setting, per_model) in [(Setting::Sg, 16), (Setting::Crg, 440)] {
        let grid = build_prompt_grid(&axes, setting, templates.for_setting(setting))
            .map_err(|e| e.to_string())?;
        ensure!(grid.len() == per_model, "{setting:?}: {} prompts, want {per_model}", grid.len());
        let stamped = stamp_models(&grid, &models);
        ensure!(
            stamped.len() == 3 * per_model,
            "{setting:?} x 3 profiles: {} prompts, want {}",
            stamped.len(),
            3 * per_model
        );
    }
    let lib_time = started.elapsed();
    ensure!(lib_time < Duration::from_secs(1), "library grid took {lib_time:?}");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (setting, models, want) in [
        ("sg", None, 16),
        ("crg", None, 440),
        ("sg", Some("a,b,c"), 48),
        ("crg", Some("a,b,c"), 1320),
    ] {
        let path = dir.path().join(format!("{setting}.jsonl"));
        let mut args = vec!["grid", "--setting", setting, "--out", path.to_str().unwrap()];
        if let Some(m) = models {
            args.extend(["--models", m]);
        }
        let started = Instant::now();
        run_cli(&args)?;
        let took = started.elapsed();
        ensure!(took < Duration::from_secs(1), "grid {setting} took {took:?}");
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let n = text.lines().count();
        ensure!(n == want, "cli grid {setting} {models:?}: {n} lines, want {want}");
    }
    Ok(())
}

// ---------------------------------------------------------------- odds ratios

#[derive(Deserialize)]
struct OrOracle {
    pairwise: Vec<PairCase>,
    pairwise_large: Vec<PairCase>,
    age: Vec<AgeCase>,
}

#[derive(Deserialize)]
struct PairCase {
    name: String,
    e_focal: u64,
    t_focal: u64,
    e_rest: u64,
    t_rest: u64,
    s: f64,
    or: f64,
}

#[derive(Deserialize)]
struct AgeCase {
    name: String,
    groups: Vec<AgeGroupCounts>,
    focal: String,
    s: f64,
    or: f64,
}

#[derive(Deserialize)]
struct AgeGroupCounts {
    label: String,
    hits: u64,
    total: u64,
}

/// Relative tolerance: ORs span many orders of magnitude.
fn close_rel(got: f64, want: f64, tol: f64, what: &str) -> Check {
    close(got, want, tol * want.abs().max(1.0), what)
}

fn odds_ratio_oracle() -> Check {
    let oracle: OrOracle =
        serde_json::from_str(include_str!("fixtures/or_oracle.json")).map_err(|e| e.to_string())?;
    ensure!(oracle.pairwise.len() >= 50, "only {} pairwise cases", oracle.pairwise.len());
    for c in &oracle.pairwise {
        let or = odds_ratio(c.e_focal, c.t_focal, c.e_rest, c.t_rest, c.s).map_err(|e| e.to_string())?;
        close_rel(or, c.or, 1e-12, &c.name)?;
        let back = odds_ratio(c.e_rest, c.t_rest, c.e_focal, c.t_focal, c.s).map_err(|e| e.to_string())?;
        close(or * back, 1.0, 1e-12, &format!("{} reciprocity", c.name))?;
        let flat = odds_ratio(c.e_focal, c.t_focal, c.e_rest, c.t_rest, 1e6).map_err(|e| e.to_string())?;
        ensure!((flat - 1.0).abs() < 1e-3, "{}: OR at s=1e6 is {flat}", c.name);
    }
    for c in &oracle.pairwise_large {
        let or = odds_ratio(c.e_focal, c.t_focal, c.e_rest, c.t_rest, c.s).map_err(|e| e.to_string())?;
        close_rel(or, c.or, 1e-12, &c.name)?;
        let back = odds_ratio(c.e_rest, c.t_rest, c.e_focal, c.t_focal, c.s).map_err(|e| e.to_string())?;
        close(or * back, 1.0, 1e-12, &format!("{} reciprocity", c.name))?;
        // |ln(1 + x)| <= x bounds each of the four smoothed terms
        let s = 1e6;
        let flat = odds_ratio(c.e_focal, c.t_focal, c.e_rest, c.t_rest, s).map_err(|e| e.to_string())?;
        let bound = (c.t_focal + c.t_rest) as f64 / s;
        ensure!(flat.ln().abs() <= bound, "{}: |ln OR| {} above {bound} at s=1e6", c.name, flat.ln().abs());
    }
    for c in &oracle.age {
        let counts: IndexMap<String, CategoryCounts> = c
            .groups
            .iter()
            .map(|g| {
                let mut counts = IndexMap::new();
                counts.insert("cat".to_string(), g.hits);
                (g.label.clone(), CategoryCounts { counts, total: g.total })
            })
            .collect();
        let rows = age_category_or(&counts, &c.focal, c.s).map_err(|e| e.to_string())?;
        ensure!(rows.len() == 1, "{}: {} rows", c.name, rows.len());
        close_rel(rows[0].odds_ratio, c.or, 1e-12, &c.name)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- statistics

#[derive(Deserialize)]
struct StatsFixtures {
    welch: Vec<TwoSample>,
    paired: Vec<TwoSample>,
    groups: Vec<GroupCase>,
    correlation: Vec<CorrCase>,
}

#[derive(Deserialize)]
struct TwoSample {
    name: String,
    a: Vec<f64>,
    b: Vec<f64>,
    t: f64,
    df: f64,
    p: f64,
}

#[derive(Deserialize)]
struct GroupCase {
    name: String,
    groups: Vec<Vec<f64>>,
    f: f64,
    df1: f64,
    df2: f64,
    p: f64,
    tukey: Vec<TukeyRef>,
}

#[derive(Deserialize)]
struct TukeyRef {
    i: usize,
    j: usize,
    p_adj: f64,
}

#[derive(Deserialize)]
struct CorrCase {
    name: String,
    x: Vec<f64>,
    y: Vec<f64>,
    pearson_r: f64,
    pearson_p: f64,
    spearman_rho: f64,
    spearman_p: f64,
}

fn statistics_oracle() -> Check {
    let fx: StatsFixtures =
        serde_json::from_str(include_str!("../../core/tests/fixtures/stats_fixtures.json"))
            .map_err(|e| e.to_string())?;
    let err = |e: demobias::Error| e.to_string();
    ensure!(fx.welch.len() >= 10, "welch: only {} cases", fx.welch.len());
    ensure!(fx.paired.len() >= 10, "paired: only {} cases", fx.paired.len());
    ensure!(fx.groups.len() >= 10, "anova: only {} cases", fx.groups.len());
    ensure!(fx.correlation.len() >= 10, "correlation: only {} cases", fx.correlation.len());

    for c in &fx.welch {
        let r = welch_t(&c.a, &c.b).map_err(err)?;
        close(r.statistic, c.t, 1e-6, &format!("{} t", c.name))?;
        close(r.df.single().unwrap_or(f64::NAN), c.df, 1e-6, &format!("{} df", c.name))?;
        close(r.p_value, c.p, 1e-6, &format!("{} p", c.name))?;
    }
    for c in &fx.paired {
        let r = paired_t(&c.a, &c.b).map_err(err)?;
        close(r.statistic, c.t, 1e-6, &format!("{} t", c.name))?;
        close(r.df.single().unwrap_or(f64::NAN), c.df, 1e-6, &format!("{} df", c.name))?;
        close(r.p_value, c.p, 1e-6, &format!("{} p", c.name))?;
    }
    for c in &fx.groups {
        let r = anova_f(&c.groups).map_err(err)?;
        close(r.statistic, c.f, 1e-6, &format!("{} F", c.name))?;
        ensure!(
            r.df == demobias::stats::Df::Pair(c.df1, c.df2),
            "{} df: got {:?}",
            c.name,
            r.df
        );
        close(r.p_value, c.p, 1e-6, &format!("{} F p", c.name))?;
        let labelled: Vec<(String, Vec<f64>)> = c
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| (format!("g{i:02}"), g.clone()))
            .collect();
        let rows = tukey_hsd(&labelled).map_err(err)?;
        ensure!(rows.len() == c.tukey.len(), "{} tukey rows", c.name);
        for (row, want) in rows.iter().zip(&c.tukey) {
            ensure!(
                row.group1 == format!("g{:02}", want.i) && row.group2 == format!("g{:02}", want.j),
                "{} tukey pair order",
                c.name
            );
            close(row.p_adj, want.p_adj, 1e-3, &format!("{} p_adj", c.name))?;
        }
    }
    for c in &fx.correlation {
        let p = pearson(&c.x, &c.y).map_err(err)?;
        close(p.statistic, c.pearson_r, 1e-6, &format!("{} r", c.name))?;
        close(p.p_value, c.pearson_p, 1e-6, &format!("{} r p", c.name))?;
        let s = spearman(&c.x, &c.y).map_err(err)?;
        close(s.statistic, c.spearman_rho, 1e-6, &format!("{} rho", c.name))?;
        close(s.p_value, c.spearman_p, 1e-6, &format!("{} rho p", c.name))?;
    }
    for c in fx.welch.iter().chain(&fx.paired) {
        let t = pooled_t(&c.a, &c.b).map_err(err)?;
        let f = anova_f(&[c.a.clone(), c.b.clone()]).map_err(err)?;
        close(f.statistic, t.statistic * t.statistic, 1e-9, &format!("{} F = t^2", c.name))?;
        let rows = tukey_hsd(&[("a", c.a.clone()), ("b", c.b.clone())]).map_err(err)?;
        close(rows[0].q, 2f64.sqrt() * t.statistic.abs(), 1e-9, &format!("{} q = sqrt2 |t|", c.name))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- synthetic corpora

fn message(i: usize, model: &str, gender: &str, age: &str, stance: &str) -> Message {
    Message {
        id: format!("{model}-{i:04}"),
        model_id: model.to_string(),
        setting: Setting::Sg,
        gender: gender.to_string(),
        age_group: age.to_string(),
        stance: stance.to_string(),
        region: None,
        theme: None,
        text: "synthetic message".to_string(),
    }
}

fn sidecar(id: &str) -> SidecarRecord {
    SidecarRecord {
        message_id: id.to_string(),
        tokens: None,
        imperative_count: None,
        formality_prob: None,
        emotion_probs: None,
        sentiment: None,
    }
}

fn enrich(messages: Vec<Message>, sidecars: Vec<SidecarRecord>) -> std::result::Result<EnrichedCorpus, String> {
    let corpus = Corpus::new(messages, DemographicAxes::builtin()).map_err(|e| e.to_string())?;
    join_sidecars(corpus, sidecars).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- persuasion

struct Known {
    h: u32,
    l: u32,
    c: u32,
    hdg: u32,
    imp: u32,
}

fn known_counts(i: usize) -> Known {
    let no_agency = i % 10 < 3;
    Known {
        h: if no_agency { 0 } else { (i * 7 % 5) as u32 },
        l: if no_agency { 0 } else { (i * 3 % 4) as u32 + u32::from(i * 7 % 5 == 0) },
        c: (i * 5 % 4) as u32,
        hdg: (i * 11 % 3) as u32,
        imp: (i % 6) as u32,
    }
}

fn persuasion_tokens(k: &Known) -> Vec<Token> {
    let mut tokens = vec![Token::new("Plans", true).with_pos("NOUN")];
    let mut push = |word: &str, n: u32, pos: &str| {
        for _ in 0..n {
            tokens.push(Token::new(word, false).with_pos(pos));
        }
    };
    push("commanded", k.h, "VERB");
    push("obeyed", k.l, "VERB");
    push("certainly", k.c, "ADV");
    push("perhaps", k.hdg, "ADV");
    // agency lemmas outside VERB tags do not count
    push("commanded", 1, "ADJ");
    push("obeyed", 1, "NOUN");
    tokens
}

fn persuasion_markers() -> std::result::Result<MarkerSet, String> {
    MarkerSet::new(&["certainly"], &["perhaps"], &["commanded"], &["obeyed"]).map_err(|e| e.to_string())
}

fn persuasion_formulas() -> Check {
    let axes = DemographicAxes::builtin();
    let markers = persuasion_markers()?;
    let base_verbs = BaseVerbs::parse("");
    let lex = PersuasionLexicons {
        markers: &markers,
        base_verbs: &base_verbs,
    };
    let lambda = 0.05;
    let n = 100;
    let mut messages = Vec::new();
    let mut sidecars = Vec::new();
    for i in 0..n {
        let m = message(
            i,
            "synthetic",
            &axes.genders[i % 2],
            &axes.age_groups[i / 2 % axes.age_groups.len()],
            &axes.stances[i / 8 % axes.stances.len()],
        );
        let k = known_counts(i);
        let mut s = sidecar(&m.id);
        s.tokens = Some(persuasion_tokens(&k));
        s.imperative_count = Some(k.imp);
        s.sentiment = Some(((i * 37 % 101) as f64 / 50.0) - 1.0);
        messages.push(m);
        sidecars.push(s);
    }
    let enriched = enrich(messages, sidecars)?;
    let features = corpus_features(&enriched, lex, lambda).map_err(|e| e.to_string())?;
    ensure!(features.len() == n, "{} feature rows", features.len());

    let balance = |p: u32, q: u32| (p + q > 0).then(|| (p as f64 - q as f64) / (p + q) as f64);
    for (i, f) in features.iter().enumerate() {
        let k = known_counts(i);
        ensure!(
            (f.high_agency, f.low_agency, f.certainty, f.hedges, f.imp_count) == (k.h, k.l, k.c, k.hdg, k.imp),
            "message {i}: counts {:?}",
            (f.high_agency, f.low_agency, f.certainty, f.hedges, f.imp_count)
        );
        let a = balance(k.h, k.l);
        let m = balance(k.c, k.hdg);
        let imp = lambda * k.imp as f64;
        let pbi = a.unwrap_or(0.0) + m.unwrap_or(0.0) + imp;
        ensure!(f.agency == a, "message {i}: A {:?} != {a:?}", f.agency);
        ensure!(f.modal == m, "message {i}: M {:?} != {m:?}", f.modal);
        ensure!(f.imperative == imp, "message {i}: I {} != {imp}", f.imperative);
        ensure!(f.pbi == pbi, "message {i}: PBI {} != {pbi}", f.pbi);
    }

    let without_agency = features.iter().filter(|f| f.agency.is_none()).count();
    ensure!(without_agency == 30, "{without_agency} messages lack agency verbs, want 30");

    for axis in [Axis::Gender, Axis::AgeGroup] {
        let groups = group_features(&enriched, &features, axis);
        let summary = group_persuasion(&groups).map_err(|e| e.to_string())?;
        let mut n_a = 0;
        for g in &summary {
            ensure!(g.n_a_defined <= g.n_total, "{}: n_A {} > n {}", g.group, g.n_a_defined, g.n_total);
            ensure!(g.n_m_defined <= g.n_total, "{}: n_M {} > n {}", g.group, g.n_m_defined, g.n_total);
            n_a += g.n_a_defined;
        }
        ensure!(n_a == 70, "{axis:?}: {n_a} messages with A, want 70");
        ensure!(
            summary.iter().any(|g| g.n_a_defined < g.n_total),
            "{axis:?}: no group shows the n split"
        );
    }

    let sentiment: Vec<Option<f64>> = enriched.iter().map(|(_, a)| a.sentiment).collect();
    let corr = sanity_correlations(&features, &sentiment).map_err(|e| e.to_string())?;
    let n_of = |feat: Feature| corr.iter().find(|r| r.component == feat).map(|r| r.n);
    ensure!(n_of(Feature::Pbi) == Some(100), "PBI correlation n {:?}", n_of(Feature::Pbi));
    ensure!(n_of(Feature::Agency) == Some(70), "A correlation n {:?}", n_of(Feature::Agency));
    ensure!(
        n_of(Feature::Modal).is_some_and(|m| m <= 100),
        "M correlation n {:?}",
        n_of(Feature::Modal)
    );

    // the same split as reported by the audit
    let mut resources = Resources::default();
    resources.markers = markers.clone();
    resources.base_verbs = base_verbs.clone();
    let audits: [&dyn Audit; 1] = [&PersuasionAudit];
    let out = run_audit(&audits, &enriched, &RunConfig::default(), &resources).map_err(|e| e.to_string())?;
    let table = out.table("persuasion_groups").ok_or("no persuasion_groups table")?;
    let (n_total, n_a) = (table.values("n_total"), table.values("n_A"));
    ensure!(!n_total.is_empty(), "persuasion_groups is empty");
    for (t, a) in n_total.iter().zip(&n_a) {
        let (t, a): (usize, usize) = (t.parse().map_err(|_| "n_total")?, a.parse().map_err(|_| "n_A")?);
        ensure!(a <= t, "persuasion_groups: n_A {a} > n_total {t}");
    }
    Ok(())
}

// ---------------------------------------------------------------- WEAT

fn weat_properties() -> Check {
    let err = |e: demobias::Error| e.to_string();
    let hand = EmbeddingTable::from_pairs([
        ("x", vec![1.0, 0.0]),
        ("y", vec![0.0, 1.0]),
        ("a", vec![1.0, 0.0]),
        ("b", vec![0.0, 1.0]),
    ])
    .map_err(err)?;
    let r = weat(&["x"], &["y"], &["a"], &["b"], &hand).map_err(err)?;
    close(r.raw_statistic, 2.0, 1e-9, "hand raw")?;
    close(r.effect_size, 2f64.sqrt(), 1e-9, "hand effect")?;

    // a small table with varied directions and norms
    let words: Vec<(String, Vec<f64>)> = (0..24)
        .map(|i| {
            let t = i as f64;
            let v = vec![(t * 0.7).sin() * (1.0 + t / 10.0), (t * 1.3).cos(), (t * 0.37).sin() - 0.2, 1.0 + (t * 2.1).cos()];
            (format!("w{i}"), v)
        })
        .collect();
    let table = EmbeddingTable::from_pairs(words.iter().map(|(w, v)| (w.as_str(), v.clone()))).map_err(err)?;
    let scaled = EmbeddingTable::from_pairs(words.iter().enumerate().map(|(i, (w, v))| {
        let c = 0.01 + 37.0 * i as f64;
        (w.as_str(), v.iter().map(|x| x * c).collect::<Vec<_>>())
    }))
    .map_err(err)?;
    let set = |r: std::ops::Range<usize>| r.map(|i| format!("w{i}")).collect::<Vec<_>>();
    let (x, y, a, b) = (set(0..6), set(6..12), set(12..18), set(18..24));

    let base = weat(&x, &y, &a, &b, &table).map_err(err)?;
    ensure!(base.raw_statistic != 0.0, "degenerate fixture");
    let swapped = weat(&x, &y, &b, &a, &table).map_err(err)?;
    ensure!(swapped.raw_statistic == -base.raw_statistic, "raw not antisymmetric");
    ensure!(swapped.effect_size == -base.effect_size, "effect not antisymmetric");
    let same = weat(&x, &y, &a, &a, &table).map_err(err)?;
    ensure!(
        same.raw_statistic == 0.0 && same.effect_size == 0.0,
        "identical attributes gave {} / {}",
        same.raw_statistic,
        same.effect_size
    );
    let s = weat(&x, &y, &a, &b, &scaled).map_err(err)?;
    close(s.raw_statistic, base.raw_statistic, 1e-9, "scaled raw")?;
    close(s.effect_size, base.effect_size, 1e-9, "scaled effect")?;
    Ok(())
}

// ---------------------------------------------------------------- formality

/// `n` deterministic values with sample mean 0 and sample sd 1.
fn standardized(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|i| ((i * 37 % n) as f64) - (n as f64 - 1.0) / 2.0).collect();
    let sd = (raw.iter().map(|v| v * v).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    raw.iter().map(|v| v / sd).collect()
}

fn formality_corpus(male_mean: f64, female_mean: f64) -> std::result::Result<EnrichedCorpus, String> {
    let axes = DemographicAxes::builtin();
    let z = standardized(50);
    let mut messages = Vec::new();
    let mut sidecars = Vec::new();
    for (gi, (gender, mean)) in [("Male", male_mean), ("Female", female_mean)].into_iter().enumerate() {
        for (i, zi) in z.iter().enumerate() {
            let m = message(
                gi * 50 + i,
                "synthetic",
                gender,
                &axes.age_groups[i % axes.age_groups.len()],
                &axes.stances[i / 4 % axes.stances.len()],
            );
            let mut s = sidecar(&m.id);
            s.formality_prob = Some(mean + 0.05 * zi);
            messages.push(m);
            sidecars.push(s);
        }
    }
    enrich(messages, sidecars)
}

fn formality_gap(male_mean: f64, female_mean: f64) -> std::result::Result<(f64, f64), String> {
    let enriched = formality_corpus(male_mean, female_mean)?;
    let audits: [&dyn Audit; 1] = [&StyleAudit];
    let out = run_audit(&audits, &enriched, &RunConfig::default(), &Resources::default())
        .map_err(|e| e.to_string())?;
    let t = out.table("formality_gender").ok_or("no formality_gender table")?;
    ensure!(t.rows.len() == 1, "formality_gender has {} rows", t.rows.len());
    ensure!(
        t.values("group1") == ["Male"] && t.values("group2") == ["Female"],
        "unexpected group order"
    );
    let num = |col: &str| -> std::result::Result<f64, String> {
        t.values(col)[0].parse().map_err(|_| format!("{col} is not numeric"))
    };
    Ok((num("b_form")?, num("p_value")?))
}

fn formality_pipeline() -> Check {
    let started = Instant::now();
    let (b, p) = formality_gap(0.8, 0.6)?;
    ensure!(b > 0.0 && p < 0.001, "as constructed: b_form {b}, p {p}");
    let (b, p) = formality_gap(0.6, 0.8)?;
    ensure!(b < 0.0 && p < 0.001, "reversed: b_form {b}, p {p}");
    let took = started.elapsed();
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(())
}

// ---------------------------------------------------------------- insights

#[derive(Deserialize)]
struct CaCase {
    name: String,
    table: Vec<Vec<f64>>,
    row_coords: Vec<Vec<f64>>,
    col_coords: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    inertia_shares: Vec<f64>,
}

#[derive(Deserialize)]
struct LinkCase {
    name: String,
    labels: Vec<String>,
    profiles: Vec<Vec<f64>>,
    merges: Vec<RefMerge>,
}

#[derive(Deserialize)]
struct RefMerge {
    a: usize,
    b: usize,
    distance: f64,
    size: usize,
}

fn contingency(counts: &[Vec<f64>]) -> std::result::Result<ContingencyTable, String> {
    let rows = (0..counts.len()).map(|i| format!("r{i}")).collect();
    let cols = (0..counts[0].len()).map(|j| format!("c{j}")).collect();
    ContingencyTable::new(rows, cols, counts.to_vec()).map_err(|e| e.to_string())
}

fn insights() -> Check {
    let flat = contingency(&vec![vec![3.0, 5.0, 2.0]; 4])?;
    let ca = correspondence_analysis(&flat).map_err(|e| e.to_string())?;
    ensure!(ca.total_inertia.abs() < 1e-12, "identical rows: inertia {}", ca.total_inertia);

    let cases: Vec<CaCase> =
        serde_json::from_str(include_str!("../../core/tests/fixtures/ca_fixtures.json")).map_err(|e| e.to_string())?;
    ensure!(!cases.is_empty(), "no CA cases");
    for cs in &cases {
        let ca = correspondence_analysis(&contingency(&cs.table)?).map_err(|e| e.to_string())?;
        for axis in 0..2 {
            let pivot = (0..cs.row_coords.len())
                .find(|&i| cs.row_coords[i][axis].abs() > 1e-9)
                .unwrap_or(0);
            let sign = if (ca.row_coords[pivot][axis] >= 0.0) == (cs.row_coords[pivot][axis] >= 0.0) { 1.0 } else { -1.0 };
            for (got, want) in ca.row_coords.iter().zip(&cs.row_coords) {
                close(got[axis], sign * want[axis], 1e-6, &format!("{} row axis {axis}", cs.name))?;
            }
            for (got, want) in ca.col_coords.iter().zip(&cs.col_coords) {
                close(got[axis], sign * want[axis], 1e-6, &format!("{} col axis {axis}", cs.name))?;
            }
        }
        for (got, want) in ca.singular_values.iter().zip(&cs.singular_values) {
            close(*got, *want, 1e-6, &format!("{} singular value", cs.name))?;
        }
        for (got, want) in ca.inertia_shares.iter().zip(&cs.inertia_shares) {
            close(*got, *want, 1e-6, &format!("{} inertia share", cs.name))?;
        }
    }

    let cases: Vec<LinkCase> = serde_json::from_str(include_str!("../../core/tests/fixtures/linkage_fixtures.json"))
        .map_err(|e| e.to_string())?;
    let mut saw_two_cluster = false;
    for cs in &cases {
        let profiles: Vec<(String, Vec<f64>)> = cs.labels.iter().cloned().zip(cs.profiles.iter().cloned()).collect();
        let link = hierarchical_cluster(&profiles).map_err(|e| e.to_string())?;
        ensure!(link.merges.len() == cs.merges.len(), "{} merge count", cs.name);
        for (k, (got, want)) in link.merges.iter().zip(&cs.merges).enumerate() {
            let (ga, gb) = (got.a.min(got.b), got.a.max(got.b));
            ensure!((ga, gb) == (want.a, want.b), "{} step {k}: merged ({ga}, {gb}), want ({}, {})", cs.name, want.a, want.b);
            ensure!(got.size == want.size, "{} step {k}: size {}", cs.name, got.size);
            close(got.distance, want.distance, 1e-6, &format!("{} step {k} distance", cs.name))?;
        }
        if cs.name == "two_cluster_ages" {
            saw_two_cluster = true;
            let mut first: Vec<Vec<String>> = link.merges[..2]
                .iter()
                .map(|m| {
                    let mut v = m.members.clone();
                    v.sort();
                    v
                })
                .collect();
            first.sort();
            let want = vec![vec!["EW".to_string(), "YA".to_string()], vec!["LW".to_string(), "S".to_string()]];
            ensure!(first == want, "two-cluster fixture merged {first:?} first");
        }
    }
    ensure!(saw_two_cluster, "two-cluster fixture missing");
    Ok(())
}

// ---------------------------------------------------------------- determinism

fn read_tree(dir: &Path) -> std::result::Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let messages = fixture("messages.jsonl");
    let sidecar = fixture("sidecar.jsonl");
    let embeddings = fixture("embeddings.txt");
    let mut trees = Vec::new();
    for run in ["first", "second"] {
        let root = tmp.path().join(run);
        run_cli(&[
            "audit",
            "--family",
            "all",
            "--messages",
            messages.to_str().unwrap(),
            "--sidecar",
            sidecar.to_str().unwrap(),
            "--embeddings",
            embeddings.to_str().unwrap(),
            "--out",
            root.to_str().unwrap(),
        ])?;
        trees.push(read_tree(&root)?);
    }
    let (a, b) = (&trees[0], &trees[1]);
    ensure!(a.len() > 10, "only {} report files", a.len());
    ensure!(
        a.keys().eq(b.keys()),
        "file sets differ: {:?} vs {:?}",
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in a {
        ensure!(b[name] == *bytes, "{name} differs between runs");
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("grid counts", grid_counts),
        ("odds-ratio oracle", odds_ratio_oracle),
        ("statistics oracle", statistics_oracle),
        ("persuasion formulas", persuasion_formulas),
        ("WEAT properties", weat_properties),
        ("formality pipeline", formality_pipeline),
        ("insights", insights),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        match outcome {
            Ok(()) => println!("ACCEPTANCE {name}: PASS"),
            Err(why) => {
                failed += 1;
                println!("ACCEPTANCE {name}: FAIL ({why})");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
