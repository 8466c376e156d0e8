//! Two-sample, paired and multi-group hypothesis tests.

use serde::{Deserialize, Serialize};

use super::distributions::{f_sf, student_t_two_sided, studentized_range_sf};
use super::result::{Df, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Sample variance with `n - 1` denominator.
    pub var: f64,
}

pub(crate) fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
    Moments { n, mean, var }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn require_n(xs: &[f64], min: usize, what: &str) -> Result<()> {
    if xs.len() < min {
        return Err(Error::InsufficientData(format!(
            "{what} has {} values, need at least {min}",
            xs.len()
        )));
    }
    Ok(())
}

/// Welch's unequal-variance two-sample t-test of `a` against `b`.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_n(a, 2, "first sample")?;
    require_n(b, 2, "second sample")?;
    let ma = moments(a);
    let mb = moments(b);
    let va = ma.var / ma.n as f64;
    let vb = mb.var / mb.n as f64;
    let se2 = va + vb;
    let diff = ma.mean - mb.mean;
    if se2 == 0.0 {
        if diff == 0.0 {
            let df = (ma.n + mb.n - 2) as f64;
            return Ok(TestResult::new(0.0, Df::Single(df), 1.0));
        }
        return Err(Error::DegenerateVariance(format!(
            "both samples are constant with means {} and {}",
            ma.mean, mb.mean
        )));
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (ma.n - 1) as f64 + vb * vb / (mb.n - 1) as f64);
    Ok(TestResult::new(t, Df::Single(df), student_t_two_sided(t, df)))
}

/// Student's two-sample t-test with pooled variance.
pub fn pooled_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_n(a, 2, "first sample")?;
    require_n(b, 2, "second sample")?;
    let ma = moments(a);
    let mb = moments(b);
    let df = (ma.n + mb.n - 2) as f64;
    let pooled = ((ma.n - 1) as f64 * ma.var + (mb.n - 1) as f64 * mb.var) / df;
    let se2 = pooled * (1.0 / ma.n as f64 + 1.0 / mb.n as f64);
    let diff = ma.mean - mb.mean;
    if se2 == 0.0 {
        if diff == 0.0 {
            return Ok(TestResult::new(0.0, Df::Single(df), 1.0));
        }
        return Err(Error::DegenerateVariance(
            "both samples are constant with different means".into(),
        ));
    }
    let t = diff / se2.sqrt();
    Ok(TestResult::new(t, Df::Single(df), student_t_two_sided(t, df)))
}

/// Paired t-test: one-sample t of `a[i] - b[i]` against zero.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    require_n(a, 2, "paired sample")?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = moments(&diffs);
    let df = (m.n - 1) as f64;
    if m.var == 0.0 {
        if m.mean == 0.0 {
            return Ok(TestResult::new(0.0, Df::Single(df), 1.0));
        }
        return Err(Error::DegenerateVariance(format!(
            "every paired difference equals {}",
            m.mean
        )));
    }
    let t = m.mean / (m.var / m.n as f64).sqrt();
    Ok(TestResult::new(t, Df::Single(df), student_t_two_sided(t, df)))
}

struct OneWay {
    k: usize,
    n_total: usize,
    moments: Vec<Moments>,
    ss_between: f64,
    ss_within: f64,
}

fn one_way<S: AsRef<[f64]>>(groups: &[S]) -> Result<OneWay> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} group(s), need at least 2",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        require_n(g.as_ref(), 2, &format!("group {i}"))?;
    }
    let moments: Vec<Moments> = groups.iter().map(|g| moments(g.as_ref())).collect();
    let n_total: usize = moments.iter().map(|m| m.n).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref().iter()).sum::<f64>() / n_total as f64;
    let ss_between = moments
        .iter()
        .map(|m| m.n as f64 * (m.mean - grand) * (m.mean - grand))
        .sum();
    let ss_within = groups
        .iter()
        .zip(&moments)
        .map(|(g, m)| g.as_ref().iter().map(|x| (x - m.mean) * (x - m.mean)).sum::<f64>())
        .sum();
    Ok(OneWay {
        k: groups.len(),
        n_total,
        moments,
        ss_between,
        ss_within,
    })
}

/// One-way ANOVA F test: between-group mean square over within-group mean square.
pub fn anova_f<S: AsRef<[f64]>>(groups: &[S]) -> Result<TestResult> {
    let ow = one_way(groups)?;
    let df1 = (ow.k - 1) as f64;
    let df2 = (ow.n_total - ow.k) as f64;
    let msb = ow.ss_between / df1;
    let msw = ow.ss_within / df2;
    if msw == 0.0 {
        if ow.ss_between == 0.0 {
            return Ok(TestResult::new(0.0, Df::Pair(df1, df2), 1.0));
        }
        return Err(Error::DegenerateVariance(
            "zero within-group variance with unequal group means".into(),
        ));
    }
    let f = msb / msw;
    Ok(TestResult::new(f, Df::Pair(df1, df2), f_sf(f, df1, df2)))
}

/// One row of a Tukey HSD table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub group1: String,
    pub group2: String,
    /// `mean(group2) - mean(group1)`.
    pub mean_diff: f64,
    pub q: f64,
    pub p_adj: f64,
    pub reject: bool,
}

/// Tukey HSD (Tukey–Kramer for unequal sizes) over labelled groups.
///
/// Groups are sorted by label and every pair `(i < j)` is reported in that order.
pub fn tukey_hsd<L: AsRef<str>, S: AsRef<[f64]>>(groups: &[(L, S)]) -> Result<Vec<TukeyPair>> {
    let mut sorted: Vec<(&str, &[f64])> = groups
        .iter()
        .map(|(l, s)| (l.as_ref(), s.as_ref()))
        .collect();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let samples: Vec<&[f64]> = sorted.iter().map(|(_, s)| *s).collect();
    let ow = one_way(&samples)?;
    let df = (ow.n_total - ow.k) as f64;
    let msw = ow.ss_within / df;
    if msw == 0.0 && ow.ss_between != 0.0 {
        return Err(Error::DegenerateVariance(
            "zero within-group variance with unequal group means".into(),
        ));
    }
    let mut out = Vec::with_capacity(ow.k * (ow.k - 1) / 2);
    for i in 0..ow.k {
        for j in i + 1..ow.k {
            let (mi, mj) = (ow.moments[i], ow.moments[j]);
            let mean_diff = mj.mean - mi.mean;
            let (q, p_adj) = if msw == 0.0 {
                (0.0, 1.0)
            } else {
                let se = (0.5 * msw * (1.0 / mi.n as f64 + 1.0 / mj.n as f64)).sqrt();
                let q = mean_diff.abs() / se;
                (q, studentized_range_sf(q, ow.k, df))
            };
            out.push(TukeyPair {
                group1: sorted[i].0.to_string(),
                group2: sorted[j].0.to_string(),
                mean_diff,
                q,
                p_adj,
                reject: p_adj < 0.05,
            });
        }
    }
    Ok(out)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    require_n(x, 3, "correlation input")
}

fn correlation_test(r: f64, n: usize) -> TestResult {
    let df = (n - 2) as f64;
    let r = r.clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        student_t_two_sided(t, df)
    };
    TestResult::new(r, Df::Single(df), p)
}

fn raw_pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input vector".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation; `statistic` holds r.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_pair(x, y)?;
    let r = raw_pearson(x, y)?;
    Ok(correlation_test(r, x.len()))
}

/// Average ranks (1-based), ties share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `statistic` holds rho.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_pair(x, y)?;
    let r = raw_pearson(&average_ranks(x), &average_ranks(y))?;
    Ok(correlation_test(r, x.len()))
}
