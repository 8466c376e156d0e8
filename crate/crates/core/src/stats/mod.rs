//! Statistics kernel: t-tests, one-way ANOVA, Tukey HSD, correlations and the
//! distribution functions behind their two-sided p-values.
//!
//! Every function is pure. Inputs are plain slices; sample variances use the
//! `n - 1` denominator throughout.

mod distributions;
mod result;
pub(crate) mod special;
mod hypothesis;

pub use distributions::{f_sf, student_t_cdf, student_t_two_sided, studentized_range_sf};
pub use result::{Df, TestResult, Tier};
pub use hypothesis::{
    anova_f, average_ranks, paired_t, pearson, pooled_t, spearman, tukey_hsd, welch_t, TukeyPair,
};

