//! Student t, Fisher F and studentized range distribution functions.

use super::special::{beta_reg, integrate, ln_gamma, normal_cdf, normal_pdf};

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided p-value `P(|T| >= |t|)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Upper tail `P(F >= f)` of the F distribution.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    beta_reg(0.5 * df2, 0.5 * df1, x).clamp(0.0, 1.0)
}

/// Degrees of freedom above which the studentized range uses the normal limit.
const LARGE_DF: f64 = 1e6;

/// `P(W > w)` for the range `W` of `k` independent standard normals.
fn normal_range_sf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    let km1 = (k - 1) as i32;
    let cdf = k as f64
        * integrate(
            |z| {
                let inner = normal_cdf(z) - normal_cdf(z - w);
                if inner <= 0.0 {
                    0.0
                } else {
                    normal_pdf(z) * inner.powi(km1)
                }
            },
            -8.5,
            8.5,
            34,
        );
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// Upper tail of the studentized range distribution with `k` means and
/// `df` error degrees of freedom.
///
/// Integrates the normal-range tail against the density of `s = sqrt(chi2_df / df)`.
pub fn studentized_range_sf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs at least two means");
    if q <= 0.0 {
        return 1.0;
    }
    if q.is_infinite() {
        return 0.0;
    }
    if df >= LARGE_DF || df.is_infinite() {
        return normal_range_sf(q, k);
    }
    let half = 0.5 * df;
    let ln_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * std::f64::consts::LN_2;
    let spread = 1.0 / (2.0 * df).sqrt();
    let lo = (1.0 - 14.0 * spread).max(0.0);
    let hi = 1.0 + 14.0 * spread.max(0.05);
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (ln_norm + (df - 1.0) * s.ln() - half * s * s).exp()
    };
    let tail = integrate(
        |s| {
            let d = density(s);
            if d < 1e-16 {
                0.0
            } else {
                d * normal_range_sf(q * s, k)
            }
        },
        lo,
        hi,
        48,
    );
    tail.clamp(0.0, 1.0)
}
