//! Nearest-rank percentiles and one-way analysis of variance.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Nearest-rank percentile: the `ceil(q/100 * n)`-th smallest value.
pub fn percentile(values: &[f64], q: f64) -> Result<f64, Error> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

/// Same as [`percentile`] on input already sorted ascending.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> Result<f64, Error> {
    if sorted.is_empty() {
        return Err(Error::invalid("percentile", "no values"));
    }
    if !(q > 0.0 && q <= 100.0) {
        return Err(Error::invalid("percentile", format!("rank {q} outside (0, 100]")));
    }
    let n = sorted.len();
    // q * n / 100 keeps integer products exact; the epsilon absorbs the rest
    let rank = ((q * n as f64) / 100.0 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Ok(sorted[rank - 1])
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const TINY: f64 = 1e-300;

/// Continued fraction for the incomplete beta function, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64, Error> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid("incomplete beta", "shape parameters must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("incomplete beta", "x must lie in [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the continued fraction converges fast only below the mean
    let value = if x < (a + 1.0) / (a + b + 2.0) { front * beta_cf(a, b, x) / a } else { 1.0 - front * beta_cf(b, a, 1.0 - x) / b };
    Ok(value.clamp(0.0, 1.0))
}

/// Upper tail of the F distribution, `P(X > f)`.
pub fn f_survival(f: f64, df1: f64, df2: f64) -> Result<f64, Error> {
    if f.is_infinite() {
        return Ok(0.0);
    }
    if !(f >= 0.0) {
        return Err(Error::invalid("F distribution", "statistic must be non-negative"));
    }
    reg_inc_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

/// One-way ANOVA table, in the usual `sum_sq, df, F, PR(>F)` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub sum_sq_factor: f64,
    pub df_factor: f64,
    pub sum_sq_resid: f64,
    pub df_resid: f64,
    /// `+inf` when groups differ but have no spread of their own
    pub f: f64,
    pub p: f64,
}

pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult, Error> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::invalid("anova", "need at least two groups"));
    }
    if groups.iter().any(|g| g.as_ref().is_empty()) {
        return Err(Error::invalid("anova", "empty group"));
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    if n <= k {
        return Err(Error::invalid("anova", "need more observations than groups"));
    }
    let grand = groups.iter().flat_map(|g| g.as_ref().iter()).sum::<f64>() / n as f64;
    let mut ss_factor = 0.0;
    let mut ss_resid = 0.0;
    let mut ss_total = 0.0;
    for g in groups {
        let g = g.as_ref();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_factor += g.len() as f64 * (mean - grand).powi(2);
        ss_resid += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        ss_total += g.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    }
    let df_factor = (k - 1) as f64;
    let df_resid = (n - k) as f64;
    if ss_total == 0.0 {
        return Err(Error::invalid("anova", "all observations are identical"));
    }
    // residual spread at rounding level counts as none
    let (f, p) = if ss_resid <= 1e-14 * ss_total {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ss_factor / df_factor) / (ss_resid / df_resid);
        (f, f_survival(f, df_factor, df_resid)?)
    };
    Ok(AnovaResult { sum_sq_factor: ss_factor, df_factor, sum_sq_resid: ss_resid, df_resid, f, p })
}
