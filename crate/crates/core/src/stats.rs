// SPDX-License-Identifier: Apache-2.0

//! Pearson correlation with Student-t significance, paired t-tests and
//! regression error measures.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{0} series is constant")]
    ConstantSeries(&'static str),
    #[error("paired differences have zero variance")]
    DegenerateDifferences,
}

/// Correlation strength bands. Gaps between the published bands are closed
/// at their midpoints (0.05, 0.35, 0.65, 0.95).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strength {
    Zero,
    Weak,
    Moderate,
    Strong,
    Perfect,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Zero => "Zero",
            Strength::Weak => "Weak",
            Strength::Moderate => "Moderate",
            Strength::Strong => "Strong",
            Strength::Perfect => "Perfect",
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_strength(r: f64) -> Strength {
    let a = r.abs();
    if a < 0.05 {
        Strength::Zero
    } else if a < 0.35 {
        Strength::Weak
    } else if a < 0.65 {
        Strength::Moderate
    } else if a < 0.95 {
        Strength::Strong
    } else {
        Strength::Perfect
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationReport {
    pub n: usize,
    pub r: f64,
    /// Two-tailed p-value.
    pub p: f64,
    pub strength: Strength,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Pearson product-moment `r` and its two-tailed p-value from
/// `t = r·√((n−2)/(1−r²))` on `n − 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx = sum_sq_dev(x, mx);
    let syy = sum_sq_dev(y, my);
    if sxx == 0.0 {
        return Err(StatsError::ConstantSeries("x"));
    }
    if syy == 0.0 {
        return Err(StatsError::ConstantSeries("y"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok((r, correlation_p_value(r, n)))
}

/// Two-tailed p-value for a sample correlation `r` over `n` pairs.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return 0.0;
    }
    let t = r * (df / one_minus).sqrt();
    student_t_two_tailed(t, df)
}

pub fn correlate(x: &[f64], y: &[f64]) -> Result<CorrelationReport, StatsError> {
    let (r, p) = pearson(x, y)?;
    Ok(CorrelationReport {
        n: x.len(),
        r,
        p,
        strength: classify_strength(r),
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Lanczos approximation (g = 7, nine coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // The fraction converges fast for x < (a+1)/(a+b+2); use symmetry otherwise.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

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
    for m in 1..=MAX_ITER {
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
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-tailed paired t-test on `a − b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let md = mean(&diffs);
    let var = sum_sq_dev(&diffs, md) / (n - 1) as f64;
    // constant differences (up to rounding) leave t undefined
    let scale = diffs.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if var.sqrt() <= 1e-12 * scale || var == 0.0 {
        return Err(StatsError::DegenerateDifferences);
    }
    let t = md / (var / n as f64).sqrt();
    Ok(student_t_two_tailed(t, (n - 1) as f64))
}

/// Relative squared error: `Σ(P − real)² / Σ(mean(real) − real)²`.
pub fn rse(predicted: &[f64], actual: &[f64]) -> Result<f64, StatsError> {
    if predicted.len() != actual.len() {
        return Err(StatsError::LengthMismatch(predicted.len(), actual.len()));
    }
    if actual.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: actual.len(),
        });
    }
    let m = mean(actual);
    let denom = sum_sq_dev(actual, m);
    if denom == 0.0 {
        return Err(StatsError::ConstantSeries("actual"));
    }
    let num: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(num / denom)
}

pub fn r_squared(predicted: &[f64], actual: &[f64]) -> Result<f64, StatsError> {
    rse(predicted, actual).map(|e| 1.0 - e)
}
