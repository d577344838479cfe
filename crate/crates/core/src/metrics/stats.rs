use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::MetricsError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); needs n >= 2.
    pub sd: Option<f64>,
    /// Moment coefficient of skewness g1; needs n >= 3.
    pub skewness: Option<f64>,
    /// Excess kurtosis g2; needs n >= 3.
    pub kurtosis: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn summarize(xs: &[f64]) -> Result<Summary, MetricsError> {
    if xs.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let n = xs.len();
    let m = mean(xs);
    let central = |p: i32| xs.iter().map(|x| (x - m).powi(p)).sum::<f64>() / n as f64;
    let (skewness, kurtosis) = if n >= 3 {
        let m2 = central(2);
        if m2 == 0.0 {
            (Some(0.0), Some(0.0))
        } else {
            (
                Some(central(3) / m2.powf(1.5)),
                Some(central(4) / (m2 * m2) - 3.0),
            )
        }
    } else {
        (None, None)
    };
    Ok(Summary {
        n,
        median: median(xs).expect("non-empty"),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: m,
        sd: (n >= 2).then(|| sample_variance(xs).sqrt()),
        skewness,
        kurtosis,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MannWhitney {
    /// U of the first sample: pairs where it is larger, ties counting half.
    pub u_a: f64,
    pub u_b: f64,
    pub z: f64,
    /// Two-sided p-value from the normal approximation with tie and
    /// continuity correction.
    pub p: f64,
}

/// Midranks (1-based) of `xs`.
fn midranks(xs: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&all);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u_a = ra - na * (na + 1.0) / 2.0;
    let u_b = na * nb - u_a;
    let n = na + nb;
    let mu = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)).max(1.0));
    let (z, p) = if var <= 0.0 {
        (0.0, 1.0)
    } else {
        let z = ((u_a - mu).abs() - 0.5).max(0.0) / var.sqrt();
        let phi = Normal::new(0.0, 1.0).expect("standard normal").cdf(z);
        (z, (2.0 * (1.0 - phi)).min(1.0))
    };
    Ok(MannWhitney { u_a, u_b, z, p })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohensD {
    pub d: f64,
    pub label: EffectSize,
}

/// Cohen's d of `a` against `b` with pooled standard deviation; `None`
/// when the pooled deviation is zero.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<Option<CohensD>, MetricsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricsError::TooFewSamples { need: 2 });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 {
        return Ok(None);
    }
    let d = (mean(a) - mean(b)) / pooled;
    let label = match d.abs() {
        x if x < 0.2 => EffectSize::Negligible,
        x if x < 0.5 => EffectSize::Small,
        x if x < 0.8 => EffectSize::Medium,
        _ => EffectSize::Large,
    };
    Ok(Some(CohensD { d, label }))
}
