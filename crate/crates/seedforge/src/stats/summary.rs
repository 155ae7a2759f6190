//! Confidence intervals and coverage normalization.

use super::{StatsError, TrialSeries};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;

/// 95% t-interval: mean ± t_{0.975, n−1} · s/√n with the sample standard
/// deviation. Constant samples give a zero-width interval.
pub fn confidence_interval_95(samples: &[f64]) -> Result<(f64, f64), StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::InsufficientSamples(n));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .expect("valid t distribution")
        .inverse_cdf(0.975);
    let half = t * sd / nf.sqrt();
    Ok((mean - half, mean + half))
}

pub fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// One trial's coverage series rescaled against the baseline corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub corpus: String,
    pub target: String,
    pub trial: u32,
    /// (elapsed seconds, coverage / baseline mean final coverage)
    pub points: Vec<(f64, f64)>,
}

/// Result of [`normalize_coverage`]: the rescaled series plus per-target
/// error entries for targets the baseline does not cover.
#[derive(Debug, Clone, Default)]
pub struct NormalizeOutcome {
    pub series: Vec<NormalizedSeries>,
    /// (target, reason) for targets that could not be normalized.
    pub errors: Vec<(String, String)>,
}

/// Divides every coverage point by the baseline corpus's mean final coverage
/// for the same target. Targets missing from the baseline (or with a
/// non-positive baseline) produce error entries; the rest proceed.
pub fn normalize_coverage(series: &[TrialSeries], baseline: &[TrialSeries]) -> NormalizeOutcome {
    // target -> final coverage per baseline trial
    let mut finals: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in baseline {
        if let Some(last) = s.points.last() {
            finals
                .entry(s.target.as_str())
                .or_default()
                .push(last.coverage as f64);
        }
    }
    let baseline_mean: BTreeMap<&str, f64> = finals
        .iter()
        .map(|(target, v)| (*target, mean(v)))
        .collect();

    let mut out = NormalizeOutcome::default();
    let mut failed_targets: BTreeMap<String, String> = BTreeMap::new();
    for s in series {
        match baseline_mean.get(s.target.as_str()) {
            Some(&denom) if denom > 0.0 => {
                out.series.push(NormalizedSeries {
                    corpus: s.corpus.clone(),
                    target: s.target.clone(),
                    trial: s.trial,
                    points: s
                        .points
                        .iter()
                        .map(|p| (p.elapsed_secs, p.coverage as f64 / denom))
                        .collect(),
                });
            }
            Some(_) => {
                failed_targets
                    .entry(s.target.clone())
                    .or_insert_with(|| "baseline final coverage is not positive".to_string());
            }
            None => {
                failed_targets
                    .entry(s.target.clone())
                    .or_insert_with(|| "target missing from baseline".to_string());
            }
        }
    }
    out.errors = failed_targets.into_iter().collect();
    out
}
