//! Evaluation statistics over externally supplied trial data: one-sided
//! Wilcoxon signed-rank tests, 95% confidence intervals, and coverage
//! normalization, with CSV emission for downstream plotting.

mod events;
mod report;
mod summary;
mod wilcoxon;

pub use events::{parse_event_log, parse_series_dir, Metric, TrialPoint, TrialSeries};
pub use report::{read_pairs_csv, run_stats, StatsArgs};
pub use summary::{confidence_interval_95, normalize_coverage, NormalizeOutcome, NormalizedSeries};
pub use wilcoxon::{
    wilcoxon_approx_from_diffs, wilcoxon_exact_from_diffs, wilcoxon_from_diffs,
    wilcoxon_one_sided, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N,
};

use thiserror::Error;

/// Direction of the one-sided alternative hypothesis for differences x − y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Alternative: median(X) > median(Y).
    Greater,
    /// Alternative: median(X) < median(Y).
    Less,
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "greater" => Ok(Direction::Greater),
            "less" => Ok(Direction::Less),
            other => Err(format!("unknown direction '{other}' (use greater|less)")),
        }
    }
}

/// Per-target paired observations (x_t, y_t) for two corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    /// Target labels keying the pairing.
    pub labels: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PairedSample {
    pub fn new(labels: Vec<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self, StatsError> {
        if x.len() != y.len() || labels.len() != x.len() {
            return Err(StatsError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        Ok(PairedSample { labels, x, y })
    }

    pub fn differences(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a - b).collect()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("all paired differences are zero")]
    DegenerateSample,
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("paired sample lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
