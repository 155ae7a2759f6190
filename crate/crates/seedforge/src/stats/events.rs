//! Line-oriented trial event logs.
//!
//! Any fuzzer monitor can be adapted to this format:
//!
//! ```text
//! # comment
//! corpus seedforge-png
//! target libpng_read_fuzzer
//! trial 0
//! 60 coverage 1412
//! 60 bugs_reached 2
//! 3600 coverage 1876
//! ```
//!
//! `corpus`/`target`/`trial` header lines open a new series; every
//! following `<elapsed-seconds> <metric> <value>` line updates that series.
//! Metrics are cumulative counts and must never decrease; elapsed times must
//! never decrease (events sharing a timestamp merge into one point).

use super::StatsError;
use std::path::Path;

/// The three cumulative measures a trial reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    BugsReached,
    BugsTriggered,
    Coverage,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::BugsReached => "bugs_reached",
            Metric::BugsTriggered => "bugs_triggered",
            Metric::Coverage => "coverage",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bugs_reached" => Ok(Metric::BugsReached),
            "bugs_triggered" => Ok(Metric::BugsTriggered),
            "coverage" => Ok(Metric::Coverage),
            other => Err(format!(
                "unknown metric '{other}' (bugs_reached|bugs_triggered|coverage)"
            )),
        }
    }
}

/// One snapshot of all three measures at a moment in a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPoint {
    pub elapsed_secs: f64,
    pub bugs_reached: u64,
    pub bugs_triggered: u64,
    pub coverage: u64,
}

/// One trial of one corpus on one target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub corpus: String,
    pub target: String,
    pub trial: u32,
    pub points: Vec<TrialPoint>,
}

#[derive(Default)]
struct Builder {
    corpus: Option<String>,
    target: Option<String>,
    trial: Option<u32>,
    points: Vec<TrialPoint>,
    saw_events: bool,
}

impl Builder {
    fn finish(&mut self, out: &mut Vec<TrialSeries>) {
        if self.saw_events {
            out.push(TrialSeries {
                corpus: self.corpus.clone().unwrap_or_default(),
                target: self.target.clone().unwrap_or_default(),
                trial: self.trial.unwrap_or(0),
                points: std::mem::take(&mut self.points),
            });
        }
        self.points.clear();
        self.saw_events = false;
    }
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> StatsError {
    StatsError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses one event-log file into the trial series it contains.
pub fn parse_event_log(text: &str, file: &str) -> Result<Vec<TrialSeries>, StatsError> {
    let mut out = Vec::new();
    let mut b = Builder::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let first = parts.next().unwrap();
        match first {
            "corpus" | "target" | "trial" => {
                let value = parts.next().map(str::trim).unwrap_or("");
                if value.is_empty() {
                    return Err(parse_err(file, lineno, format!("'{first}' needs a value")));
                }
                // a header after events closes the running series
                if b.saw_events {
                    b.finish(&mut out);
                }
                match first {
                    "corpus" => b.corpus = Some(value.to_string()),
                    "target" => b.target = Some(value.to_string()),
                    _ => {
                        b.trial = Some(value.parse().map_err(|_| {
                            parse_err(file, lineno, format!("bad trial index '{value}'"))
                        })?)
                    }
                }
            }
            _ => {
                let elapsed: f64 = first
                    .parse()
                    .map_err(|_| parse_err(file, lineno, format!("bad elapsed time '{first}'")))?;
                let metric: Metric = parts
                    .next()
                    .ok_or_else(|| parse_err(file, lineno, "missing metric"))?
                    .parse()
                    .map_err(|e: String| parse_err(file, lineno, e))?;
                let value: u64 = {
                    let v = parts
                        .next()
                        .map(str::trim)
                        .ok_or_else(|| parse_err(file, lineno, "missing value"))?;
                    v.parse()
                        .map_err(|_| parse_err(file, lineno, format!("bad value '{v}'")))?
                };
                if b.corpus.is_none() || b.target.is_none() || b.trial.is_none() {
                    return Err(parse_err(
                        file,
                        lineno,
                        "event before corpus/target/trial headers",
                    ));
                }
                if !elapsed.is_finite() || elapsed < 0.0 {
                    return Err(parse_err(file, lineno, "elapsed time must be finite and ≥ 0"));
                }

                let mut point = b.points.last().copied().unwrap_or(TrialPoint {
                    elapsed_secs: elapsed,
                    bugs_reached: 0,
                    bugs_triggered: 0,
                    coverage: 0,
                });
                if let Some(last) = b.points.last() {
                    if elapsed < last.elapsed_secs {
                        return Err(parse_err(
                            file,
                            lineno,
                            format!(
                                "elapsed time went backwards ({} after {})",
                                elapsed, last.elapsed_secs
                            ),
                        ));
                    }
                }
                let slot = match metric {
                    Metric::BugsReached => &mut point.bugs_reached,
                    Metric::BugsTriggered => &mut point.bugs_triggered,
                    Metric::Coverage => &mut point.coverage,
                };
                if value < *slot {
                    return Err(parse_err(
                        file,
                        lineno,
                        format!("{} decreased from {} to {}", metric.as_str(), slot, value),
                    ));
                }
                *slot = value;
                point.elapsed_secs = elapsed;

                match b.points.last_mut() {
                    Some(last) if last.elapsed_secs == elapsed => *last = point,
                    _ => b.points.push(point),
                }
                b.saw_events = true;
            }
        }
    }
    b.finish(&mut out);
    Ok(out)
}

/// Reads every `.log` file under `dir` (sorted by name) and concatenates
/// their series.
pub fn parse_series_dir(dir: &Path) -> Result<Vec<TrialSeries>, StatsError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|source| StatsError::Io {
            path: dir.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "log"))
        .collect();
    paths.sort();
    // one parse per file, fanned out across cores; order (and therefore
    // which error surfaces first) follows the sorted path order
    let parsed = crate::parallel::map_collect(paths, |path| {
        let text = std::fs::read_to_string(&path).map_err(|source| StatsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_event_log(&text, &name)
    });
    let mut out = Vec::new();
    for series in parsed {
        out.extend(series?);
    }
    Ok(out)
}
