//! The `seedforge stats` driver: reads paired samples and/or trial series,
//! runs the tests, and emits CSV tables for downstream plotting.

use super::{
    confidence_interval_95, normalize_coverage, parse_series_dir, wilcoxon_one_sided, Direction,
    Metric, PairedSample, StatsError, TrialSeries,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct StatsArgs {
    /// CSV of `label,x,y` paired observations.
    pub pairs: Option<PathBuf>,
    /// Directory of `.log` trial event files.
    pub series: Option<PathBuf>,
    pub direction: Direction,
    /// Corpus label used as the normalization baseline.
    pub baseline_corpus: Option<String>,
    pub out_dir: PathBuf,
}

/// Runs the stats subcommand; returns the paths of every file written.
pub fn run_stats(args: &StatsArgs) -> Result<Vec<PathBuf>, StatsError> {
    let mut written = Vec::new();
    std::fs::create_dir_all(&args.out_dir).map_err(|source| StatsError::Io {
        path: args.out_dir.display().to_string(),
        source,
    })?;

    if let Some(pairs_path) = &args.pairs {
        let pairs = read_pairs_csv(pairs_path)?;
        written.extend(emit_pairs_tables(&pairs, args.direction, &args.out_dir)?);
    }

    if let Some(series_dir) = &args.series {
        let series = parse_series_dir(series_dir)?;
        written.extend(emit_series_tables(
            &series,
            args.baseline_corpus.as_deref(),
            &args.out_dir,
        )?);
    }

    Ok(written)
}

/// Reads `label,x,y` rows; a header row is tolerated and skipped.
pub fn read_pairs_csv(path: &Path) -> Result<PairedSample, StatsError> {
    let text = std::fs::read_to_string(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = path.display().to_string();
    let mut labels = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(StatsError::Parse {
                file,
                line: idx + 1,
                message: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let parsed = fields[1].parse::<f64>().and_then(|a| {
            fields[2].parse::<f64>().map(|b| (a, b))
        });
        match parsed {
            Ok((a, b)) => {
                labels.push(fields[0].to_string());
                x.push(a);
                y.push(b);
            }
            Err(_) if idx == 0 => continue, // header row
            Err(_) => {
                return Err(StatsError::Parse {
                    file,
                    line: idx + 1,
                    message: format!("bad numeric fields '{}', '{}'", fields[1], fields[2]),
                });
            }
        }
    }
    PairedSample::new(labels, x, y)
}

fn emit_pairs_tables(
    pairs: &PairedSample,
    direction: Direction,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, StatsError> {
    let mut written = Vec::new();

    let mut wilcoxon_csv = String::from("n_pairs,n_nonzero,direction,w_plus,p_value,method\n");
    match wilcoxon_one_sided(pairs, direction) {
        Ok(r) => {
            let dir_name = match direction {
                Direction::Greater => "greater",
                Direction::Less => "less",
            };
            writeln!(
                wilcoxon_csv,
                "{},{},{},{},{},{}",
                pairs.len(),
                r.n_nonzero,
                dir_name,
                r.w_plus,
                r.p_value,
                r.method.as_str()
            )
            .unwrap();
        }
        Err(StatsError::DegenerateSample) => {
            log::warn!("wilcoxon: all paired differences are zero; no test performed");
            writeln!(wilcoxon_csv, "{},0,,,,degenerate", pairs.len()).unwrap();
        }
        Err(e) => return Err(e),
    }
    written.push(write_file(out_dir, "wilcoxon.csv", &wilcoxon_csv)?);

    let diffs = pairs.differences();
    let mut summary = String::from(
        "n,mean_x,x_ci_low,x_ci_high,mean_y,y_ci_low,y_ci_high,mean_diff,diff_ci_low,diff_ci_high\n",
    );
    let row = [
        ci_cells(&pairs.x),
        ci_cells(&pairs.y),
        ci_cells(&diffs),
    ]
    .join(",");
    writeln!(summary, "{},{}", pairs.len(), row).unwrap();
    written.push(write_file(out_dir, "pairs_summary.csv", &summary)?);
    Ok(written)
}

fn ci_cells(samples: &[f64]) -> String {
    let mean = super::summary::mean(samples);
    match confidence_interval_95(samples) {
        Ok((lo, hi)) => format!("{mean},{lo},{hi}"),
        Err(_) => format!("{mean},,"),
    }
}

const METRICS: [Metric; 3] = [Metric::BugsReached, Metric::BugsTriggered, Metric::Coverage];

fn metric_value(p: &super::TrialPoint, metric: Metric) -> u64 {
    match metric {
        Metric::BugsReached => p.bugs_reached,
        Metric::BugsTriggered => p.bugs_triggered,
        Metric::Coverage => p.coverage,
    }
}

fn emit_series_tables(
    series: &[TrialSeries],
    baseline_corpus: Option<&str>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, StatsError> {
    let mut written = Vec::new();

    // (corpus, target) -> trials
    let mut groups: BTreeMap<(String, String), Vec<&TrialSeries>> = BTreeMap::new();
    for s in series {
        groups
            .entry((s.corpus.clone(), s.target.clone()))
            .or_default()
            .push(s);
    }

    // per_target.csv: final-value mean + CI per corpus/target/metric
    let mut per_target =
        String::from("corpus,target,metric,n_trials,mean_final,ci_low,ci_high\n");
    // corpus -> metric -> per-target means (for summary.csv)
    let mut corpus_rollup: BTreeMap<(String, &'static str), Vec<f64>> = BTreeMap::new();
    for ((corpus, target), trials) in &groups {
        for metric in METRICS {
            let finals: Vec<f64> = trials
                .iter()
                .filter_map(|s| s.points.last())
                .map(|p| metric_value(p, metric) as f64)
                .collect();
            writeln!(
                per_target,
                "{},{},{},{},{}",
                csv_escape(corpus),
                csv_escape(target),
                metric.as_str(),
                finals.len(),
                ci_cells(&finals)
            )
            .unwrap();
            corpus_rollup
                .entry((corpus.clone(), metric.as_str()))
                .or_default()
                .push(super::summary::mean(&finals));
        }
    }
    written.push(write_file(out_dir, "per_target.csv", &per_target)?);

    // summary.csv: across targets per corpus
    let mut summary = String::from("corpus,metric,n_targets,mean,ci_low,ci_high\n");
    for ((corpus, metric), target_means) in &corpus_rollup {
        writeln!(
            summary,
            "{},{},{},{}",
            csv_escape(corpus),
            metric,
            target_means.len(),
            ci_cells(target_means)
        )
        .unwrap();
    }
    written.push(write_file(out_dir, "summary.csv", &summary)?);

    // series_mean.csv: trial-mean time series per corpus/target/metric,
    // step-aligned on the union of event times (a trial contributes its
    // last-known value at each time; 0 before its first event).
    let mut series_mean = String::from("corpus,target,metric,elapsed_secs,mean_value\n");
    for ((corpus, target), trials) in &groups {
        let mut times: Vec<f64> = trials
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.elapsed_secs))
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        for metric in METRICS {
            for &t in &times {
                let vals: Vec<f64> = trials
                    .iter()
                    .map(|s| {
                        s.points
                            .iter()
                            .take_while(|p| p.elapsed_secs <= t)
                            .last()
                            .map(|p| metric_value(p, metric) as f64)
                            .unwrap_or(0.0)
                    })
                    .collect();
                writeln!(
                    series_mean,
                    "{},{},{},{},{}",
                    csv_escape(corpus),
                    csv_escape(target),
                    metric.as_str(),
                    t,
                    super::summary::mean(&vals)
                )
                .unwrap();
            }
        }
    }
    written.push(write_file(out_dir, "series_mean.csv", &series_mean)?);

    if let Some(baseline_label) = baseline_corpus {
        let baseline: Vec<TrialSeries> = series
            .iter()
            .filter(|s| s.corpus == baseline_label)
            .cloned()
            .collect();
        let outcome = normalize_coverage(series, &baseline);
        let mut norm = String::from("corpus,target,trial,elapsed_secs,normalized_coverage\n");
        for s in &outcome.series {
            for (t, v) in &s.points {
                writeln!(
                    norm,
                    "{},{},{},{},{}",
                    csv_escape(&s.corpus),
                    csv_escape(&s.target),
                    s.trial,
                    t,
                    v
                )
                .unwrap();
            }
        }
        written.push(write_file(out_dir, "normalized_coverage.csv", &norm)?);
        if !outcome.errors.is_empty() {
            let mut errs = String::from("target,reason\n");
            for (target, reason) in &outcome.errors {
                log::warn!("normalize_coverage: {target}: {reason}");
                writeln!(errs, "{},{}", csv_escape(target), csv_escape(reason)).unwrap();
            }
            written.push(write_file(out_dir, "normalize_errors.csv", &errs)?);
        }
    }

    Ok(written)
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, StatsError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}
