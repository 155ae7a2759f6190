//! Compares the rayon data-parallel kernels against their sequential
//! fallbacks on the two workloads that actually use them: the 2^n mask
//! enumeration inside the exact Wilcoxon test, and the per-file event-log
//! parse behind `stats --series`.
//!
//! Run the parallel side with the default features and the sequential-only
//! build with `cargo bench --no-default-features`; both variants are also
//! benchmarked side by side here when the `parallel` feature is on.

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
#[cfg(feature = "parallel")]
use seedforge::parallel::{par_count_masks, par_map_collect};
use seedforge::parallel::{seq_count_masks, seq_map_collect};
use seedforge::stats::parse_event_log;
use std::hint::black_box;

/// The exact-test inner loop: W+ (doubled ranks) of the mask, compared
/// against an observed value. Mirrors the hot closure in the stats module.
fn mask_hits(ranks2: &[u64], w2_obs: u64, mask: u64) -> u64 {
    let mut w2 = 0u64;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        w2 += ranks2[i];
        m &= m - 1;
    }
    u64::from(w2 >= w2_obs)
}

fn bench_mask_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("wilcoxon_exact_masks");
    group.sample_size(20);
    for n in [16u32, 20, 22] {
        // doubled ranks with a tie pair every fourth entry, observed W+ at
        // the 75th percentile — a plausible mid-tail query
        let ranks2: Vec<u64> = (1..=n as u64).map(|i| if i % 4 == 0 { 2 * i - 1 } else { 2 * i }).collect();
        let w2_obs = ranks2.iter().sum::<u64>() * 3 / 4;

        group.bench_with_input(BenchmarkId::new("seq", n), &n, |b, &n| {
            b.iter(|| {
                black_box(seq_count_masks(n, |mask| mask_hits(&ranks2, w2_obs, mask)))
            })
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &n, |b, &n| {
            b.iter(|| {
                black_box(par_count_masks(n, |mask| mask_hits(&ranks2, w2_obs, mask)))
            })
        });
    }
    group.finish();
}

/// A synthetic trial event log shaped like real fuzzing campaign output.
fn synth_log(trials: usize, points: usize) -> String {
    let mut text = String::from("corpus forge\ntarget libdemo\n");
    for trial in 0..trials {
        text.push_str(&format!("trial {trial}\n"));
        for p in 1..=points {
            let t = p * 60;
            text.push_str(&format!("{t} coverage {}\n", 1000 + p * 7 + trial));
            if p % 5 == 0 {
                text.push_str(&format!("{t} bugs_reached {}\n", p / 5));
            }
        }
        text.push('\n');
    }
    text
}

fn bench_event_log_parse(c: &mut Criterion) {
    let mut group = c.benchmark_group("event_log_parse");
    group.sample_size(30);
    let logs: Vec<String> = (0..48).map(|_| synth_log(10, 240)).collect();

    group.bench_function("seq", |b| {
        b.iter_batched(
            || logs.clone(),
            |logs| {
                black_box(seq_map_collect(logs, |text| {
                    parse_event_log(&text, "bench.log").expect("synthetic log parses")
                }))
            },
            BatchSize::LargeInput,
        )
    });
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| {
        b.iter_batched(
            || logs.clone(),
            |logs| {
                black_box(par_map_collect(logs, |text| {
                    parse_event_log(&text, "bench.log").expect("synthetic log parses")
                }))
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_mask_enumeration, bench_event_log_parse);
criterion_main!(benches);
