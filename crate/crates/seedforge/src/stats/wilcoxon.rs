//! One-sided Wilcoxon signed-rank test.
//!
//! Zero differences are dropped; tied magnitudes receive average ranks. For
//! n ≤ [`EXACT_MAX_N`] nonzero differences the p-value is exact, computed by
//! enumerating all 2^n sign assignments; beyond that a normal approximation
//! with continuity and tie corrections is used.

use super::{Direction, PairedSample, StatsError};
use crate::parallel;
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest nonzero-difference count enumerated exactly (2^25 sign vectors).
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

impl WilcoxonMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApprox => "normal_approx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Count of nonzero differences actually ranked.
    pub n_nonzero: usize,
    /// Sum of the ranks of positive differences (W+).
    pub w_plus: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Tests `median(X) cmp median(Y)` over paired observations.
pub fn wilcoxon_one_sided(
    pairs: &PairedSample,
    direction: Direction,
) -> Result<WilcoxonResult, StatsError> {
    wilcoxon_from_diffs(&pairs.differences(), direction)
}

/// Same test, starting from precomputed differences x − y.
pub fn wilcoxon_from_diffs(
    diffs: &[f64],
    direction: Direction,
) -> Result<WilcoxonResult, StatsError> {
    let ranked = rank_nonzero(diffs)?;
    if ranked.n <= EXACT_MAX_N {
        Ok(exact_p(&ranked, direction))
    } else {
        Ok(approx_p(&ranked, direction))
    }
}

/// Forces the exact-enumeration path regardless of n. Panics over ~2^63
/// masks; callers keep n small.
pub fn wilcoxon_exact_from_diffs(
    diffs: &[f64],
    direction: Direction,
) -> Result<WilcoxonResult, StatsError> {
    let ranked = rank_nonzero(diffs)?;
    assert!(ranked.n < 63, "exact enumeration infeasible for n = {}", ranked.n);
    Ok(exact_p(&ranked, direction))
}

/// Forces the normal-approximation path regardless of n.
pub fn wilcoxon_approx_from_diffs(
    diffs: &[f64],
    direction: Direction,
) -> Result<WilcoxonResult, StatsError> {
    let ranked = rank_nonzero(diffs)?;
    Ok(approx_p(&ranked, direction))
}

/// Ranking of nonzero differences. Ranks are stored doubled so tie-averaged
/// half-ranks stay exact integers.
struct Ranked {
    n: usize,
    /// 2 × rank of each nonzero difference.
    ranks2: Vec<u64>,
    /// Sizes of tie groups among the absolute differences.
    tie_groups: Vec<usize>,
    /// 2 × W+.
    w2_plus: u64,
}

fn rank_nonzero(diffs: &[f64]) -> Result<Ranked, StatsError> {
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(StatsError::DegenerateSample);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        nonzero[a]
            .abs()
            .partial_cmp(&nonzero[b].abs())
            .expect("finite values compare")
    });

    let mut ranks2 = vec![0u64; n];
    let mut tie_groups = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        // positions i..=j (0-based) share the average of 1-based ranks
        // i+1..=j+1, which doubled is exactly (i + j + 2).
        let r2 = (i + j + 2) as u64;
        for &idx in &order[i..=j] {
            ranks2[idx] = r2;
        }
        tie_groups.push(j - i + 1);
        i = j + 1;
    }

    let positive: Vec<bool> = nonzero.iter().map(|d| *d > 0.0).collect();
    let w2_plus: u64 = ranks2
        .iter()
        .zip(&positive)
        .filter(|(_, &p)| p)
        .map(|(r2, _)| *r2)
        .sum();

    Ok(Ranked {
        n,
        ranks2,
        tie_groups,
        w2_plus,
    })
}

/// Exact p-value: the fraction of the 2^n equally likely sign assignments
/// whose W+ is at least (Greater) or at most (Less) the observed one.
fn exact_p(ranked: &Ranked, direction: Direction) -> WilcoxonResult {
    let n = ranked.n;
    let ranks2 = ranked.ranks2.clone();
    let w2_obs = ranked.w2_plus;
    let count = parallel::count_masks(n as u32, move |mask| {
        let mut w2: u64 = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            w2 += ranks2[i];
            m &= m - 1;
        }
        let hit = match direction {
            Direction::Greater => w2 >= w2_obs,
            Direction::Less => w2 <= w2_obs,
        };
        u64::from(hit)
    });
    let p = (count as f64 / (1u64 << n) as f64).clamp(f64::MIN_POSITIVE, 1.0);
    WilcoxonResult {
        n_nonzero: n,
        w_plus: ranked.w2_plus as f64 / 2.0,
        p_value: p,
        method: WilcoxonMethod::Exact,
    }
}

/// Normal approximation with continuity correction and tie-corrected
/// variance: μ = n(n+1)/4, σ² = n(n+1)(2n+1)/24 − Σ(t³−t)/48.
fn approx_p(ranked: &Ranked, direction: Direction) -> WilcoxonResult {
    let n = ranked.n as f64;
    let w_plus = ranked.w2_plus as f64 / 2.0;
    let mean = n * (n + 1.0) / 4.0;
    let tie_sum: f64 = ranked
        .tie_groups
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum / 48.0;
    let sd = var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = match direction {
        // P(W+ ≥ w) with continuity: survival at (w − ½ − μ)/σ, computed as
        // Φ(−z) to keep precision in the tail.
        Direction::Greater => std_normal.cdf(-((w_plus - 0.5 - mean) / sd)),
        Direction::Less => std_normal.cdf((w_plus + 0.5 - mean) / sd),
    };
    WilcoxonResult {
        n_nonzero: ranked.n,
        w_plus,
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        method: WilcoxonMethod::NormalApprox,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute-force oracle: float ranks, sequential enumeration
    /// over sign vectors. Deliberately written with a different rank
    /// representation than the implementation.
    fn oracle_p(diffs: &[f64], direction: Direction) -> f64 {
        let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
        let n = nz.len();
        assert!(n > 0 && n < 25);
        let mut abs: Vec<(f64, usize)> =
            nz.iter().enumerate().map(|(i, d)| (d.abs(), i)).collect();
        abs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut ranks = vec![0.0f64; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && abs[j + 1].0 == abs[i].0 {
                j += 1;
            }
            let avg = (i + 1 + j + 1) as f64 / 2.0;
            for k in i..=j {
                ranks[abs[k].1] = avg;
            }
            i = j + 1;
        }
        let w_obs: f64 = nz
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| *r)
            .sum();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let w: f64 = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ranks[i])
                .sum();
            let hit = match direction {
                Direction::Greater => w >= w_obs - 1e-12,
                Direction::Less => w <= w_obs + 1e-12,
            };
            if hit {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn all_positive_n5_is_exactly_one_thirtysecond() {
        let r = wilcoxon_from_diffs(&[1.0, 2.0, 3.0, 4.0, 5.0], Direction::Greater).unwrap();
        assert_eq!(r.p_value, 0.03125);
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
    }

    #[test]
    fn all_zero_differences_is_degenerate() {
        let err = wilcoxon_from_diffs(&[0.0, 0.0, 0.0], Direction::Greater).unwrap_err();
        assert!(matches!(err, StatsError::DegenerateSample));
    }

    #[test]
    fn zeros_are_dropped_before_ranking() {
        let with_zeros = wilcoxon_from_diffs(&[0.0, 1.0, 0.0, 2.0, 3.0], Direction::Greater).unwrap();
        let without = wilcoxon_from_diffs(&[1.0, 2.0, 3.0], Direction::Greater).unwrap();
        assert_eq!(with_zeros.p_value, without.p_value);
        assert_eq!(with_zeros.n_nonzero, 3);
    }

    #[test]
    fn untied_n8_matches_reference_values() {
        // Cross-checked against an independent scientific-python
        // implementation (exact mode): identical to 1e-15.
        let d = [3.0, -1.0, 2.0, 5.0, -7.0, 4.0, 10.0, -6.0];
        let g = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        let l = wilcoxon_from_diffs(&d, Direction::Less).unwrap();
        assert!((g.p_value - 0.3203125).abs() < 1e-15, "greater = {}", g.p_value);
        assert!((l.p_value - 0.7265625).abs() < 1e-15, "less = {}", l.p_value);
    }

    #[test]
    fn tied_magnitudes_use_average_ranks() {
        // |d| = [2,2,3,3,1,4]: two tie pairs. Enumeration oracle value.
        let d = [2.0, -2.0, 3.0, 3.0, -1.0, 4.0];
        let g = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        assert!((g.p_value - 0.09375).abs() < 1e-15);
        let l = wilcoxon_from_diffs(&d, Direction::Less).unwrap();
        assert!((l.p_value - 0.9375).abs() < 1e-15);
        assert_eq!(g.p_value, oracle_p(&d, Direction::Greater));
        assert_eq!(l.p_value, oracle_p(&d, Direction::Less));
    }

    #[test]
    fn tied_n8_instance() {
        let d = [3.0, -1.0, 2.0, 5.0, -2.0, 4.0, 1.0, -6.0];
        let g = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        assert_eq!(g.w_plus, 23.0);
        assert!((g.p_value - 0.265625).abs() < 1e-15);
        assert_eq!(g.p_value, oracle_p(&d, Direction::Greater));
    }

    #[test]
    fn random_small_instances_match_oracle() {
        // Deterministic xorshift so the test is reproducible.
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..200 {
            let n = 2 + (next() % 9) as usize;
            let diffs: Vec<f64> = (0..n)
                .map(|_| {
                    let v = (next() % 13) as i64 - 6;
                    v as f64
                })
                .collect();
            if diffs.iter().all(|d| *d == 0.0) {
                continue;
            }
            for direction in [Direction::Greater, Direction::Less] {
                let got = wilcoxon_from_diffs(&diffs, direction).unwrap();
                let want = oracle_p(&diffs, direction);
                assert!(
                    (got.p_value - want).abs() < 1e-12,
                    "trial {trial}: diffs {diffs:?} got {} want {want}",
                    got.p_value
                );
            }
        }
    }

    #[test]
    fn approx_matches_reference_for_n30() {
        // Frozen from an independent reference implementation (normal
        // approximation with continuity and tie corrections).
        let d: Vec<f64> = [
            8, 2, 3, 8, 1, 5, 6, -5, -8, -4, -4, 7, 8, -9, 1, 6, -7, 6, -7, -1, 6, -4, -3, -4,
            4, -5, 9, -1, 1, 1,
        ]
        .iter()
        .map(|&v| v as f64)
        .collect();
        let g = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        assert_eq!(g.method, WilcoxonMethod::NormalApprox);
        assert_eq!(g.w_plus, 267.5);
        // tolerance 1e-8: the normal-CDF implementations differ below that
        assert!((g.p_value - 0.23847769470733282).abs() < 1e-8, "got {}", g.p_value);
        let l = wilcoxon_from_diffs(&d, Direction::Less).unwrap();
        assert!((l.p_value - 0.7678615925147965).abs() < 1e-8, "got {}", l.p_value);
    }

    #[test]
    fn invariant_under_positive_rescaling() {
        let d = [3.0, -1.0, 2.0, 5.0, -2.0, 4.0, 1.0, -6.0];
        let scaled: Vec<f64> = d.iter().map(|v| v * 17.5).collect();
        let a = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        let b = wilcoxon_from_diffs(&scaled, Direction::Greater).unwrap();
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn exact_and_approx_agree_in_sanity_band() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..8 {
            let n = 20 + (next() % 6) as usize; // 20..=25
            let diffs: Vec<f64> = (0..n)
                .map(|_| {
                    let v = (next() % 41) as i64 - 20;
                    if v == 0 {
                        1.0
                    } else {
                        v as f64
                    }
                })
                .collect();
            for direction in [Direction::Greater, Direction::Less] {
                let exact = wilcoxon_exact_from_diffs(&diffs, direction).unwrap();
                let approx = wilcoxon_approx_from_diffs(&diffs, direction).unwrap();
                assert!(
                    (exact.p_value - approx.p_value).abs() < 0.01,
                    "n={n} exact {} vs approx {}",
                    exact.p_value,
                    approx.p_value
                );
            }
        }
    }

    #[test]
    fn p_value_always_in_unit_interval() {
        // extreme all-negative case under "greater": p must stay ≤ 1, > 0
        let d: Vec<f64> = (1..=10).map(|v| -(v as f64)).collect();
        let r = wilcoxon_from_diffs(&d, Direction::Greater).unwrap();
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        assert_eq!(r.p_value, 1.0);
        let l = wilcoxon_from_diffs(&d, Direction::Less).unwrap();
        assert!((l.p_value - 1.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn paired_sample_api() {
        let pairs = PairedSample::new(
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec![5.0, 7.0, 9.0],
            vec![4.0, 5.0, 6.0],
        )
        .unwrap();
        let r = wilcoxon_one_sided(&pairs, Direction::Greater).unwrap();
        assert_eq!(r.n_nonzero, 3);
        assert_eq!(r.p_value, 0.125);
        assert!(PairedSample::new(vec!["a".into()], vec![1.0], vec![1.0, 2.0]).is_err());
    }
}
