//! Seeded Monte Carlo simulation of both tree models, as a statistical
//! oracle against the exact distributions and as the experimental probe
//! for the search-cost covariance question.
//!
//! Trials are independent: trial `i` runs on its own ChaCha8 stream
//! (`seed` as the key, `i` as the stream id), so summaries are
//! bit-identical for a given `SimConfig` no matter how trials are
//! scheduled across threads. Histograms are integer counts and the
//! summary mean/variance are exact rationals derived from them;
//! floating point enters only in standard errors and p-values.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dst::{KeyModel, SearchKind};
use crate::pgf::Pgf;
use crate::rational::Rational;

/// Arbitrary fixed default so documented runs are reproducible.
pub const DEFAULT_SEED: u64 = 0x00c0_ffee;

/// What to simulate. `keys` selects the digital-tree key model and is
/// ignored by the binary-search-tree simulator.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SearchKind,
    pub keys: KeyModel,
}

impl SimConfig {
    pub fn new(n: u64, mode: SearchKind, keys: KeyModel) -> Self {
        SimConfig {
            n,
            trials: 1_000_000,
            seed: DEFAULT_SEED,
            mode,
            keys,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Exact-count histogram with summary statistics derived from it.
/// `mean` and `variance` (Bessel-corrected; zero for a single trial)
/// are exact rationals; `std_error` is their floating-point shadow.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SimSummary {
    pub n: u64,
    pub mode: SearchKind,
    /// `None` for binary search trees, where no key model applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<KeyModel>,
    pub trials: u64,
    pub seed: u64,
    pub histogram: BTreeMap<u32, u64>,
    #[serde(with = "crate::serde_str::rat_str")]
    pub mean: Rational,
    #[serde(with = "crate::serde_str::rat_str")]
    pub variance: Rational,
    pub std_error: f64,
}

impl SimSummary {
    fn from_counts(
        n: u64,
        mode: SearchKind,
        keys: Option<KeyModel>,
        trials: u64,
        seed: u64,
        counts: Vec<u64>,
    ) -> Self {
        let total: u64 = counts.iter().sum();
        assert!(total == trials, "histogram must account for every trial");
        let mut sum = 0u128;
        let mut sum_sq = 0u128;
        let mut histogram = BTreeMap::new();
        for (k, &c) in counts.iter().enumerate() {
            if c > 0 {
                histogram.insert(k as u32, c);
                sum += k as u128 * c as u128;
                sum_sq += (k as u128 * k as u128) * c as u128;
            }
        }
        let big = |v: u128| BigInt::from(v);
        let t = big(trials as u128);
        let mean = Rational::new(big(sum), t.clone());
        let variance = if trials >= 2 {
            // (sum_sq - sum^2/T) / (T-1), kept exact.
            Rational::new(
                big(sum_sq) * &t - big(sum) * big(sum),
                &t * (&t - BigInt::from(1)),
            )
        } else {
            Rational::zero()
        };
        let std_error = (variance.to_f64().unwrap() / trials as f64).sqrt();
        SimSummary {
            n,
            mode,
            keys,
            trials,
            seed,
            histogram,
            mean,
            variance,
            std_error,
        }
    }

    pub fn mean_f64(&self) -> f64 {
        self.mean.to_f64().unwrap()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn max_outcome(n: u64, mode: SearchKind) -> usize {
    match mode {
        SearchKind::Unsuccessful | SearchKind::Successful => n as usize,
        SearchKind::PathLength => (n * (n - 1) / 2) as usize,
    }
}

fn collect_histogram(
    trials: u64,
    size: usize,
    per_trial: impl Fn(u64) -> u32 + Sync,
) -> Vec<u64> {
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut counts, trial| {
                counts[per_trial(trial) as usize] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Simulate binary search tree costs: keys are a uniformly shuffled
/// permutation of the odd integers `1, 3, ..., 2n-1` inserted in order;
/// an unsuccessful probe is a uniform even integer in `0..=2n`, a
/// successful probe a uniform odd key, and path length sums every key's
/// insertion depth.
pub fn simulate_bst(config: &SimConfig) -> SimSummary {
    let &SimConfig {
        n,
        trials,
        seed,
        mode,
        ..
    } = config;
    assert!(n >= 1 && trials >= 1, "need n >= 1 and trials >= 1");
    let size = max_outcome(n, mode) + 1;
    let counts = collect_histogram(trials, size, |trial| {
        let mut rng = trial_rng(seed, trial);
        let mut keys: Vec<i64> = (0..n as i64).map(|i| 2 * i + 1).collect();
        keys.shuffle(&mut rng);
        match mode {
            SearchKind::Unsuccessful => bst_scan_cost(&keys, 2 * rng.gen_range(0..=n as i64)),
            SearchKind::Successful => bst_scan_cost(&keys, 2 * rng.gen_range(0..n as i64) + 1),
            SearchKind::PathLength => {
                (1..n as usize)
                    .map(|j| bst_scan_cost(&keys[..j], keys[j]))
                    .sum()
            }
        }
    });
    SimSummary::from_counts(n, mode, None, trials, seed, counts)
}

/// Comparisons when searching `x` in the tree built by inserting `keys`
/// in order. A key is compared with `x` exactly when it falls strictly
/// inside the interval bracketing `x` at its insertion time (earlier
/// keys outside the interval sit on subtrees the search never enters),
/// and every comparison narrows the interval to the side containing
/// `x`. Scanning in insertion order therefore reproduces the recursive
/// descent's comparison count without building the tree.
fn bst_scan_cost(keys: &[i64], x: i64) -> u32 {
    let (mut lo, mut hi) = (i64::MIN, i64::MAX);
    let mut k = 0;
    for &v in keys {
        if lo < v && v < hi {
            k += 1;
            if x < v {
                hi = v;
            } else if x > v {
                lo = v;
            } else {
                break;
            }
        }
    }
    k
}

/// A key's bit stream, materialized in 64-bit blocks only when a
/// comparison demands the bit. Blocks come from a per-key splitmix64
/// stream, so the bits a key reveals do not depend on when other keys
/// are probed.
struct LazyBits {
    state: u64,
    blocks: Vec<u64>,
}

impl LazyBits {
    fn new(seed: u64) -> Self {
        LazyBits {
            state: seed,
            blocks: Vec::new(),
        }
    }

    /// `p`-th routing bit, 1-indexed.
    fn bit(&mut self, p: usize) -> u8 {
        let idx = (p - 1) / 64;
        while self.blocks.len() <= idx {
            self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            self.blocks.push(z ^ (z >> 31));
        }
        ((self.blocks[idx] >> ((p - 1) % 64)) & 1) as u8
    }
}

/// Digital search tree search over `n` keys: candidates are filtered by
/// agreement with the probe's successive bits, the earliest-inserted
/// candidate is compared first, and a comparison matches exactly at
/// `probe_idx` (identity equality; `probe_idx = n` never matches).
/// `bit(entity, p)` serves key bit streams, with the probe's own stream
/// at `probe_entity`.
fn filter_search_cost(
    n: usize,
    probe_idx: usize,
    probe_entity: usize,
    bit: &mut impl FnMut(usize, usize) -> u8,
) -> u32 {
    let mut cand: Vec<usize> = (0..n).collect();
    let mut k = 0;
    let mut p = 0;
    loop {
        let first = cand[0];
        k += 1;
        if first == probe_idx {
            return k;
        }
        cand.remove(0);
        if cand.is_empty() {
            return k;
        }
        p += 1;
        let b = bit(probe_entity, p);
        cand.retain(|&i| bit(i, p) == b);
        if cand.is_empty() {
            return k;
        }
    }
}

/// Simulate digital search tree costs. Infinite keys are lazy bit
/// streams with identity-tag equality; finite keys are distinct `n`-bit
/// values drawn uniformly without replacement (any duplicate draw is
/// resampled), compared by value.
pub fn simulate_dst(config: &SimConfig) -> SimSummary {
    let &SimConfig {
        n,
        trials,
        seed,
        mode,
        keys,
    } = config;
    assert!(n >= 1 && trials >= 1, "need n >= 1 and trials >= 1");
    assert!(
        keys == KeyModel::Infinite || n <= 62,
        "finite keys are n-bit values; n must be at most 62"
    );
    let size = max_outcome(n, mode) + 1;
    let counts = collect_histogram(trials, size, |trial| {
        let mut rng = trial_rng(seed, trial);
        match keys {
            KeyModel::Infinite => dst_trial_infinite(n as usize, mode, &mut rng),
            KeyModel::Finite => dst_trial_finite(n as usize, mode, &mut rng),
        }
    });
    SimSummary::from_counts(n, mode, Some(keys), trials, seed, counts)
}

fn dst_trial_infinite(n: usize, mode: SearchKind, rng: &mut ChaCha8Rng) -> u32 {
    let mut streams: Vec<LazyBits> = (0..n).map(|_| LazyBits::new(rng.next_u64())).collect();
    match mode {
        SearchKind::Unsuccessful => {
            streams.push(LazyBits::new(rng.next_u64()));
            filter_search_cost(n, n, n, &mut |e, p| streams[e].bit(p))
        }
        SearchKind::Successful => {
            let t = rng.gen_range(0..n);
            filter_search_cost(n, t, t, &mut |e, p| streams[e].bit(p))
        }
        SearchKind::PathLength => (0..n)
            .map(|t| filter_search_cost(n, t, t, &mut |e, p| streams[e].bit(p)) - 1)
            .sum(),
    }
}

fn dst_trial_finite(n: usize, mode: SearchKind, rng: &mut ChaCha8Rng) -> u32 {
    let mut vals: Vec<u64> = Vec::with_capacity(n + 1);
    let draw_distinct = |vals: &Vec<u64>, rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(0..1u64 << n);
        if !vals.contains(&v) {
            return v;
        }
    };
    for _ in 0..n {
        let v = draw_distinct(&vals, rng);
        vals.push(v);
    }
    let bit = move |vals: &[u64], e: usize, p: usize| {
        debug_assert!(p <= n, "finite keys never need a bit past n");
        ((vals[e] >> (n - p)) & 1) as u8
    };
    match mode {
        SearchKind::Unsuccessful => {
            let v = draw_distinct(&vals, rng);
            vals.push(v);
            filter_search_cost(n, n, n, &mut |e, p| bit(&vals, e, p))
        }
        SearchKind::Successful => {
            let t = rng.gen_range(0..n);
            filter_search_cost(n, t, t, &mut |e, p| bit(&vals, e, p))
        }
        SearchKind::PathLength => (0..n)
            .map(|t| filter_search_cost(n, t, t, &mut |e, p| bit(&vals, e, p)) - 1)
            .sum(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SimError {
    #[error("sample covariance needs at least 2 trials")]
    TooFewTrials,
}

/// Covariance of the costs of two distinct successful searches in one
/// tree, estimated across trials.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CovarianceSummary {
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
    /// Unbiased sample covariance, exact from integer accumulators.
    #[serde(with = "crate::serde_str::rat_str")]
    pub covariance: Rational,
    pub covariance_f64: f64,
    pub n_times_covariance: f64,
    /// First-order standard error: sd of the per-trial products of
    /// deviations, divided by sqrt(trials).
    pub std_error: f64,
}

/// Per trial: build one infinite-key digital search tree on `n` keys,
/// pick an ordered pair of distinct keys uniformly, and record both
/// successful search costs. Accumulates the eight power sums of the
/// cost pair exactly, so the covariance and its standard error are
/// derived without rounding.
pub fn simulate_dst_cost_covariance(
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<CovarianceSummary, SimError> {
    assert!(n >= 2, "need two distinct keys");
    if trials < 2 {
        return Err(SimError::TooFewTrials);
    }
    let nn = n as usize;
    // s[0..8] = sums of a, b, ab, a^2, b^2, a^2 b, a b^2, a^2 b^2.
    let sums = (0..trials)
        .into_par_iter()
        .fold(
            || [0u128; 8],
            |mut s, trial| {
                let mut rng = trial_rng(seed, trial);
                let mut streams: Vec<LazyBits> =
                    (0..nn).map(|_| LazyBits::new(rng.next_u64())).collect();
                let i = rng.gen_range(0..nn);
                let mut j = rng.gen_range(0..nn - 1);
                if j >= i {
                    j += 1;
                }
                let a = filter_search_cost(nn, i, i, &mut |e, p| streams[e].bit(p)) as u128;
                let b = filter_search_cost(nn, j, j, &mut |e, p| streams[e].bit(p)) as u128;
                for (slot, v) in s.iter_mut().zip([
                    a,
                    b,
                    a * b,
                    a * a,
                    b * b,
                    a * a * b,
                    a * b * b,
                    a * a * b * b,
                ]) {
                    *slot += v;
                }
                s
            },
        )
        .reduce(
            || [0u128; 8],
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        );

    let r = |v: u128| Rational::from_integer(BigInt::from(v));
    let [sa, sb, sab, saa, sbb, saab, sabb, saabb] = sums.map(r);
    let t = r(trials as u128);
    let ma = &sa / &t;
    let mb = &sb / &t;
    // sum of d_i = (a_i - ma)(b_i - mb) and of d_i^2, expanded in the
    // raw power sums.
    let sd = &sab - &mb * &sa - &ma * &sb + &t * &ma * &mb;
    let sdd = &saabb - (&mb * &saab + &ma * &sabb) * Rational::from_integer(BigInt::from(2))
        + &mb * &mb * &saa
        + &ma * &ma * &sbb
        + &ma * &mb * &sab * Rational::from_integer(BigInt::from(4))
        - (&ma * &mb * &mb * &sa + &ma * &ma * &mb * &sb) * Rational::from_integer(BigInt::from(2))
        + &t * &ma * &ma * &mb * &mb;
    let tm1 = &t - Rational::from_integer(BigInt::from(1));
    let covariance = &sd / &tm1;
    let var_d = (&sdd - &sd * &sd / &t) / &tm1;
    let std_error = (var_d.to_f64().unwrap() / trials as f64).sqrt();
    let covariance_f64 = covariance.to_f64().unwrap();
    Ok(CovarianceSummary {
        n,
        trials,
        seed,
        covariance,
        covariance_f64,
        n_times_covariance: n as f64 * covariance_f64,
        std_error,
    })
}

/// Upper-tail chi-square p-value of the simulated histogram against the
/// exact distribution, over the exact support. An observation outside
/// the support is impossible under the model and returns 0.
pub fn chi_square_p_value(histogram: &BTreeMap<u32, u64>, exact: &Pgf, trials: u64) -> f64 {
    let support: Vec<usize> = (0..exact.coeffs().len())
        .filter(|&k| !exact.coeff(k).is_zero())
        .collect();
    if histogram
        .keys()
        .any(|&k| !support.contains(&(k as usize)))
    {
        return 0.0;
    }
    if support.len() <= 1 {
        return 1.0;
    }
    let mut x2 = 0.0;
    for &k in &support {
        let expected = exact.coeff(k).to_f64().unwrap() * trials as f64;
        let observed = *histogram.get(&(k as u32)).unwrap_or(&0) as f64;
        x2 += (observed - expected) * (observed - expected) / expected;
    }
    let dof = (support.len() - 1) as f64;
    ChiSquared::new(dof).unwrap().sf(x2)
}
