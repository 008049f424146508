//! Exhaustive-enumeration oracle for digital search tree costs.
//!
//! Every recursion and golden table in `crate::dst` can be re-derived
//! here by brute force: lay out the keys (and, for unsuccessful search,
//! the probe) as explicit bit matrices, run the search on each equally
//! likely configuration, and count. Nothing is shared with the
//! recursive route, so agreement is meaningful evidence.
//!
//! Infinite-key configurations truncate each stream to `w = n` bits;
//! the search never demands a bit past index `n - 1` (each comparison
//! past the root consumes one routing bit and the last comparison
//! consumes none), so the truncated ensemble induces the exact
//! infinite-stream law. `width_stability_check` re-verifies that claim
//! empirically by widening to `n + 1`. Truncation makes equal bit rows
//! possible, so keys carry identity tags and infinite-mode equality
//! compares tags, never bits.
//!
//! Finite-key configurations are ordered injective tuples of `n`-bit
//! vectors; equality is bit-vector equality, and the unsuccessful probe
//! is an `(n+1)`-st distinct vector.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dst::{KeyModel, SearchKind};
use crate::pgf::Pgf;
use crate::rational::{falling, Rational};

/// One key (or probe): routing bits plus an identity tag. `bits[i]` is
/// the `(i+1)`-st routing bit and must be 0 or 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitKey {
    pub bits: Vec<u8>,
    pub tag: u64,
}

impl BitKey {
    pub fn new(bits: Vec<u8>, tag: u64) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitKey { bits, tag }
    }
}

/// A full search instance: keys in insertion order plus the probe.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    pub rows: Vec<BitKey>,
    pub probe: BitKey,
    pub model: KeyModel,
}

impl BitMatrix {
    /// Width consistency always holds; per-model distinctness (tags for
    /// infinite keys, bit vectors for finite keys) is asserted here so a
    /// malformed instance fails loudly instead of miscounting.
    pub fn new(rows: Vec<BitKey>, probe: BitKey, model: KeyModel) -> Self {
        let w = probe.bits.len();
        assert!(w >= 1, "width must be at least 1");
        assert!(rows.iter().all(|r| r.bits.len() == w), "ragged widths");
        match model {
            KeyModel::Infinite => {
                let mut tags: Vec<u64> = rows.iter().map(|r| r.tag).collect();
                tags.sort_unstable();
                tags.dedup();
                assert!(tags.len() == rows.len(), "duplicate key tags");
            }
            KeyModel::Finite => {
                let mut vs: Vec<&[u8]> = rows.iter().map(|r| r.bits.as_slice()).collect();
                vs.sort_unstable();
                vs.dedup();
                assert!(vs.len() == rows.len(), "duplicate finite keys");
            }
        }
        BitMatrix { rows, probe, model }
    }
}

/// The search wanted a routing bit past the end of the key vectors.
/// Never happens at width `n`; seeing it means the caller truncated the
/// keys shorter than the search can probe.
#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
#[error("search needed routing bit {needed} but keys have width {width}")]
pub struct WidthExhausted {
    pub needed: usize,
    pub width: usize,
}

/// Requested enumeration is outside the supported `1..=5` range; the
/// estimate says how many configurations it would have to visit.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("enumeration for n={n} spans {cases} configurations; supported n is 1..=5")]
pub struct Infeasible {
    pub n: u64,
    pub cases: BigInt,
}

/// Comparisons made when searching `m.probe` in the digital search tree
/// built by inserting `m.rows` in order.
///
/// Reference implementation, kept deliberately literal: the subtree the
/// probe descends into after comparing a node consists of the not yet
/// compared candidate keys that agree with the probe on the next
/// routing bit, and the earliest-inserted candidate is that subtree's
/// root. Successful search returns the comparison count at the first
/// match; unsuccessful search returns the count when the candidate set
/// empties. The packed counting loops are checked against this function
/// property-test style.
pub fn dst_search_cost(m: &BitMatrix) -> Result<u32, WidthExhausted> {
    let w = m.probe.bits.len();
    let mut cand: Vec<usize> = (0..m.rows.len()).collect();
    let mut k = 0u32;
    let mut p = 0usize;
    while let Some(&first) = cand.first() {
        k += 1;
        let node = &m.rows[first];
        let hit = match m.model {
            KeyModel::Infinite => node.tag == m.probe.tag,
            KeyModel::Finite => node.bits == m.probe.bits,
        };
        if hit {
            return Ok(k);
        }
        cand.remove(0);
        if cand.is_empty() {
            break;
        }
        p += 1;
        if p > w {
            return Err(WidthExhausted { needed: p, width: w });
        }
        let b = m.probe.bits[p - 1];
        cand.retain(|&i| m.rows[i].bits[p - 1] == b);
    }
    Ok(k)
}

/// Exact costs-by-count distribution from one exhaustive sweep.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EnumResult {
    pub n: u64,
    pub mode: SearchKind,
    pub keys: KeyModel,
    /// cost (or total path length) -> number of configurations.
    #[serde(with = "crate::serde_str::count_map")]
    pub counts: BTreeMap<u32, BigInt>,
    #[serde(with = "crate::serde_str::big_str")]
    pub total: BigInt,
    pub pgf: Pgf,
}

/// Number of equally likely configurations `enumerate` sweeps: key bits
/// are free in the infinite model (`w = n`), key tuples are injective
/// in the finite model, the unsuccessful probe adds one more row (or
/// one more distinct vector), and successful search adds a factor `n`
/// for the target choice.
pub fn case_count(n: u64, mode: SearchKind, keys: KeyModel) -> BigInt {
    match keys {
        KeyModel::Infinite => infinite_cases(n, mode, n as usize),
        KeyModel::Finite => {
            let space = BigInt::one() << n;
            match mode {
                SearchKind::Unsuccessful => falling(&space, n + 1),
                SearchKind::Successful => BigInt::from(n) * falling(&space, n),
                SearchKind::PathLength => falling(&space, n),
            }
        }
    }
}

fn infinite_cases(n: u64, mode: SearchKind, w: usize) -> BigInt {
    let key_bits = n * w as u64;
    match mode {
        SearchKind::Unsuccessful => BigInt::one() << (key_bits + w as u64),
        SearchKind::Successful => BigInt::from(n) << key_bits,
        SearchKind::PathLength => BigInt::one() << key_bits,
    }
}

/// Exact distribution of the search cost by visiting every
/// configuration once. `n` in `1..=5`.
pub fn enumerate(n: u64, mode: SearchKind, keys: KeyModel) -> Result<EnumResult, Infeasible> {
    enumerate_opt(n, mode, keys, false)
}

/// Exact distribution of the total path length (sum over keys of
/// insertion depth, in edges). `n` in `1..=5`.
pub fn enumerate_path_length(n: u64, keys: KeyModel) -> Result<EnumResult, Infeasible> {
    enumerate_opt(n, SearchKind::PathLength, keys, false)
}

/// `enumerate` with an optional complement shortcut: flipping every bit
/// of every key and the probe preserves the cost, and no configuration
/// is its own complement, so sweeping only first keys with leading bit
/// 0 and doubling the counts halves the work. Off by default so the
/// default sweep stays a plain count of the whole space.
pub fn enumerate_opt(
    n: u64,
    mode: SearchKind,
    keys: KeyModel,
    complement_shortcut: bool,
) -> Result<EnumResult, Infeasible> {
    check_range(n, mode, keys)?;
    let counts = match keys {
        KeyModel::Infinite => counts_infinite(n as usize, mode, n as usize, complement_shortcut),
        KeyModel::Finite => counts_finite(n as usize, mode, complement_shortcut),
    };
    let scale = if complement_shortcut { 2 } else { 1 };
    Ok(build_result(n, mode, keys, counts, scale))
}

/// True iff infinite-key enumeration at widths `n` and `n + 1` induces
/// the same PGF, validating the width-`n` truncation. `n` in `1..=4`
/// (the widened sweep for unsuccessful search is `2^((n+1)^2)` cases).
pub fn width_stability_check(n: u64, mode: SearchKind) -> Result<bool, Infeasible> {
    if !(1..=4).contains(&n) {
        return Err(Infeasible {
            n,
            cases: infinite_cases(n, mode, n as usize + 1),
        });
    }
    let narrow = counts_infinite(n as usize, mode, n as usize, false);
    let wide = counts_infinite(n as usize, mode, n as usize + 1, false);
    Ok(counts_to_pgf(&narrow) == counts_to_pgf(&wide))
}

fn check_range(n: u64, mode: SearchKind, keys: KeyModel) -> Result<(), Infeasible> {
    if (1..=5).contains(&n) {
        Ok(())
    } else {
        let cases = if n == 0 {
            BigInt::one()
        } else {
            case_count(n, mode, keys)
        };
        Err(Infeasible { n, cases })
    }
}

fn build_result(
    n: u64,
    mode: SearchKind,
    keys: KeyModel,
    counts: Vec<u64>,
    scale: u64,
) -> EnumResult {
    let expected = case_count(n, mode, keys);
    let total: u64 = counts.iter().map(|&c| c * scale).sum();
    assert!(
        BigInt::from(total) == expected,
        "swept {total} configurations, expected {expected}"
    );
    let mut map = BTreeMap::new();
    let mut coeffs = vec![Rational::zero(); counts.len()];
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            map.insert(k as u32, BigInt::from(c * scale));
            coeffs[k] = Rational::new(BigInt::from(c * scale), BigInt::from(total));
        }
    }
    EnumResult {
        n,
        mode,
        keys,
        counts: map,
        total: BigInt::from(total),
        pgf: Pgf::from_coeffs(coeffs),
    }
}

fn counts_to_pgf(counts: &[u64]) -> Pgf {
    let total: u64 = counts.iter().sum();
    let coeffs = counts
        .iter()
        .map(|&c| Rational::new(BigInt::from(c), BigInt::from(total)))
        .collect();
    Pgf::from_coeffs(coeffs)
}

fn max_outcome(n: usize, mode: SearchKind) -> usize {
    match mode {
        SearchKind::Unsuccessful | SearchKind::Successful => n,
        SearchKind::PathLength => n * (n - 1) / 2,
    }
}

/// Keys as width-`w` rows packed into a `u8` each, leading routing bit
/// in the most significant of the low `w` bits. `col1[p]` masks the
/// keys whose `p`-th routing bit is 1, key `i` at mask bit `i`.
///
/// Equality is by candidate index: a probe carrying index `t` matches
/// key `t` and nothing else. That is infinite-mode tag equality
/// directly; it also realizes finite-mode bit equality because finite
/// keys are pairwise distinct, so a probe's bits coincide with exactly
/// the key it was copied from (index `t`) or with no key (index `n`).
struct PackedMatrix {
    n: u32,
    w: u32,
    col1: [u8; 9],
}

impl PackedMatrix {
    fn new(rows: &[u8], w: usize) -> Self {
        debug_assert!((1..=8).contains(&w) && rows.len() <= 8);
        let mut col1 = [0u8; 9];
        for (p, slot) in col1.iter_mut().enumerate().take(w + 1).skip(1) {
            let mut m = 0u8;
            for (i, &r) in rows.iter().enumerate() {
                m |= ((r >> (w - p)) & 1) << i;
            }
            *slot = m;
        }
        PackedMatrix {
            n: rows.len() as u32,
            w: w as u32,
            col1,
        }
    }

    fn cost(&self, probe: u8, probe_idx: u32) -> Result<u32, WidthExhausted> {
        let mut cand: u8 = if self.n == 8 {
            u8::MAX
        } else {
            (1u8 << self.n) - 1
        };
        let mut k = 0u32;
        let mut p = 0u32;
        while cand != 0 {
            let first = cand.trailing_zeros();
            k += 1;
            if first == probe_idx {
                return Ok(k);
            }
            cand &= cand - 1;
            if cand == 0 {
                break;
            }
            p += 1;
            if p > self.w {
                return Err(WidthExhausted {
                    needed: p as usize,
                    width: self.w as usize,
                });
            }
            let ones = self.col1[p as usize];
            cand &= if (probe >> (self.w - p)) & 1 == 1 {
                ones
            } else {
                !ones
            };
        }
        Ok(k)
    }
}

const WIDTH_N: &str = "width n is sufficient for every search; exceeding it is a bug";

/// Count outcomes over all width-`w` infinite-key configurations,
/// chunked by the first key's value. With the complement shortcut only
/// first keys with leading bit 0 are swept (counts are doubled by the
/// caller).
fn counts_infinite(n: usize, mode: SearchKind, w: usize, complement_shortcut: bool) -> Vec<u64> {
    let size = max_outcome(n, mode) + 1;
    let row_space: u64 = 1 << w;
    let rest_space: u64 = 1u64 << ((n - 1) * w);
    let first_limit = if complement_shortcut {
        row_space / 2
    } else {
        row_space
    };
    (0..first_limit)
        .into_par_iter()
        .map(|r0| {
            let mut counts = vec![0u64; size];
            let mut rows = [0u8; 8];
            rows[0] = r0 as u8;
            for rest in 0..rest_space {
                for i in 1..n {
                    rows[i] = ((rest >> ((i - 1) * w)) & (row_space - 1)) as u8;
                }
                tally(&rows[..n], w, mode, None, &mut counts);
            }
            counts
        })
        .reduce(|| vec![0u64; size], add_counts)
}

/// Count outcomes over all injective finite-key tuples (`w = n`),
/// chunked by the first key's value.
fn counts_finite(n: usize, mode: SearchKind, complement_shortcut: bool) -> Vec<u64> {
    let size = max_outcome(n, mode) + 1;
    let space: u32 = 1 << n;
    let first_limit = if complement_shortcut {
        space / 2
    } else {
        space
    };
    (0..first_limit)
        .into_par_iter()
        .map(|r0| {
            let mut counts = vec![0u64; size];
            let mut rows = [0u8; 8];
            rows[0] = r0 as u8;
            extend_tuple(n, mode, &mut rows, 1, 1 << r0, &mut counts);
            counts
        })
        .reduce(|| vec![0u64; size], add_counts)
}

fn extend_tuple(
    n: usize,
    mode: SearchKind,
    rows: &mut [u8; 8],
    depth: usize,
    used: u32,
    counts: &mut [u64],
) {
    if depth == n {
        tally(&rows[..n], n, mode, Some(used), counts);
        return;
    }
    let space: u32 = 1 << n;
    for v in 0..space {
        if used & (1 << v) == 0 {
            rows[depth] = v as u8;
            extend_tuple(n, mode, rows, depth + 1, used | (1 << v), counts);
        }
    }
}

/// Run every search the mode calls for against one key matrix. For the
/// finite model `used` masks the key values already in the tuple, and
/// unsuccessful probes range over the complement; `None` means infinite
/// keys, where unsuccessful probes range over all `2^w` bit patterns.
fn tally(rows: &[u8], w: usize, mode: SearchKind, used: Option<u32>, counts: &mut [u64]) {
    let n = rows.len();
    let pm = PackedMatrix::new(rows, w);
    match mode {
        SearchKind::Unsuccessful => {
            let probe_space: u32 = 1 << w;
            for probe in 0..probe_space {
                if used.is_some_and(|u| u & (1 << probe) != 0) {
                    continue;
                }
                let k = pm.cost(probe as u8, n as u32).expect(WIDTH_N);
                counts[k as usize] += 1;
            }
        }
        SearchKind::Successful => {
            for (t, &row) in rows.iter().enumerate() {
                let k = pm.cost(row, t as u32).expect(WIDTH_N);
                counts[k as usize] += 1;
            }
        }
        SearchKind::PathLength => {
            let mut edges = 0u32;
            for (t, &row) in rows.iter().enumerate() {
                edges += pm.cost(row, t as u32).expect(WIDTH_N) - 1;
            }
            counts[edges as usize] += 1;
        }
    }
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dst;
    use crate::rational::rat;

    fn key(bits: &[u8], tag: u64) -> BitKey {
        BitKey::new(bits.to_vec(), tag)
    }

    #[test]
    fn single_key_unsuccessful_is_one_comparison() {
        for r in 0..2u8 {
            for b in 0..2u8 {
                let m = BitMatrix::new(vec![key(&[r], 0)], key(&[b], 1), KeyModel::Infinite);
                assert_eq!(dst_search_cost(&m), Ok(1));
            }
        }
    }

    #[test]
    fn probe_equal_to_root_is_one_comparison() {
        let rows = vec![key(&[1, 0, 1], 0), key(&[0, 1, 1], 1), key(&[1, 1, 0], 2)];
        let m = BitMatrix::new(rows, key(&[0, 0, 0], 0), KeyModel::Infinite);
        assert_eq!(dst_search_cost(&m), Ok(1));
    }

    // Two keys sharing their first bit form a chain under the root; an
    // unsuccessful probe reaches depth 2 exactly when its first bit
    // follows the chain.
    #[test]
    fn two_key_chain_costs() {
        for c in 0..2u8 {
            for d in 0..2u8 {
                for a in 0..2u8 {
                    for b in 0..2u8 {
                        let rows = vec![key(&[1, c], 0), key(&[1, d], 1)];
                        let m = BitMatrix::new(rows, key(&[a, b], 2), KeyModel::Infinite);
                        let want = if a == 1 { 2 } else { 1 };
                        assert_eq!(dst_search_cost(&m), Ok(want));
                    }
                }
            }
        }
    }

    #[test]
    fn width_exhaustion_is_reported() {
        // Three keys agreeing with the probe on the single routing bit:
        // after the second comparison a candidate remains, so the search
        // demands a second bit that is not there. (Two keys would not
        // fail: the last comparison consumes no routing bit.)
        let rows = vec![key(&[1], 0), key(&[1], 1), key(&[1], 2)];
        let m = BitMatrix::new(rows, key(&[1], 3), KeyModel::Infinite);
        let want = Err(WidthExhausted {
            needed: 2,
            width: 1,
        });
        assert_eq!(dst_search_cost(&m), want);
        assert_eq!(PackedMatrix::new(&[1, 1, 1], 1).cost(1, 3), want);
    }

    #[test]
    fn golden_tables_reproduced_up_to_n4() {
        for (mode, model, n) in dst::golden_pgf_index() {
            if n > 4 {
                continue;
            }
            let r = enumerate(n, mode, model).unwrap();
            assert_eq!(
                r.pgf,
                dst::golden_pgf(mode, model, n).unwrap(),
                "{} {} n={n}",
                mode.as_str(),
                model.as_str()
            );
            assert_eq!(r.total, case_count(n, mode, model));
        }
    }

    #[test]
    fn recursions_match_enumeration_up_to_n4() {
        for n in 1..=4 {
            let u = enumerate(n, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap();
            assert_eq!(u.pgf, dst::unsuccessful_pgf_infinite(n));
            let s = enumerate(n, SearchKind::Successful, KeyModel::Infinite).unwrap();
            assert_eq!(s.pgf, dst::successful_pgf_infinite(n));
            let l = enumerate_path_length(n, KeyModel::Infinite).unwrap();
            assert_eq!(l.pgf, dst::path_length_pgf(n));
        }
    }

    #[test]
    fn n5_infinite_unsuccessful_matches_golden_and_recursion() {
        let r = enumerate(5, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap();
        let golden = dst::golden_pgf(SearchKind::Unsuccessful, KeyModel::Infinite, 5).unwrap();
        assert_eq!(r.pgf, golden);
        assert_eq!(r.pgf, dst::unsuccessful_pgf_infinite(5));
        assert_eq!(r.total, BigInt::one() << 30);
    }

    #[test]
    fn n5_infinite_successful_and_path_length() {
        let s = enumerate(5, SearchKind::Successful, KeyModel::Infinite).unwrap();
        assert_eq!(
            s.pgf,
            dst::golden_pgf(SearchKind::Successful, KeyModel::Infinite, 5).unwrap()
        );
        assert_eq!(s.pgf, dst::successful_pgf_infinite(5));
        let l = enumerate_path_length(5, KeyModel::Infinite).unwrap();
        assert_eq!(l.pgf, dst::path_length_pgf(5));
    }

    #[test]
    fn n5_finite_successful_and_path_length() {
        let s = enumerate(5, SearchKind::Successful, KeyModel::Finite).unwrap();
        assert_eq!(
            s.pgf,
            dst::golden_pgf(SearchKind::Successful, KeyModel::Finite, 5).unwrap()
        );
        let l = enumerate_path_length(5, KeyModel::Finite).unwrap();
        assert_eq!(
            l.pgf,
            dst::golden_pgf(SearchKind::PathLength, KeyModel::Finite, 5).unwrap()
        );
    }

    // ~6.5e8 configurations; minutes of sweep, so opt-in.
    #[test]
    #[ignore]
    fn n5_finite_unsuccessful_matches_golden() {
        let r = enumerate(5, SearchKind::Unsuccessful, KeyModel::Finite).unwrap();
        assert_eq!(
            r.pgf,
            dst::golden_pgf(SearchKind::Unsuccessful, KeyModel::Finite, 5).unwrap()
        );
    }

    #[test]
    fn spot_probabilities_by_direct_counting() {
        let p = |r: &EnumResult, k: usize| r.pgf.coeff(k);

        let u2 = enumerate(2, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap();
        assert_eq!(p(&u2, 2), rat(1, 2));
        assert_eq!(u2.total, BigInt::from(64)); // 2^(3*2)

        let f2 = enumerate(2, SearchKind::Unsuccessful, KeyModel::Finite).unwrap();
        assert_eq!(p(&f2, 2), rat(1, 3));
        assert_eq!(f2.total, BigInt::from(24)); // 4!/(4-3)!

        let f3 = enumerate(3, SearchKind::Unsuccessful, KeyModel::Finite).unwrap();
        assert_eq!(p(&f3, 3), rat(1, 21));
        assert_eq!(p(&f3, 1), rat(2, 7));
        assert_eq!(f3.total, BigInt::from(1680)); // 8!/4!

        let u4 = enumerate(4, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap();
        assert_eq!(p(&u4, 4), rat(1, 64));
        assert_eq!(u4.total, BigInt::one() << 20);

        let f4 = enumerate(4, SearchKind::Unsuccessful, KeyModel::Finite).unwrap();
        assert_eq!(p(&f4, 4), rat(1, 273));
        assert_eq!(p(&f4, 1), rat(8, 65));
        assert_eq!(f4.total, falling(&BigInt::from(16), 5));
    }

    // Complementing every bit everywhere preserves the cost and pairs
    // each configuration with a distinct partner, so every raw count is
    // even and the halved sweep reproduces the full one.
    #[test]
    fn complement_symmetry() {
        for (mode, model, n) in dst::golden_pgf_index() {
            if n > 3 {
                continue;
            }
            let full = enumerate(n, mode, model).unwrap();
            assert!(full.counts.values().all(|c| !c.bit(0)));
            let halved = enumerate_opt(n, mode, model, true).unwrap();
            assert_eq!(full, halved);
        }
        let full = enumerate(4, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap();
        let halved = enumerate_opt(4, SearchKind::Unsuccessful, KeyModel::Infinite, true).unwrap();
        assert_eq!(full, halved);
    }

    #[test]
    fn width_stability_up_to_n4() {
        for n in 1..=4 {
            for mode in [
                SearchKind::Unsuccessful,
                SearchKind::Successful,
                SearchKind::PathLength,
            ] {
                assert!(width_stability_check(n, mode).unwrap(), "n={n}");
            }
        }
        assert!(width_stability_check(5, SearchKind::Unsuccessful).is_err());
    }

    #[test]
    fn out_of_range_is_rejected_with_case_estimate() {
        let err = enumerate(6, SearchKind::Unsuccessful, KeyModel::Infinite).unwrap_err();
        assert_eq!(err.cases, BigInt::one() << 42);
        assert!(enumerate(0, SearchKind::Successful, KeyModel::Finite).is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let r = enumerate(3, SearchKind::Unsuccessful, KeyModel::Finite).unwrap();
        let js = serde_json::to_value(&r).unwrap();
        assert_eq!(js["total"], "1680");
        assert_eq!(js["counts"]["3"], "80");
        let back: EnumResult = serde_json::from_value(js).unwrap();
        assert_eq!(back, r);
    }

    fn packed_cost_of(rows: &[u8], w: usize, probe: u8, probe_idx: u32) -> Result<u32, WidthExhausted> {
        PackedMatrix::new(rows, w).cost(probe, probe_idx)
    }

    fn generic_infinite(rows: &[u8], w: usize, probe: u8, probe_idx: u32) -> Result<u32, WidthExhausted> {
        let unpack = |v: u8, tag: u64| {
            let bits: Vec<u8> = (1..=w).map(|p| (v >> (w - p)) & 1).collect();
            BitKey::new(bits, tag)
        };
        let keys: Vec<BitKey> = rows
            .iter()
            .enumerate()
            .map(|(i, &v)| unpack(v, i as u64))
            .collect();
        let m = BitMatrix::new(keys, unpack(probe, probe_idx as u64), KeyModel::Infinite);
        dst_search_cost(&m)
    }

    proptest! {
        // The packed index-equality loop and the literal reference
        // search agree on every outcome, including width exhaustion.
        #[test]
        fn packed_matches_generic_infinite(
            w in 1usize..=7,
            rows in proptest::collection::vec(0u8..=127, 1..=6),
            probe in 0u8..=127,
            idx_extra in 0u32..=1,
        ) {
            let mask = ((1u16 << w) - 1) as u8;
            let rows: Vec<u8> = rows.iter().map(|r| r & mask).collect();
            let probe = probe & mask;
            // Either some key's index (successful-style) or a fresh one.
            let probe_idx = if idx_extra == 0 && rows.len() > 1 {
                (probe as u32) % rows.len() as u32
            } else {
                rows.len() as u32
            };
            prop_assert_eq!(
                packed_cost_of(&rows, w, probe, probe_idx),
                generic_infinite(&rows, w, probe, probe_idx)
            );
        }

        // Finite-mode bit equality reduces to index equality once keys
        // are distinct: a probe copied from key t matches exactly at t,
        // a probe outside the tuple matches nowhere.
        #[test]
        fn packed_matches_generic_finite(
            n in 2usize..=5,
            seed in 0u64..,
            choose in 0u32..=6,
        ) {
            let space = 1u32 << n;
            // Distinct rows and a spare value from a seed, no rejection.
            let mut vals: Vec<u8> = (0..space as u8).collect();
            let mut s = seed;
            for i in (1..vals.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                vals.swap(i, (s >> 33) as usize % (i + 1));
            }
            let rows = &vals[..n];
            let (probe, probe_idx) = if (choose as usize) < n {
                (rows[choose as usize], choose)
            } else {
                (vals[n], n as u32)
            };

            let unpack = |v: u8, tag: u64| {
                let bits: Vec<u8> = (1..=n).map(|p| (v >> (n - p)) & 1).collect();
                BitKey::new(bits, tag)
            };
            let keys: Vec<BitKey> = rows
                .iter()
                .enumerate()
                .map(|(i, &v)| unpack(v, i as u64))
                .collect();
            let m = BitMatrix::new(keys, unpack(probe, probe_idx as u64), KeyModel::Finite);
            prop_assert_eq!(
                packed_cost_of(rows, n, probe, probe_idx as u32),
                dst_search_cost(&m)
            );
        }
    }
}
