//! Search costs and total path length in random digital search trees.
//!
//! Keys are independent uniform bit streams; the tree routes on
//! successive bits, the root being the first key inserted. Two key
//! models matter: `Infinite` (each key an unbounded bit stream, all
//! keys almost surely distinct) and `Finite` (distinct `n`-bit vectors,
//! sampled without replacement).
//!
//! The infinite-key model has exact recursions, implemented here. The
//! finite-key distributions have no known recursion; they are served
//! from hard-coded small-`n` reference tables and reproduced
//! independently by the exhaustive enumeration oracle in
//! `crate::enumeration`, which also re-derives every infinite-key
//! table. The two search recursions are conditioning arguments on the
//! binomial split of non-root keys and are gated by those oracles.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bst::Moments;
use crate::pgf::Pgf;
use crate::rational::{binom_row, rat, Rational};

/// Which cost variable a distribution describes.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Unsuccessful,
    Successful,
    #[serde(rename = "pathlength")]
    PathLength,
}

impl SearchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchKind::Unsuccessful => "unsuccessful",
            SearchKind::Successful => "successful",
            SearchKind::PathLength => "pathlength",
        }
    }
}

/// How keys are drawn.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyModel {
    /// Unbounded independent bit streams.
    Infinite,
    /// Distinct n-bit vectors sampled without replacement.
    Finite,
}

impl KeyModel {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyModel::Infinite => "infinite",
            KeyModel::Finite => "finite",
        }
    }
}

fn path_pgf_cache() -> &'static Mutex<Vec<Pgf>> {
    static CACHE: OnceLock<Mutex<Vec<Pgf>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Pgf::one()]))
}

/// PGF of the total path length under infinite keys, `n >= 0`:
/// `f_n(z) = z^{n-1} 2^{1-n} sum_k C(n-1,k) f_k(z) f_{n-1-k}(z)`,
/// `f_0 = 1`. Memoized process-wide like its binary-search-tree twin.
pub fn path_length_pgf(n: u64) -> Pgf {
    let n = n as usize;
    let mut cache = path_pgf_cache().lock().unwrap();
    while cache.len() <= n {
        let m = cache.len();
        let row = binom_row(m as u64 - 1);
        let mut conv = Pgf::zero();
        for k in 0..m {
            let w = Rational::from_integer(row[k].clone());
            conv = conv.add(&cache[k].mul(&cache[m - 1 - k]).scale(&w));
        }
        let scale = Rational::new(BigInt::one(), BigInt::from(2u32).pow(m as u32 - 1));
        let f = conv.shift(m - 1).scale(&scale);
        cache.push(f);
    }
    cache[n].clone()
}

/// Exact dyadic number `num / 2^exp`, kept reduced: `num` odd, or
/// `exp == 0`. The path-length recursion only ever divides by powers of
/// two, and its values inherently carry denominators `2^((m-1)(m-2)/2)`
/// (tens of kilobits by `n = 256`). `BigRational` re-reduces on every
/// operation, which at that size turns each addition into a huge gcd;
/// tracking the exponent separately makes every step a plain integer
/// multiply, shift, or add.
#[derive(Clone)]
struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    fn from_int(v: i64) -> Self {
        Dyadic {
            num: BigInt::from(v),
            exp: 0,
        }
    }

    fn reduced(mut num: BigInt, mut exp: u64) -> Self {
        match num.trailing_zeros() {
            None => exp = 0,
            Some(tz) => {
                let s = tz.min(exp);
                if s > 0 {
                    num >>= s;
                    exp -= s;
                }
            }
        }
        Dyadic { num, exp }
    }

    fn add(&self, other: &Dyadic) -> Dyadic {
        let (hi, lo) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        Dyadic::reduced(&hi.num + (&lo.num << (hi.exp - lo.exp)), hi.exp)
    }

    fn mul(&self, other: &Dyadic) -> Dyadic {
        // Both factors reduced, so no trailing zeros can appear.
        Dyadic {
            num: &self.num * &other.num,
            exp: self.exp + other.exp,
        }
    }

    fn mul_int(&self, c: &BigInt) -> Dyadic {
        Dyadic::reduced(&self.num * c, self.exp)
    }

    /// Multiply by `2^k`, either sign of `k`.
    fn mul_pow2(&self, k: i64) -> Dyadic {
        if k >= 0 {
            Dyadic::reduced(&self.num << k, self.exp)
        } else {
            Dyadic {
                num: self.num.clone(),
                exp: self.exp + (-k) as u64,
            }
        }
    }

    fn to_rational(&self) -> Rational {
        // Reduced by construction, so skip the gcd `Ratio::new` runs.
        Rational::new_raw(self.num.clone(), BigInt::one() << self.exp)
    }
}

/// Exact mean/variance of the total path length under infinite keys:
/// `g_n = n - 1 + 2^{2-n} sum_k C(n-1,k) g_k`,
/// `h_n = -(n-1)n + 2(n-1) g_n + 2^{2-n} sum_k C(n-1,k) g_k g_{n-1-k}
///        + 2^{2-n} sum_k C(n-1,k) h_k`, from `g_0 = h_0 = 0`.
/// All denominators are powers of 2.
pub fn path_length_moments(n: u64) -> Moments {
    let n = n as usize;
    let mut gs: Vec<Dyadic> = vec![Dyadic::zero()];
    let mut hs: Vec<Dyadic> = vec![Dyadic::zero()];
    for m in 1..=n {
        let row = binom_row(m as u64 - 1);
        let mut gsum = Dyadic::zero();
        let mut gconv = Dyadic::zero();
        let mut hsum = Dyadic::zero();
        for k in 0..m {
            gsum = gsum.add(&gs[k].mul_int(&row[k]));
            gconv = gconv.add(&gs[k].mul(&gs[m - 1 - k]).mul_int(&row[k]));
            hsum = hsum.add(&hs[k].mul_int(&row[k]));
        }
        let mi = m as i64;
        let g = Dyadic::from_int(mi - 1).add(&gsum.mul_pow2(2 - mi));
        let h = Dyadic::from_int(-(mi - 1) * mi)
            .add(&g.mul_int(&BigInt::from(2 * (mi - 1))))
            .add(&gconv.add(&hsum).mul_pow2(2 - mi));
        gs.push(g);
        hs.push(h);
    }
    let mean = gs.pop().unwrap();
    let second = hs.pop().unwrap();
    let variance = second.add(&mean).add(&mean.mul(&mean).mul_int(&BigInt::from(-1)));
    Moments {
        n: n as u64,
        mean: mean.to_rational(),
        second_factorial: second.to_rational(),
        variance: variance.to_rational(),
    }
}

/// PGF of the unsuccessful search cost under infinite keys, `n >= 0`.
///
/// Conditioning on the root comparison and the binomial split of the
/// remaining `n-1` keys between the two subtrees (the probe follows one
/// side, each non-root key lands on the probe's side independently with
/// probability 1/2) gives
/// `U_n(z) = z 2^{1-n} sum_k C(n-1,k) U_k(z)`, `U_0 = 1`.
pub fn unsuccessful_pgf_infinite(n: u64) -> Pgf {
    let n = n as usize;
    let mut us: Vec<Pgf> = vec![Pgf::one()];
    for m in 1..=n {
        let row = binom_row(m as u64 - 1);
        let mut sum = Pgf::zero();
        for (k, u) in us.iter().enumerate() {
            sum = sum.add(&u.scale(&Rational::from_integer(row[k].clone())));
        }
        let scale = Rational::new(BigInt::from(2), BigInt::from(2u32).pow(m as u32));
        us.push(sum.scale(&scale).shift(1));
    }
    us.pop().unwrap()
}

/// PGF of the successful search cost under infinite keys, `n >= 1`.
///
/// The probe is one of the `n` keys uniformly. With probability `1/n`
/// it is the root (cost 1); otherwise it lies in the subtree on its own
/// first bit, and conditioning on the split of the `n-1` non-root keys
/// (the probe uniform among them, the two sides symmetric) gives
/// `S_n(z) = z/n + (2z/n) 2^{1-n} sum_k C(n-1,k) k S_k(z)`, `S_1 = z`.
pub fn successful_pgf_infinite(n: u64) -> Pgf {
    assert!(n >= 1, "successful search needs at least one key");
    let n = n as usize;
    let mut ss: Vec<Pgf> = vec![Pgf::zero(), Pgf::monomial(Rational::one(), 1)];
    for m in 2..=n {
        let row = binom_row(m as u64 - 1);
        let mut sum = Pgf::zero();
        for (k, s) in ss.iter().enumerate().skip(1) {
            let w = Rational::from_integer(&row[k] * BigInt::from(k));
            sum = sum.add(&s.scale(&w));
        }
        let scale = Rational::new(BigInt::from(4), BigInt::from(m) * BigInt::from(2u32).pow(m as u32));
        let root = Pgf::monomial(rat(1, m as i64), 1);
        ss.push(root.add(&sum.scale(&scale).shift(1)));
    }
    ss.pop().unwrap()
}

/// Frozen reference distributions for `n = 2..=5`, reproduced
/// independently by the enumeration oracle. Entries are
/// `(degree, coefficient)`. There is no table for path length under
/// infinite keys; that family is covered by its recursion.
pub fn golden_pgf(kind: SearchKind, model: KeyModel, n: u64) -> Option<Pgf> {
    let table: &[(u64, &str)] = match (kind, model, n) {
        (SearchKind::Unsuccessful, KeyModel::Infinite, 2) => &[(1, "1/2"), (2, "1/2")],
        (SearchKind::Unsuccessful, KeyModel::Infinite, 3) => {
            &[(1, "1/4"), (2, "5/8"), (3, "1/8")]
        }
        (SearchKind::Unsuccessful, KeyModel::Infinite, 4) => {
            &[(1, "1/8"), (2, "19/32"), (3, "17/64"), (4, "1/64")]
        }
        (SearchKind::Unsuccessful, KeyModel::Infinite, 5) => &[
            (1, "1/16"),
            (2, "65/128"),
            (3, "195/512"),
            (4, "49/1024"),
            (5, "1/1024"),
        ],
        (SearchKind::Unsuccessful, KeyModel::Finite, 2) => &[(1, "2/3"), (2, "1/3")],
        (SearchKind::Unsuccessful, KeyModel::Finite, 3) => {
            &[(1, "2/7"), (2, "2/3"), (3, "1/21")]
        }
        (SearchKind::Unsuccessful, KeyModel::Finite, 4) => {
            &[(1, "8/65"), (2, "302/455"), (3, "22/105"), (4, "1/273")]
        }
        (SearchKind::Unsuccessful, KeyModel::Finite, 5) => &[
            (1, "52/899"),
            (2, "7384/13485"),
            (3, "34502/94395"),
            (4, "26/899"),
            (5, "1/6293"),
        ],
        (SearchKind::Successful, KeyModel::Infinite, 2) => &[(1, "1/2"), (2, "1/2")],
        (SearchKind::Successful, KeyModel::Infinite, 3) => {
            &[(1, "1/3"), (2, "1/2"), (3, "1/6")]
        }
        (SearchKind::Successful, KeyModel::Infinite, 4) => {
            &[(1, "1/4"), (2, "7/16"), (3, "9/32"), (4, "1/32")]
        }
        (SearchKind::Successful, KeyModel::Infinite, 5) => &[
            (1, "1/5"),
            (2, "3/8"),
            (3, "11/32"),
            (4, "5/64"),
            (5, "1/320"),
        ],
        (SearchKind::Successful, KeyModel::Finite, 2) => &[(1, "1/2"), (2, "1/2")],
        (SearchKind::Successful, KeyModel::Finite, 3) => {
            &[(1, "1/3"), (2, "11/21"), (3, "1/7")]
        }
        (SearchKind::Successful, KeyModel::Finite, 4) => {
            &[(1, "1/4"), (2, "9/20"), (3, "39/140"), (4, "3/140")]
        }
        (SearchKind::Successful, KeyModel::Finite, 5) => &[
            (1, "1/5"),
            (2, "1707/4495"),
            (3, "23561/67425"),
            (4, "4657/67425"),
            (5, "39/22475"),
        ],
        (SearchKind::PathLength, KeyModel::Finite, 2) => &[(1, "1")],
        (SearchKind::PathLength, KeyModel::Finite, 3) => &[(2, "4/7"), (3, "3/7")],
        (SearchKind::PathLength, KeyModel::Finite, 4) => {
            &[(4, "4/5"), (5, "4/35"), (6, "3/35")]
        }
        (SearchKind::PathLength, KeyModel::Finite, 5) => &[
            (6, "8984/13485"),
            (7, "3136/13485"),
            (8, "364/4495"),
            (9, "52/4495"),
            (10, "39/4495"),
        ],
        _ => return None,
    };
    let terms: Vec<(usize, Rational)> = table
        .iter()
        .map(|(d, s)| (*d as usize, s.parse().unwrap()))
        .collect();
    Some(Pgf::from_terms(&terms))
}

/// All `(kind, model, n)` triples that `golden_pgf` serves.
pub fn golden_pgf_index() -> Vec<(SearchKind, KeyModel, u64)> {
    let mut out = Vec::new();
    for kind in [
        SearchKind::Unsuccessful,
        SearchKind::Successful,
        SearchKind::PathLength,
    ] {
        for model in [KeyModel::Infinite, KeyModel::Finite] {
            for n in 2..=5 {
                if golden_pgf(kind, model, n).is_some() {
                    out.push((kind, model, n));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use num_integer::Integer;

    #[test]
    fn path_length_pgf_small_values() {
        assert_eq!(path_length_pgf(0), Pgf::one());
        assert_eq!(path_length_pgf(1), Pgf::one());
        assert_eq!(path_length_pgf(2), Pgf::monomial(int(1), 1));
        // n = 3 by hand: z^2 (2 + 2z)/4 = z^2/2 + z^3/2.
        assert_eq!(
            path_length_pgf(3),
            Pgf::from_terms(&[(2, rat(1, 2)), (3, rat(1, 2))])
        );
    }

    #[test]
    fn path_length_moments_match_pgf_route() {
        for n in 0..=12 {
            let f = path_length_pgf(n);
            let m = path_length_moments(n);
            assert_eq!(m.mean, f.mean(), "mean at {n}");
            assert_eq!(m.second_factorial, f.derivative_at_one(2), "h at {n}");
            assert_eq!(m.variance, f.variance(), "variance at {n}");
        }
        assert_eq!(path_length_moments(3).mean, rat(5, 2));
        assert_eq!(path_length_moments(4).mean, rat(35, 8));
    }

    #[test]
    fn search_recursions_reproduce_reference_tables() {
        // Mandatory gate for the two derived recursions.
        for n in 2..=5 {
            assert_eq!(
                unsuccessful_pgf_infinite(n),
                golden_pgf(SearchKind::Unsuccessful, KeyModel::Infinite, n).unwrap(),
                "unsuccessful n={n}"
            );
            assert_eq!(
                successful_pgf_infinite(n),
                golden_pgf(SearchKind::Successful, KeyModel::Infinite, n).unwrap(),
                "successful n={n}"
            );
        }
    }

    #[test]
    fn recursion_base_cases() {
        assert_eq!(unsuccessful_pgf_infinite(0), Pgf::one());
        assert_eq!(unsuccessful_pgf_infinite(1), Pgf::monomial(int(1), 1));
        assert_eq!(successful_pgf_infinite(1), Pgf::monomial(int(1), 1));
    }

    #[test]
    fn golden_tables_are_distributions() {
        let index = golden_pgf_index();
        assert_eq!(index.len(), 20);
        for (kind, model, n) in index {
            let f = golden_pgf(kind, model, n).unwrap();
            assert!(f.is_distribution(), "{kind:?} {model:?} n={n}");
        }
        assert!(golden_pgf(SearchKind::PathLength, KeyModel::Infinite, 3).is_none());
        assert!(golden_pgf(SearchKind::Unsuccessful, KeyModel::Finite, 6).is_none());
    }

    #[test]
    fn infinite_model_denominators() {
        fn is_pow2(x: &BigInt) -> bool {
            let tz = x.trailing_zeros().unwrap_or(0);
            (x >> tz).is_one()
        }
        for n in 1..=12u64 {
            for c in unsuccessful_pgf_infinite(n).coeffs() {
                assert!(is_pow2(c.denom()), "unsuccessful n={n}");
            }
            for c in path_length_pgf(n).coeffs() {
                assert!(is_pow2(c.denom()), "path length n={n}");
            }
            // Successful search mixes in the 1/n probe choice: the odd
            // part of every denominator divides n.
            for c in successful_pgf_infinite(n).coeffs() {
                let tz = c.denom().trailing_zeros().unwrap_or(0);
                let odd = c.denom() >> tz;
                assert!(
                    BigInt::from(n).is_multiple_of(&odd),
                    "successful n={n} denom {}",
                    c.denom()
                );
            }
        }
    }

    #[test]
    fn path_length_mean_is_scaled_successful_mean() {
        // L_n counts one comparison less than a successful search per
        // key, summed over all n keys.
        for n in 1..=8 {
            let lhs = path_length_moments(n).mean;
            let rhs = rat(n as i64, 1) * (successful_pgf_infinite(n).mean() - int(1));
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }

    #[test]
    fn key_model_gap_shrinks() {
        // |mean_infinite - mean_finite| over the reference range. The
        // successful family starts at n = 3: both n = 2 tables are the
        // same distribution, so its gap there is exactly zero.
        let gap = |kind: SearchKind, n: u64| {
            let inf = golden_pgf(kind, KeyModel::Infinite, n).unwrap().mean();
            let fin = golden_pgf(kind, KeyModel::Finite, n).unwrap().mean();
            let d = inf - fin;
            if d < int(0) {
                -d
            } else {
                d
            }
        };
        for n in 2..=4 {
            assert!(
                gap(SearchKind::Unsuccessful, n) > gap(SearchKind::Unsuccessful, n + 1),
                "unsuccessful gap at {n}"
            );
        }
        assert_eq!(gap(SearchKind::Successful, 2), int(0));
        for n in 3..=4 {
            assert!(
                gap(SearchKind::Successful, n) > gap(SearchKind::Successful, n + 1),
                "successful gap at {n}"
            );
        }
    }
}
