//! Search costs and total path length in random binary search trees.
//!
//! A tree is grown from a uniformly random permutation of `n` distinct
//! keys. Three cost variables are covered, each with an exact PGF
//! recursion and a matching scalar recursion for its first two factorial
//! moments:
//!
//! * unsuccessful search: comparisons to reach an absent probe,
//! * successful search: comparisons to find a uniformly chosen key,
//! * total path length: sum over keys of (depth), i.e. comparisons
//!   needed to insert all keys.
//!
//! The PGF route and the scalar route are deliberately independent and
//! cross-checked in tests; higher factorial moments of the path length
//! come from a Leibniz-rule dynamic program over the convolution
//! recursion.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::pgf::Pgf;
use crate::rational::{binom, falling, rat, Rational};

/// First two factorial moments and the variance of one cost variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moments {
    pub n: u64,
    pub mean: Rational,
    /// `E[X(X-1)]`, the second factorial moment.
    pub second_factorial: Rational,
    pub variance: Rational,
}

impl Moments {
    fn from_parts(n: u64, mean: Rational, second_factorial: Rational) -> Self {
        let variance = &second_factorial - &mean * &mean + &mean;
        Moments {
            n,
            mean,
            second_factorial,
            variance,
        }
    }
}

/// PGF of the unsuccessful search cost, `n >= 1`:
/// `f_n(z) = ((2z + n - 1) / (n + 1)) f_{n-1}(z)`, `f_1 = z`.
pub fn unsuccessful_pgf(n: u64) -> Pgf {
    assert!(n >= 1, "unsuccessful search needs at least one key");
    let mut f = Pgf::monomial(Rational::one(), 1);
    for m in 2..=n {
        let shifted = f.shift(1).scale(&rat(2, 1));
        let kept = f.scale(&Rational::from_integer(BigInt::from(m - 1)));
        f = shifted.add(&kept).scale(&rat(1, m as i64 + 1));
    }
    f
}

/// PGF of the successful search cost, `n >= 1`:
/// `n^2 f_n(z) = (n - 1)(2z + n - 1) f_{n-1}(z) + z`, `f_1 = z`.
pub fn successful_pgf(n: u64) -> Pgf {
    assert!(n >= 1, "successful search needs at least one key");
    let mut f = Pgf::monomial(Rational::one(), 1);
    for m in 2..=n {
        let a = m as i64 - 1;
        let shifted = f.shift(1).scale(&rat(2 * a, 1));
        let kept = f.scale(&rat(a * a, 1));
        let z = Pgf::monomial(Rational::one(), 1);
        f = shifted
            .add(&kept)
            .add(&z)
            .scale(&rat(1, (m * m) as i64));
    }
    f
}

fn path_pgf_cache() -> &'static Mutex<Vec<Pgf>> {
    static CACHE: OnceLock<Mutex<Vec<Pgf>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Pgf::one()]))
}

/// PGF of the total path length, `n >= 0`:
/// `f_n(z) = (z^{n-1} / n) sum_{k=0}^{n-1} f_k(z) f_{n-1-k}(z)`, `f_0 = 1`.
///
/// Results are memoized process-wide: the convolution needs every
/// predecessor, so repeated calls share one table.
pub fn path_length_pgf(n: u64) -> Pgf {
    let n = n as usize;
    let mut cache = path_pgf_cache().lock().unwrap();
    while cache.len() <= n {
        let m = cache.len();
        let mut conv = Pgf::zero();
        for k in 0..m {
            conv = conv.add(&cache[k].mul(&cache[m - 1 - k]));
        }
        let f = conv.shift(m - 1).scale(&rat(1, m as i64));
        cache.push(f);
    }
    cache[n].clone()
}

/// Unreduced integer fraction used by the scalar moment loops. Keeping
/// the denominator as a running least common multiple (reduced only
/// against each new small factor) avoids a full big-integer gcd per
/// step, which dominates runtime for n in the thousands.
struct LcmPair {
    /// numerator of the mean over `den`
    g: BigInt,
    /// numerator of the second factorial moment over `den^2`
    h: BigInt,
    den: BigInt,
}

impl LcmPair {
    fn rescale(&mut self, factor: u64) {
        if factor > 1 {
            let f = BigInt::from(factor);
            self.g *= &f;
            self.h *= &f * &f;
            self.den *= f;
        }
    }

    fn moments(&self, n: u64) -> Moments {
        let mean = Rational::new(self.g.clone(), self.den.clone());
        let h = Rational::new(self.h.clone(), &self.den * &self.den);
        Moments::from_parts(n, mean, h)
    }
}

fn small_gcd(den: &BigInt, q: u64) -> u64 {
    let r: BigInt = den % q;
    let r = u64::try_from(&r).unwrap();
    if r == 0 {
        q
    } else {
        r.gcd(&q)
    }
}

/// Exact mean/variance of the unsuccessful search cost:
/// `g_n = g_{n-1} + 2/(n+1)`, `h_n = h_{n-1} + 4 g_{n-1}/(n+1)`,
/// from `g_1 = 1`, `h_1 = 0`. Scalar arithmetic only, so large `n`
/// (10^4 and beyond) stays cheap.
pub fn unsuccessful_moments(n: u64) -> Moments {
    assert!(n >= 1);
    let mut acc = LcmPair {
        g: BigInt::one(),
        h: BigInt::zero(),
        den: BigInt::one(),
    };
    for m in 2..=n {
        let q = m + 1;
        acc.rescale(q / small_gcd(&acc.den, q));
        let dq = &acc.den / q; // exact by construction
        // h uses the previous mean, so update h first
        acc.h += 4u32 * &acc.g * &dq;
        acc.g += 2u32 * dq;
    }
    acc.moments(n)
}

/// Exact mean/variance of the successful search cost:
/// `g_n = ((2n-1) + (n^2-1) g_{n-1}) / n^2`,
/// `h_n = (4(n-1) g_{n-1} + (n^2-1) h_{n-1}) / n^2`, from `g_1 = 1`.
pub fn successful_moments(n: u64) -> Moments {
    assert!(n >= 1);
    // Here both moments share one denominator that picks up a factor
    // n^2 per step; periodic reduction keeps it near the true size.
    let mut g = BigInt::one();
    let mut h = BigInt::zero();
    let mut den = BigInt::one();
    for m in 2..=n {
        let m2 = BigInt::from(m * m);
        let m2m1 = &m2 - 1u32;
        let new_g = BigInt::from(2 * m - 1) * &den + &m2m1 * &g;
        let new_h = BigInt::from(4 * (m - 1)) * &g + &m2m1 * &h;
        g = new_g;
        h = new_h;
        den *= m2;
        if m % 256 == 0 {
            let r = g.gcd(&h).gcd(&den);
            if !r.is_one() {
                g /= &r;
                h /= &r;
                den /= &r;
            }
        }
    }
    let mean = Rational::new(g, den.clone());
    let second = Rational::new(h, den);
    Moments::from_parts(n, mean, second)
}

/// Mean total path length via the running-sum form of
/// `g_n = n - 1 + (2/n) sum_{k<n} g_k`, `g_0 = 0`. Linear in `n`.
pub fn path_length_mean(n: u64) -> Rational {
    path_length_mean_seq(n).pop().unwrap()
}

/// Means `g_0 ..= g_n` of the total path length.
pub fn path_length_mean_seq(n: u64) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut sum = Rational::zero();
    out.push(Rational::zero());
    for m in 1..=n {
        let g = rat(m as i64 - 1, 1) + rat(2, m as i64) * &sum;
        sum += &g;
        out.push(g);
    }
    out
}

/// Exact mean/variance of the total path length:
/// `h_n = -(n-1)n + 2(n-1) g_n + (2/n) sum_k g_k g_{n-1-k} + (2/n) sum_k h_k`,
/// from `h_0 = 0`. Quadratic in `n` because of the convolution.
pub fn path_length_moments(n: u64) -> Moments {
    let gs = path_length_mean_seq(n);
    let mut hs: Vec<Rational> = Vec::with_capacity(n as usize + 1);
    let mut hsum = Rational::zero();
    hs.push(Rational::zero());
    for m in 1..=n as usize {
        let mut gconv = Rational::zero();
        for k in 0..m {
            gconv += &gs[k] * &gs[m - 1 - k];
        }
        let mi = m as i64;
        let h = rat(-(mi - 1) * mi, 1)
            + rat(2 * (mi - 1), 1) * &gs[m]
            + rat(2, mi) * gconv
            + rat(2, mi) * &hsum;
        hsum += &h;
        hs.push(h);
    }
    Moments::from_parts(n, gs[n as usize].clone(), hs[n as usize].clone())
}

/// Factorial moments `E[L_n (L_n - 1) ... (L_n - r + 1)]` of the total
/// path length for `r = 0 ..= order`, all `n` up to `n_max`, by the
/// general Leibniz rule applied to the convolution recursion at `z = 1`.
/// `table[n][r]` is the `r`-th factorial moment. `order <= 8`.
pub fn path_length_factorial_moments_table(n_max: u64, order: u64) -> Vec<Vec<Rational>> {
    assert!(order <= 8, "factorial moments supported up to order 8");
    let r_max = order as usize;
    let n_max = n_max as usize;
    let mut d: Vec<Vec<Rational>> = Vec::with_capacity(n_max + 1);
    let mut base = vec![Rational::zero(); r_max + 1];
    base[0] = Rational::one();
    d.push(base);
    for n in 1..=n_max {
        // A_b = b-th derivative at 1 of sum_k f_k f_{n-1-k}
        let mut a = vec![Rational::zero(); r_max + 1];
        for b in 0..=r_max {
            for k in 0..n {
                for c in 0..=b {
                    let lhs = &d[k][c];
                    let rhs = &d[n - 1 - k][b - c];
                    if lhs.is_zero() || rhs.is_zero() {
                        continue;
                    }
                    a[b] += Rational::from_integer(binom(b as u64, c as u64)) * lhs * rhs;
                }
            }
        }
        // f_n = z^{n-1} A_n / n, so Leibniz over the product z^{n-1} * A
        let nm1 = BigInt::from(n as u64 - 1);
        let mut row = vec![Rational::zero(); r_max + 1];
        for r in 0..=r_max {
            let mut acc = Rational::zero();
            for s in 0..=r {
                // s derivatives on z^{n-1}, r-s on A
                let pow_fall = falling(&nm1, s as u64);
                if pow_fall.is_zero() {
                    continue;
                }
                acc += Rational::from_integer(binom(r as u64, s as u64) * pow_fall) * &a[r - s];
            }
            row[r] = acc / Rational::from_integer(BigInt::from(n as u64));
        }
        d.push(row);
    }
    d
}

/// Factorial moments of the total path length for a single `n`.
pub fn path_length_factorial_moments(n: u64, order: u64) -> Vec<Rational> {
    path_length_factorial_moments_table(n, order).pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn unsuccessful_pgf_small_values() {
        // n = 2 by hand: ((2z+1)/3) z = z/3 + 2z^2/3.
        assert_eq!(
            unsuccessful_pgf(2),
            Pgf::from_terms(&[(1, rat(1, 3)), (2, rat(2, 3))])
        );
        // n = 3 by hand: ((2z+2)/4) f_2 = z/6 + z^2/2 + z^3/3.
        assert_eq!(
            unsuccessful_pgf(3),
            Pgf::from_terms(&[(1, rat(1, 6)), (2, rat(1, 2)), (3, rat(1, 3))])
        );
        assert_eq!(unsuccessful_pgf(1), Pgf::monomial(int(1), 1));
    }

    #[test]
    fn successful_pgf_small_values() {
        // n = 2 by hand: ((2z+1) z + z)/4 = z/2 + z^2/2.
        assert_eq!(
            successful_pgf(2),
            Pgf::from_terms(&[(1, rat(1, 2)), (2, rat(1, 2))])
        );
        // n = 3 by hand: (2(2z+2) f_2 + z)/9 = z/3 + 4z^2/9 + 2z^3/9.
        assert_eq!(
            successful_pgf(3),
            Pgf::from_terms(&[(1, rat(1, 3)), (2, rat(4, 9)), (3, rat(2, 9))])
        );
    }

    #[test]
    fn path_length_pgf_small_values() {
        assert_eq!(path_length_pgf(0), Pgf::one());
        assert_eq!(path_length_pgf(1), Pgf::one());
        assert_eq!(path_length_pgf(2), Pgf::monomial(int(1), 1));
        // n = 3 by hand: (z^2/3)(2 f_2 + 1) evaluated out = z^2/3 + 2z^3/3.
        assert_eq!(
            path_length_pgf(3),
            Pgf::from_terms(&[(2, rat(1, 3)), (3, rat(2, 3))])
        );
        // n = 4 by hand: z^4/2 + z^5/6 + z^6/3.
        assert_eq!(
            path_length_pgf(4),
            Pgf::from_terms(&[(4, rat(1, 2)), (5, rat(1, 6)), (6, rat(1, 3))])
        );
    }

    #[test]
    fn pgfs_are_distributions() {
        for n in 1..=12 {
            assert!(unsuccessful_pgf(n).is_distribution(), "unsuccessful {n}");
            assert!(successful_pgf(n).is_distribution(), "successful {n}");
            assert!(path_length_pgf(n).is_distribution(), "path length {n}");
        }
    }

    #[test]
    fn scalar_moments_match_pgf_route() {
        for n in 1..=12 {
            let fu = unsuccessful_pgf(n);
            let mu = unsuccessful_moments(n);
            assert_eq!(mu.mean, fu.mean(), "unsuccessful mean {n}");
            assert_eq!(mu.second_factorial, fu.derivative_at_one(2));
            assert_eq!(mu.variance, fu.variance());

            let fs = successful_pgf(n);
            let ms = successful_moments(n);
            assert_eq!(ms.mean, fs.mean(), "successful mean {n}");
            assert_eq!(ms.second_factorial, fs.derivative_at_one(2));
            assert_eq!(ms.variance, fs.variance());

            let fl = path_length_pgf(n);
            let ml = path_length_moments(n);
            assert_eq!(ml.mean, fl.mean(), "path length mean {n}");
            assert_eq!(ml.second_factorial, fl.derivative_at_one(2));
            assert_eq!(ml.variance, fl.variance());
        }
    }

    #[test]
    fn known_small_moment_values() {
        let m = unsuccessful_moments(2);
        assert_eq!(m.mean, rat(5, 3));
        assert_eq!(m.variance, rat(2, 9));
        let m = successful_moments(3);
        assert_eq!(m.mean, rat(17, 9));
        let m = path_length_moments(4);
        assert_eq!(m.mean, rat(29, 6));
    }

    #[test]
    fn means_strictly_increase() {
        let mut prev_u = unsuccessful_moments(1).mean;
        let mut prev_s = successful_moments(1).mean;
        let mut prev_l = path_length_mean(1);
        for n in 2..=100 {
            let u = unsuccessful_moments(n).mean;
            let s = successful_moments(n).mean;
            let l = path_length_mean(n);
            assert!(u > prev_u, "unsuccessful mean at {n}");
            assert!(s > prev_s, "successful mean at {n}");
            assert!(l > prev_l, "path length mean at {n}");
            prev_u = u;
            prev_s = s;
            prev_l = l;
        }
    }

    #[test]
    fn unsuccessful_mean_telescopes_to_ten_thousand() {
        // Re-runs the fraction accumulator and checks the exact step
        // identity g_n - g_{n-1} = 2/(n+1) on unreduced integers, which
        // guards the lcm bookkeeping rather than the formula.
        let n_max = 10_000u64;
        let mut acc = LcmPair {
            g: BigInt::one(),
            h: BigInt::zero(),
            den: BigInt::one(),
        };
        for m in 2..=n_max {
            let prev_g = acc.g.clone();
            let prev_den = acc.den.clone();
            let q = m + 1;
            acc.rescale(q / small_gcd(&acc.den, q));
            let dq = &acc.den / q;
            acc.h += 4u32 * &acc.g * &dq;
            acc.g += 2u32 * dq;
            // (g/den - prev_g/prev_den) * (m+1) == 2
            let lhs = (&acc.g * &prev_den - &prev_g * &acc.den) * BigInt::from(q);
            let rhs = 2u32 * &acc.den * prev_den;
            assert_eq!(lhs, rhs, "telescoping failed at n = {m}");
        }
        // and the endpoint agrees with an independent plain-rational fold
        let direct: Rational = (2..=n_max)
            .map(|m| rat(2, m as i64 + 1))
            .fold(int(1), |a, b| a + b);
        assert_eq!(acc.moments(n_max).mean, direct);
    }

    #[test]
    fn factorial_moments_reproduce_scalar_moments() {
        let table = path_length_factorial_moments_table(30, 3);
        for n in 0..=30u64 {
            let m = path_length_moments(n);
            let row = &table[n as usize];
            assert!(row[0].is_one(), "zeroth moment at {n}");
            assert_eq!(row[1], m.mean, "first factorial moment at {n}");
            assert_eq!(row[2], m.second_factorial, "second at {n}");
        }
    }

    #[test]
    fn factorial_moments_match_pgf_derivatives() {
        for n in [5u64, 9, 13] {
            let f = path_length_pgf(n);
            let fm = path_length_factorial_moments(n, 5);
            for r in 0..=5u64 {
                assert_eq!(fm[r as usize], f.derivative_at_one(r), "n={n} r={r}");
            }
        }
    }
}
