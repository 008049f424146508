//! Higher-order moment and cumulant machinery for total path length.
//!
//! Two halves live here. The first is generic plumbing between moment
//! families: factorial moments to raw moments (Stirling numbers), raw
//! to central (binomial transform), and raw moments to cumulants
//! (partial Bell polynomials). The second is the asymptotic side: the
//! rational constants `c_s` produced by the path-length moment
//! recursion at leading order `n^s`, their cumulant counterparts
//! `a_s`, and the certified real constant
//! `a_s + (-1)^(s+1) 2^s (s-1)! zeta(s)` that multiplies `n^s` in the
//! order-`s` cumulant of total path length in a random binary search
//! tree. The `c_s` recursion is driven by a two-parameter family of
//! binomial-like coefficients `T(i, n, m)` indexed by a tier `i`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::biseries::BiSeries;
use crate::rational::{binom, factorial, multinomial3, stirling2_table, Rational};
use crate::real::{Real, RealCtx};

/// Tiered binomial coefficients.
///
/// `T(i, n, m)` is the coefficient of `x^n y^m` in the bivariate series
///
/// ```text
/// 1/(i+1-x-y) * prod_{t=0}^{i-1} (i-x-t) / prod_{t=0}^{i-1} (i-x-y-t)
/// ```
///
/// Tier zero gives plain binomials: `T(0, n, m) = C(n+m, n)`. At the
/// origin `T(i, 0, 0) = 1/(i+1)` for every tier.
///
/// The expansions are cached per tier at fixed truncation orders; `get`
/// panics if asked beyond them.
pub struct TieredBinomials {
    nx: usize,
    ny: usize,
    series: HashMap<u32, BiSeries>,
}

impl TieredBinomials {
    pub fn new(nx: usize, ny: usize) -> Self {
        TieredBinomials {
            nx,
            ny,
            series: HashMap::new(),
        }
    }

    fn expand(&self, i: u32) -> BiSeries {
        let (nx, ny) = (self.nx, self.ny);
        let c = |v: i64| BiSeries::constant(Rational::from_integer(BigInt::from(v)), nx, ny);
        // truncating x (resp. y) below first order leaves the zero series
        let x = if nx >= 1 {
            BiSeries::monomial(Rational::one(), 1, 0, nx, ny)
        } else {
            c(0)
        };
        let y = if ny >= 1 {
            BiSeries::monomial(Rational::one(), 0, 1, nx, ny)
        } else {
            c(0)
        };
        let lead = c(i as i64 + 1).sub(&x).sub(&y).invert().expect("i+1 > 0");
        // the two falling products share the i! normalizer, which cancels
        let mut num = c(1);
        let mut den = c(1);
        for t in 0..i as i64 {
            num = num.mul(&c(i as i64 - t).sub(&x));
            den = den.mul(&c(i as i64 - t).sub(&x).sub(&y));
        }
        lead.mul(&num).mul(&den.invert().expect("constant term i! != 0"))
    }

    pub fn get(&mut self, i: u32, n: usize, m: usize) -> Rational {
        assert!(n <= self.nx && m <= self.ny, "beyond truncation orders");
        if !self.series.contains_key(&i) {
            let s = self.expand(i);
            self.series.insert(i, s);
        }
        self.series[&i].get(n, m).clone()
    }
}

/// One-off evaluation of `T(i, n, m)`.
pub fn tiered_binomial(i: u32, n: usize, m: usize) -> Rational {
    TieredBinomials::new(n, m).get(i, n, m)
}

/// Leading-order constants of the path-length moment recursion.
///
/// `c_0 = 1`, `c_1 = 0`, and for `s >= 2`
///
/// ```text
/// c_s = (s+1)/(s-1) * sum_{k1+k2+k3=s, k1<s, k2<s} multinomial(k1,k2,k3) c_k1 c_k2
///         * sum_{n+m+p=k3} sum_{j=0}^{m+k2} multinomial(n,m,p) C(m+k2, j)
///             * (-1)^j (-2)^(n+m) n! m! T(n+k1+j, n, m)
/// ```
///
/// Returns `c_0 ..= c_max_order`.
pub fn moment_constants(max_order: usize) -> Vec<Rational> {
    let mut c = vec![Rational::one(), Rational::zero()];
    c.truncate(max_order + 1);
    let mut tiers = TieredBinomials::new(max_order, max_order);
    for s in 2..=max_order {
        let mut total = Rational::zero();
        for k1 in 0..s {
            // k3 = 0 is allowed; only c_s itself is excluded from the right side
            for k2 in 0..=(s - k1).min(s - 1) {
                let k3 = s - k1 - k2;
                let outer = Rational::from_integer(multinomial3(k1 as u64, k2 as u64, k3 as u64))
                    * &c[k1]
                    * &c[k2];
                if outer.is_zero() {
                    continue;
                }
                let mut inner = Rational::zero();
                for n in 0..=k3 {
                    for m in 0..=k3 - n {
                        let p = k3 - n - m;
                        let base = Rational::from_integer(
                            multinomial3(n as u64, m as u64, p as u64)
                                * factorial(n as u64)
                                * factorial(m as u64)
                                * BigInt::from(-2).pow((n + m) as u32),
                        );
                        for j in 0..=m + k2 {
                            let sign = if j % 2 == 0 { 1 } else { -1 };
                            inner += &base
                                * Rational::from_integer(sign * binom((m + k2) as u64, j as u64))
                                * tiers.get((n + k1 + j) as u32, n, m);
                        }
                    }
                }
                total += outer * inner;
            }
        }
        let s_int = s as i64;
        c.push(total * Rational::new(BigInt::from(s_int + 1), BigInt::from(s_int - 1)));
    }
    c
}

/// Partial Bell polynomials `B[s][j]` evaluated at `x_1 = x[0], ...`,
/// for `0 <= j <= s <= s_max`, via
/// `B_{s,j} = sum_k C(s-1, k-1) x_k B_{s-k, j-1}`.
pub fn bell_partial_table(x: &[Rational], s_max: usize) -> Vec<Vec<Rational>> {
    assert!(x.len() >= s_max, "need x_1..x_{s_max}");
    let mut b = vec![vec![Rational::zero(); s_max + 1]; s_max + 1];
    b[0][0] = Rational::one();
    for s in 1..=s_max {
        for j in 1..=s {
            let mut acc = Rational::zero();
            for k in 1..=s - j + 1 {
                acc += Rational::from_integer(binom(s as u64 - 1, k as u64 - 1))
                    * &x[k - 1]
                    * &b[s - k][j - 1];
            }
            b[s][j] = acc;
        }
    }
    b
}

/// Moment-sequence-to-cumulant transform:
/// `kappa_s = sum_j (-1)^(j-1) (j-1)! B_{s,j}(m_1, ..., m_{s-j+1})`.
/// Input `m[r]` is the order-`r` (raw) moment, `m[0] = 1`; the output is
/// indexed the same way with `kappa[0] = 0`.
pub fn moments_to_cumulants(m: &[Rational]) -> Vec<Rational> {
    let s_max = m.len() - 1;
    let bell = bell_partial_table(&m[1..], s_max);
    let mut kappa = vec![Rational::zero(); s_max + 1];
    for (s, k) in kappa.iter_mut().enumerate().skip(1) {
        let mut acc = Rational::zero();
        for j in 1..=s {
            let term = Rational::from_integer(factorial(j as u64 - 1)) * &bell[s][j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        *k = acc;
    }
    kappa
}

/// Cumulant-side constants `a_s`, the image of the `c_s` under the
/// moment-to-cumulant transform. Returns indices `0 ..= max_order`,
/// with `a_0 = a_1 = 0` by convention.
pub fn cumulant_constants(max_order: usize) -> Vec<Rational> {
    moments_to_cumulants(&moment_constants(max_order))
}

/// Certified leading constant of the order-`s` cumulant of total path
/// length: `kappa_s(L_n) / n^s -> a_s + (-1)^(s+1) 2^s (s-1)! zeta(s)`.
pub fn kappa_leading_constant(a_s: &Rational, s: u32, ctx: RealCtx) -> Real {
    assert!(s >= 2);
    let sign = if s % 2 == 1 {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let coeff = Rational::from_integer(sign * (BigInt::one() << s) * factorial(s as u64 - 1));
    ctx.zeta(s).mul_rational(&coeff).add_rational(a_s)
}

/// Factorial moments `f[r] = E[X (X-1) ... (X-r+1)]` to raw moments
/// `E[X^r]`, via `E[X^r] = sum_j S(r, j) f[j]` (Stirling set numbers).
pub fn factorial_to_raw(f: &[Rational]) -> Vec<Rational> {
    let r_max = f.len() - 1;
    let s2 = stirling2_table(r_max);
    (0..=r_max)
        .map(|r| {
            (0..=r)
                .map(|j| Rational::from_integer(s2[r][j].clone()) * &f[j])
                .sum()
        })
        .collect()
}

/// Raw moments to central moments about `m[1]`.
pub fn raw_to_central(m: &[Rational]) -> Vec<Rational> {
    let neg_mean = -m[1].clone();
    (0..m.len())
        .map(|r| {
            let mut pow = Rational::one();
            let mut acc = Rational::zero();
            // sum_j C(r,j) m[r-j] (-mean)^j
            for j in 0..=r {
                acc += Rational::from_integer(binom(r as u64, j as u64)) * &m[r - j] * &pow;
                pow *= &neg_mean;
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bst;
    use crate::pgf::Pgf;
    use crate::rational::{int, rat};

    fn fm_of(p: &Pgf, r_max: u64) -> Vec<Rational> {
        (0..=r_max).map(|r| p.derivative_at_one(r)).collect()
    }

    #[test]
    fn tier_zero_is_binomial() {
        for n in 0..=6usize {
            for m in 0..=6usize {
                assert_eq!(
                    tiered_binomial(0, n, m),
                    Rational::from_integer(binom((n + m) as u64, n as u64))
                );
            }
        }
    }

    #[test]
    fn origin_value_is_reciprocal_tier() {
        for i in 0..10u32 {
            assert_eq!(tiered_binomial(i, 0, 0), rat(1, i as i64 + 1));
        }
    }

    #[test]
    fn small_tiers_frozen() {
        assert_eq!(tiered_binomial(1, 1, 0), rat(1, 4));
        assert_eq!(tiered_binomial(1, 0, 1), rat(3, 4));
        assert_eq!(tiered_binomial(1, 0, 2), rat(7, 8));
        assert_eq!(tiered_binomial(1, 1, 1), int(1));
        assert_eq!(tiered_binomial(2, 0, 2), rat(85, 108));
        assert_eq!(tiered_binomial(2, 1, 1), rat(71, 108));
        assert_eq!(tiered_binomial(2, 2, 0), rat(1, 27));
    }

    #[test]
    fn moment_constants_frozen_table() {
        let c = moment_constants(8);
        assert_eq!(c[0], int(1));
        assert_eq!(c[1], int(0));
        assert_eq!(c[2], int(7));
        assert_eq!(c[3], int(-19));
        assert_eq!(c[4], rat(2260, 9));
        assert_eq!(c[5], rat(-229_621, 108));
        assert_eq!(c[6], rat(74_250_517, 2700));
        assert_eq!(c[7], rat(-30_532_750_703, 81_000));
        assert_eq!(c[8], rat(90_558_126_238_639, 14_883_750));
    }

    #[test]
    fn cumulant_constants_frozen_table() {
        let a = cumulant_constants(8);
        assert_eq!(a[2], int(7));
        assert_eq!(a[3], int(-19));
        assert_eq!(a[4], rat(937, 9));
        assert_eq!(a[5], rat(-85_981, 108));
        assert_eq!(a[6], rat(21_096_517, 2700));
        assert_eq!(a[7], rat(-7_527_245_453, 81_000));
        assert_eq!(a[8], rat(19_281_922_400_989, 14_883_750));
    }

    #[test]
    fn bell_values_match_closed_forms() {
        // B_{3,2} = 3 x1 x2 ; B_{4,2} = 4 x1 x3 + 3 x2^2 ; B_{4,3} = 6 x1^2 x2
        let x = [int(2), int(5), int(7), int(11)];
        let b = bell_partial_table(&x, 4);
        assert_eq!(b[3][2], int(3 * 2 * 5));
        assert_eq!(b[4][2], int(4 * 2 * 7 + 3 * 25));
        assert_eq!(b[4][3], int(6 * 4 * 5));
        assert_eq!(b[4][4], int(16));
    }

    #[test]
    fn variance_constant_digits() {
        // a_2 - 4 zeta(2) = 7 - 2 pi^2 / 3
        let ctx = RealCtx::with_digits(20);
        let k2 = kappa_leading_constant(&int(7), 2, ctx);
        assert_eq!(k2.decimal(12).unwrap(), "0.420263732607");
        // cross-check against an independent pi-based route
        let pi = ctx.pi();
        let alt = ctx
            .from_int(7)
            .sub(&pi.mul(&pi).mul_rational(&rat(2, 3)));
        assert!(k2.sub(&alt).abs().upper_bound() < rat(1, 1_000_000_000));
    }

    #[test]
    fn conversions_agree_with_direct_moment_computation() {
        // uniform on {1,2,3}: mean 2, var 2/3, central m3 0, central m4 2/3... wait
        let p = Pgf::from_terms(&[(1, rat(1, 3)), (2, rat(1, 3)), (3, rat(1, 3))]);
        let raw = factorial_to_raw(&fm_of(&p, 4));
        assert_eq!(raw[1], int(2));
        assert_eq!(raw[2], rat(14, 3)); // (1+4+9)/3
        assert_eq!(raw[3], int(12)); // (1+8+27)/3
        let central = raw_to_central(&raw);
        assert_eq!(central[0], int(1));
        assert_eq!(central[1], int(0));
        assert_eq!(central[2], rat(2, 3));
        assert_eq!(central[3], int(0)); // symmetric
        assert_eq!(central[4], rat(2, 3)); // (1 + 0 + 1)/3
        let kappa = moments_to_cumulants(&raw);
        assert_eq!(kappa[1], int(2));
        assert_eq!(kappa[2], rat(2, 3));
        assert_eq!(kappa[3], int(0));
        // kappa_4 = m4c - 3 m2c^2 = 2/3 - 3*(4/9) = -2/3
        assert_eq!(kappa[4], rat(-2, 3));
    }

    #[test]
    fn cumulants_additive_over_convolution() {
        let p = Pgf::from_terms(&[(0, rat(1, 4)), (1, rat(1, 2)), (3, rat(1, 4))]);
        let q = Pgf::from_terms(&[(1, rat(2, 5)), (2, rat(3, 5))]);
        let conv = p.mul(&q);
        let kp = moments_to_cumulants(&factorial_to_raw(&fm_of(&p, 5)));
        let kq = moments_to_cumulants(&factorial_to_raw(&fm_of(&q, 5)));
        let kc = moments_to_cumulants(&factorial_to_raw(&fm_of(&conv, 5)));
        for s in 1..=5 {
            assert_eq!(kc[s], &kp[s] + &kq[s], "order {s}");
        }
    }

    #[test]
    fn constant_distribution_has_no_higher_cumulants() {
        // X identically 3: kappa_1 = 3, all higher cumulants vanish
        let raw: Vec<Rational> = (0..=6).map(|r| int(3i64.pow(r))).collect();
        let kappa = moments_to_cumulants(&raw);
        assert_eq!(kappa[1], int(3));
        for s in 2..=6 {
            assert_eq!(kappa[s], int(0), "order {s}");
        }
    }

    #[test]
    fn path_length_chain_matches_scalar_recursion() {
        for n in [4u64, 7] {
            let fm = bst::path_length_factorial_moments(n, 3);
            let raw = factorial_to_raw(&fm);
            let central = raw_to_central(&raw);
            let m = bst::path_length_moments(n);
            assert_eq!(raw[1], m.mean);
            assert_eq!(central[2], m.variance);
            // third central moment equals third cumulant
            let kappa = moments_to_cumulants(&raw);
            assert_eq!(kappa[3], central[3]);
        }
    }
}
