//! Asymptotic constants and expansions for search-cost moments.
//!
//! Provides certified evaluations of the constants that appear in the
//! large-`n` behavior of the moment sequences (`alpha`, `beta`, the
//! binary Euler product `Q`, the correction function `phi`, and the
//! variance/covariance constants `C` and `D`), the finite asymptotic
//! expansions for all eight tracked moment families, and reports that
//! compare those expansions against the exact rational values.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{int, rat, Rational};
use crate::real::{Real, RealCtx};
use crate::{bst, cumulants, dst};

/// `alpha = sum_{j>=1} 1/(2^j - 1)`; tail after `J` terms is below
/// `2^(1-J)` since `2^j - 1 >= 2^(j-1)`.
pub fn alpha(ctx: RealCtx) -> Real {
    let bits = ctx.bits();
    let scale = BigInt::one() << bits;
    let mut sum = BigInt::zero();
    let terms = bits as u64 + 1; // tail <= 2^(1-J) = 1 ulp
    for j in 1..=terms {
        sum += &scale / ((BigInt::one() << j) - 1);
    }
    Real::from_raw(sum, BigInt::from(terms + 2), bits)
}

/// `beta = sum_{j>=1} 1/(2^j - 1)^2`; tail after `J` terms is below
/// `(4/3) 4^(1-J)`.
pub fn beta(ctx: RealCtx) -> Real {
    let bits = ctx.bits();
    let scale = BigInt::one() << bits;
    let mut sum = BigInt::zero();
    let terms = bits as u64 / 2 + 2;
    for j in 1..=terms {
        let d = (BigInt::one() << j) - 1;
        sum += &scale / (&d * &d);
    }
    Real::from_raw(sum, BigInt::from(terms + 2), bits)
}

/// Exact `l`-th partial product `Q_l = prod_{j=1}^{l} (1 - 2^-j)`.
pub fn partial_q(l: u32) -> Rational {
    let mut q = Rational::one();
    for j in 1..=l {
        q *= Rational::new((BigInt::one() << j) - 1, BigInt::one() << j);
    }
    q
}

/// `Q = prod_{j>=1} (1 - 2^-j)`, the binary Euler product.
///
/// The partial product is formed in fixed point by `q -= q >> j` (at
/// most 1 ulp upward error per step, and earlier error only shrinks);
/// the stopped tail satisfies `1 - 2^-L <= prod_{j>L} (1 - 2^-j) < 1`,
/// so after re-centering by `q >> (L+1)` the bound `L + 2` ulps holds.
pub fn q_constant(ctx: RealCtx) -> Real {
    let bits = ctx.bits();
    let mut q = BigInt::one() << bits;
    for j in 1..=bits as u64 {
        q -= &q >> j;
    }
    let half_tail = &q >> (bits as u64 + 1);
    Real::from_raw(q - half_tail, BigInt::from(bits + 2), bits)
}

/// `phi(x) = (x - ln x - 1)/(x - 1)^2` for `x > 0`, extended by
/// continuity with `phi(1) = 1/2`.
///
/// Near 1 the quotient form loses all precision, so for `|x - 1| <= 1/16`
/// the series `sum_{k>=0} (-1)^k (x-1)^k / (k+2)` is used instead; its
/// tail after `K` terms is below `|x-1|^K / ((K+2)(1 - |x-1|))`.
///
/// Bounds used by the triple-sum truncation in `constant_c` (proofs in
/// comments there): `phi <= 1` on `[1/2, 2]` and `phi(x) <= 4 ln(1/x)`
/// for `x <= 1/2`.
pub fn phi(ctx: RealCtx, x: &Rational) -> Real {
    assert!(x.is_positive(), "phi domain is x > 0");
    let t = x - Rational::one();
    if t.abs() <= rat(1, 16) {
        // series: 1/2 - t/3 + t^2/4 - ...
        let bits = ctx.bits();
        let mut sum = Rational::zero();
        let mut pow = Rational::one();
        let mut k = 0u64;
        let cutoff = Rational::new(BigInt::one(), BigInt::one() << (bits + 2));
        loop {
            let term = &pow / Rational::from_integer(BigInt::from(k + 2));
            sum += if k % 2 == 0 { term } else { -term };
            pow *= &t;
            k += 1;
            if pow.abs() < cutoff {
                break;
            }
        }
        // tail below |t|^k/((k+2)(1-|t|)) <= 2 * cutoff < 1 ulp
        let mut out = ctx.from_rational(&sum);
        out.widen(2);
        return out;
    }
    // (x - ln x - 1) / (x-1)^2 with certified ln
    let num = ctx.ln_rational(x).neg().add_rational(&t);
    num.mul_rational(&(&t * &t).recip())
}

/// Truncation limits and certified tail (in ulps) for the `constant_c`
/// triple sum at `bits` of precision.
///
/// Write the summand magnitude as
/// `T(j,k,l) = 2^(-j(j+1)/2 - k - l) phi(x) / (Q_j Q_k Q_l)` with
/// `x = 2^(-j-k) + 2^(-j-l) >= 2^(-j-min(k,l))`. Using `Q_i >= Q > 1/4`
/// (so the product factor is below 64) and
/// `phi <= max(1, 4 ln(1/x)) <= 1 + 3(j+k+l)`, geometric summation of
/// the three index tails gives
/// `sum_{j>=J, all k,l} T <= 64 (24J + 56) 2^(-J(J+1)/2)` for `J >= 2` and
/// `sum_{k>=K, all j<J, all l} T <= 64 (24K + 66) 2^(1-K)` (same in `l`).
fn c_truncation(bits: u32) -> (u32, u32, BigInt) {
    let budget = BigInt::from(4);
    let mut j = 2u32;
    let tail_j = |j: u32| -> BigInt {
        let t = BigInt::from(64u64 * (24 * j as u64 + 56)) << bits;
        (t >> (j as u64 * (j as u64 + 1) / 2)) + 1
    };
    while tail_j(j) > budget {
        j += 1;
    }
    let mut k = 2u32;
    let tail_k = |k: u32| -> BigInt {
        let t = BigInt::from(64u64 * (24 * k as u64 + 66)) << (bits + 1);
        (t >> k) + 1
    };
    while tail_k(k) > budget {
        k += 1;
    }
    let tail = tail_j(j) + tail_k(k) * 2u32;
    (j, k, tail)
}

/// The path-length variance constant
///
/// ```text
/// C = (Q / ln 2) * sum_{j,k,l >= 0} (-1)^j / (Q_j Q_k Q_l)
///       * 2^(-j(j+1)/2 - k - l) * phi(2^(-j-k) + 2^(-j-l))
/// ```
///
/// Summation order is fixed (j ascending, then k, then l >= k using the
/// k <-> l symmetry), so results are bit-for-bit reproducible. phi
/// values depend only on `(j+k, j+l)` and are memoized.
pub fn constant_c(ctx: RealCtx) -> Real {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<u32, Real>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&ctx.bits()) {
        return hit.clone();
    }
    let out = constant_c_uncached(ctx);
    cache.lock().unwrap().insert(ctx.bits(), out.clone());
    out
}

fn constant_c_uncached(ctx: RealCtx) -> Real {
    let (jmax, kmax, tail_ulps) = c_truncation(ctx.bits());
    // 1/Q_i held as certified reals; exact rationals would carry
    // denominators of ~k^2/2 bits
    let top = jmax.max(kmax);
    let mut inv_q = Vec::with_capacity(top as usize + 1);
    let mut q_run = ctx.from_int(1);
    inv_q.push(ctx.from_int(1));
    for i in 1..=top {
        q_run = q_run.mul_rational(&Rational::new(
            (BigInt::one() << i) - 1,
            BigInt::one() << i,
        ));
        inv_q.push(ctx.from_int(1).div(&q_run));
    }
    let mut phi_memo: HashMap<(u32, u32), Real> = HashMap::new();
    let mut acc = ctx.from_int(0);
    for j in 0..jmax {
        let j_weight = Rational::new(
            BigInt::one(),
            BigInt::one() << (j as u64 * (j as u64 + 1) / 2),
        );
        for k in 0..kmax {
            for l in k..kmax {
                let a = j + k;
                let b = j + l;
                let ph = phi_memo.entry((a, b)).or_insert_with(|| {
                    let x = Rational::new(BigInt::one(), BigInt::one() << a)
                        + Rational::new(BigInt::one(), BigInt::one() << b);
                    phi(ctx, &x)
                });
                let mult: i64 = if k == l { 1 } else { 2 };
                let sign = if j % 2 == 0 { mult } else { -mult };
                let coeff = &j_weight
                    * Rational::new(BigInt::from(sign), BigInt::one() << (k as u64 + l as u64));
                let term = ph
                    .mul(&inv_q[j as usize])
                    .mul(&inv_q[k as usize])
                    .mul(&inv_q[l as usize])
                    .mul_rational(&coeff);
                acc = acc.add(&term);
            }
        }
    }
    acc.widen_big(&tail_ulps);
    acc.mul(&q_constant(ctx)).div(&ctx.ln2())
}

/// The limiting covariance constant for two distinct successful
/// search costs: `D = C - 1/12 - pi^2/(6 ln^2 2) + alpha + beta`.
pub fn constant_d(ctx: RealCtx) -> Real {
    let ln2 = ctx.ln2();
    let pi = ctx.pi();
    let frac = pi.mul(&pi).div(&ln2.mul(&ln2).mul_int(6));
    constant_c(ctx)
        .add_rational(&rat(-1, 12))
        .sub(&frac)
        .add(&alpha(ctx))
        .add(&beta(ctx))
}

/// The eight tracked moment families.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "bst-unsucc-mean")]
    BstUnsuccessfulMean,
    #[serde(rename = "bst-unsucc-var")]
    BstUnsuccessfulVar,
    #[serde(rename = "bst-succ-mean")]
    BstSuccessfulMean,
    #[serde(rename = "bst-succ-var")]
    BstSuccessfulVar,
    #[serde(rename = "bst-L-mean")]
    BstPathLengthMean,
    #[serde(rename = "bst-L-var")]
    BstPathLengthVar,
    #[serde(rename = "dst-L-mean")]
    DstPathLengthMean,
    #[serde(rename = "dst-L-var")]
    DstPathLengthVar,
}

pub const ALL_FAMILIES: [Family; 8] = [
    Family::BstUnsuccessfulMean,
    Family::BstUnsuccessfulVar,
    Family::BstSuccessfulMean,
    Family::BstSuccessfulVar,
    Family::BstPathLengthMean,
    Family::BstPathLengthVar,
    Family::DstPathLengthMean,
    Family::DstPathLengthVar,
];

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::BstUnsuccessfulMean => "bst-unsucc-mean",
            Family::BstUnsuccessfulVar => "bst-unsucc-var",
            Family::BstSuccessfulMean => "bst-succ-mean",
            Family::BstSuccessfulVar => "bst-succ-var",
            Family::BstPathLengthMean => "bst-L-mean",
            Family::BstPathLengthVar => "bst-L-var",
            Family::DstPathLengthMean => "dst-L-mean",
            Family::DstPathLengthVar => "dst-L-var",
        }
    }

    /// Order of the first omitted expansion term, as the factor that
    /// turns the residual into the quantity expected to shrink (or, for
    /// the fluctuating families, stay in a band).
    fn residual_scale(self, n: u64) -> (Rational, &'static str) {
        match self {
            Family::BstUnsuccessfulMean
            | Family::BstUnsuccessfulVar
            | Family::BstSuccessfulMean
            | Family::BstSuccessfulVar => (int(n as i64), "n*residual"),
            Family::BstPathLengthMean | Family::BstPathLengthVar => (int(1), "residual"),
            Family::DstPathLengthMean | Family::DstPathLengthVar => {
                (rat(1, n as i64), "residual/n")
            }
        }
    }

    /// The periodic-fluctuation families get band checks, not decay
    /// checks: their expansions omit bounded oscillating terms.
    pub fn is_band_checked(self) -> bool {
        matches!(
            self,
            Family::DstPathLengthMean | Family::DstPathLengthVar
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_FAMILIES
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

/// Finite asymptotic expansion for `family` evaluated at `n`, omitting
/// the o(.) remainder and any periodic fluctuation terms.
pub fn prediction(ctx: RealCtx, family: Family, n: u64) -> Real {
    assert!(n >= 2, "expansions are for n >= 2");
    let nn = n as i64;
    let ln_n = ctx.ln_rational(&int(nn));
    let g = ctx.euler_gamma();
    match family {
        // 2 ln n + 2(gamma - 1) + 3/n
        Family::BstUnsuccessfulMean => ln_n
            .mul_int(2)
            .add(&g.mul_int(2))
            .add_rational(&(rat(3, nn) - int(2))),
        // 2 ln n + 2(gamma - pi^2/3 + 1) + 7/n
        Family::BstUnsuccessfulVar => {
            let pi = ctx.pi();
            ln_n.mul_int(2)
                .add(&g.mul_int(2))
                .sub(&pi.mul(&pi).mul_rational(&rat(2, 3)))
                .add_rational(&(rat(7, nn) + int(2)))
        }
        // 2 ln n + (2 gamma - 3) + (2 ln n + 2 gamma + 1)/n
        Family::BstSuccessfulMean => {
            let level = ln_n.mul_int(2).add(&g.mul_int(2));
            level
                .add_rational(&int(-3))
                .add(&level.add_rational(&int(1)).mul_rational(&rat(1, nn)))
        }
        // 2 ln n + 2(gamma - pi^2/3 + 2) - 4 ln^2 n / n
        //   + 2(5 - 4 gamma) ln n / n + (5 + 10 gamma - 4 gamma^2 - 2 pi^2/3)/n
        Family::BstSuccessfulVar => {
            let pi2 = ctx.pi().mul(&ctx.pi());
            let inv_n = rat(1, nn);
            ln_n.mul_int(2)
                .add(&g.mul_int(2))
                .sub(&pi2.mul_rational(&rat(2, 3)))
                .add_rational(&int(4))
                .sub(&ln_n.mul(&ln_n).mul_rational(&(int(4) * &inv_n)))
                .add(
                    &g.mul_int(-8)
                        .add_rational(&int(10))
                        .mul(&ln_n)
                        .mul_rational(&inv_n),
                )
                .add(
                    &g.mul_int(10)
                        .sub(&g.mul(&g).mul_int(4))
                        .sub(&pi2.mul_rational(&rat(2, 3)))
                        .add_rational(&int(5))
                        .mul_rational(&inv_n),
                )
        }
        // 2 n ln n + 2(gamma - 2) n + 2 ln n + (2 gamma + 1)
        Family::BstPathLengthMean => ln_n
            .mul_int(2 * nn + 2)
            .add(&g.mul_int(2 * nn + 2))
            .add_rational(&int(-4 * nn + 1)),
        // (7 - 2 pi^2/3) n^2 - 2 n ln n + (17 - 2 gamma - 4 pi^2/3) n
        //   - 2 ln n + (5 - 2 gamma - 2 pi^2/3)
        Family::BstPathLengthVar => {
            let pi2 = ctx.pi().mul(&ctx.pi());
            let n2 = nn * nn;
            ln_n.mul_int(-2 * nn - 2)
                .add(&g.mul_int(-2 * nn - 2))
                .sub(&pi2.mul_rational(&rat(2 * n2 + 4 * nn + 2, 3)))
                .add_rational(&int(7 * n2 + 17 * nn + 5))
        }
        // (n+1)(ln n + gamma)/ln 2 - (n + 1/2)/ln 2 + n/2 + 5/2 - alpha (n+1)
        Family::DstPathLengthMean => {
            let inner = ln_n
                .mul_int(nn + 1)
                .add(&g.mul_int(nn + 1))
                .add_rational(&rat(-(2 * nn + 1), 2));
            inner
                .div(&ctx.ln2())
                .add_rational(&rat(nn + 5, 2))
                .sub(&alpha(ctx).mul_int(nn + 1))
        }
        // n * C
        Family::DstPathLengthVar => constant_c(ctx).mul_int(nn),
    }
}

/// Exact value of the family's moment at `n`, delegated to the moment
/// recursions (never re-derived here).
pub fn exact_value(family: Family, n: u64) -> Rational {
    match family {
        Family::BstUnsuccessfulMean => bst::unsuccessful_moments(n).mean,
        Family::BstUnsuccessfulVar => bst::unsuccessful_moments(n).variance,
        Family::BstSuccessfulMean => bst::successful_moments(n).mean,
        Family::BstSuccessfulVar => bst::successful_moments(n).variance,
        Family::BstPathLengthMean => bst::path_length_mean(n),
        Family::BstPathLengthVar => bst::path_length_moments(n).variance,
        Family::DstPathLengthMean => dst::path_length_moments(n).mean,
        Family::DstPathLengthVar => dst::path_length_moments(n).variance,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    /// exact rational in canonical form
    pub exact: String,
    pub exact_value: f64,
    /// prediction, 15 decimal digits
    pub predicted: String,
    pub residual: f64,
    pub scaled_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub family: Family,
    /// what `scaled_residual` holds, e.g. "n*residual"
    pub scale: String,
    /// true when the expansion's omitted terms include unknown bounded
    /// oscillations, so only a band statement is meaningful
    pub band_check: bool,
    pub rows: Vec<ReportRow>,
    pub scaled_decreasing: bool,
    pub max_scaled_residual: f64,
}

/// Evaluate `family` across `grid`, comparing exact moment values with
/// the asymptotic prediction. Residual ordering is decided on exact
/// rationals (predictions carry certified error far below the residual
/// scale), so the decreasing flag is deterministic.
pub fn convergence_report(ctx: RealCtx, family: Family, grid: &[u64]) -> AsymptoticReport {
    let mut rows = Vec::with_capacity(grid.len());
    let mut scaled_exact: Vec<Rational> = Vec::with_capacity(grid.len());
    for &n in grid {
        let exact = exact_value(family, n);
        let pred = prediction(ctx, family, n);
        let resid = (&exact - pred.midpoint()).abs();
        let (scale, _) = family.residual_scale(n);
        let scaled = &resid * &scale;
        rows.push(ReportRow {
            n,
            exact: exact.to_string(),
            exact_value: exact.to_f64().unwrap_or(f64::NAN),
            predicted: pred
                .decimal(15)
                .unwrap_or_else(|_| format!("{:.15}", pred.to_f64())),
            residual: resid.to_f64().unwrap_or(f64::NAN),
            scaled_residual: scaled.to_f64().unwrap_or(f64::NAN),
        });
        scaled_exact.push(scaled);
    }
    let scaled_decreasing = scaled_exact.windows(2).all(|w| w[1] < w[0]);
    let max_scaled = scaled_exact
        .iter()
        .map(|r| r.to_f64().unwrap_or(f64::NAN))
        .fold(0.0f64, f64::max);
    let (_, scale_label) = family.residual_scale(grid.first().copied().unwrap_or(2));
    AsymptoticReport {
        family,
        scale: scale_label.to_string(),
        band_check: family.is_band_checked(),
        rows,
        scaled_decreasing,
        max_scaled_residual: max_scaled,
    }
}

/// Exact `kappa_s(L_n) / n^s` for total path length across a grid,
/// for comparing against the limiting constant from the cumulants
/// module. One factorial-moment sweep serves the whole grid.
pub fn kappa_ratios(s: u64, grid: &[u64]) -> Vec<Rational> {
    let n_max = grid.iter().copied().max().unwrap_or(2);
    let table = bst::path_length_factorial_moments_table(n_max, s);
    grid.iter()
        .map(|&n| {
            let raw = cumulants::factorial_to_raw(&table[n as usize]);
            let kappa = cumulants::moments_to_cumulants(&raw);
            &kappa[s as usize] / Rational::from_integer(BigInt::from(n).pow(s as u32))
        })
        .collect()
}
