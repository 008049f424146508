//! Exact rational scalars and small combinatorial helpers.
//!
//! `Rational` is the universal scalar for every exact quantity in this
//! crate. Values are always in lowest terms with a positive denominator,
//! and the canonical string form is `p/q` (or just `p` when `q` is 1);
//! both directions of that encoding are the stock `Display`/`FromStr`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// `p/q` as a canonical rational. Panics if `q` is zero.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse the canonical `p/q` (or `p`) form.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>()
        .map_err(|e| format!("invalid rational {s:?}: {e}"))
}

/// Binomial coefficient with `C(n, k) = 0` outside `0 <= k <= n`.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Full row `C(n, 0..=n)`; one small multiply and exact divide per
/// entry, much cheaper than `n` independent `binom` calls.
pub fn binom_row(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Trinomial `(a+b+c)! / (a! b! c!)`.
pub fn multinomial3(a: u64, b: u64, c: u64) -> BigInt {
    factorial(a + b + c) / (factorial(a) * factorial(b) * factorial(c))
}

/// Falling factorial `n (n-1) ... (n-r+1)` with `r = 0` giving 1.
pub fn falling(n: &BigInt, r: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..r {
        acc *= n - BigInt::from(i);
    }
    acc
}

/// Stirling numbers of the second kind, `table[j][r]` for `j, r <= max`.
/// They convert falling-factorial powers into ordinary powers:
/// `x^j = sum_r S2(j, r) x^(x-1)...(x-r+1)`.
pub fn stirling2_table(max: usize) -> Vec<Vec<BigInt>> {
    let mut t = vec![vec![BigInt::zero(); max + 1]; max + 1];
    t[0][0] = BigInt::one();
    for j in 1..=max {
        for r in 1..=j {
            let prev = t[j - 1][r].clone();
            t[j][r] = &t[j - 1][r - 1] + BigInt::from(r as u64) * prev;
        }
    }
    t
}

/// Bernoulli numbers `B_0 ..= B_max` (convention `B_1 = -1/2`), via the
/// defining recurrence `sum_{j<=m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(max: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(max + 1);
    for m in 0..=max {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from_integer(binom(m as u64 + 1, j as u64)) * bj;
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m as u64 + 1)));
    }
    b
}

/// True when the value is in canonical form: lowest terms, positive
/// denominator. Construction through `Rational::new` guarantees this;
/// the check exists for tests and debug assertions.
pub fn is_canonical(x: &Rational) -> bool {
    x.denom().is_positive() && num_integer::Integer::gcd(x.numer(), x.denom()).is_one()
}
