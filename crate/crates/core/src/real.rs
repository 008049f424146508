//! Certified high-precision real arithmetic.
//!
//! A `Real` is a dyadic fixed-point value `m * 2^-B` together with an
//! integer error bound `e`, meaning the represented number lies in
//! `[(m - e) 2^-B, (m + e) 2^-B]`. Every operation propagates the bound
//! rigorously (rounding included), so any digits printed through
//! `decimal` are correct, not just plausible. `B` is fixed per
//! `RealCtx`; mixing contexts is a bug and panics.
//!
//! The constants provided here all come from series with proven tail
//! bounds; each bound is stated at its implementation.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{bernoulli_numbers, Rational};

/// Working precision: number of fractional bits.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RealCtx {
    bits: u32,
}

#[derive(Clone, Debug)]
pub struct Real {
    m: BigInt,
    /// nonnegative error bound in units of `2^-bits`
    e: BigInt,
    bits: u32,
}

/// Round-to-nearest division, ties away from zero. `|a/b - result| <= 1/2`.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if &r.abs() * 2 >= b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Ceiling division for nonnegative operands.
fn div_ceil_nonneg(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(!a.is_negative() && b.is_positive());
    (a + (b - 1)) / b
}

/// Round-to-nearest right shift (floor((x + 2^(b-1)) / 2^b)).
fn shr_round(x: &BigInt, b: u32) -> BigInt {
    if b == 0 {
        return x.clone();
    }
    (x + (BigInt::one() << (b - 1))) >> b
}

impl RealCtx {
    /// Precision sized for `digits` correct decimal digits with headroom
    /// for the error accumulated across long summations.
    pub fn with_digits(digits: u32) -> Self {
        // 3.3220 bits per decimal digit, plus 64 guard bits.
        RealCtx {
            bits: digits * 3322 / 1000 + 64,
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    fn scale(self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn from_int(self, n: i64) -> Real {
        Real {
            m: BigInt::from(n) << self.bits,
            e: BigInt::zero(),
            bits: self.bits,
        }
    }

    pub fn from_rational(self, q: &Rational) -> Real {
        let m = div_round(&(q.numer() << self.bits), q.denom());
        Real {
            m,
            e: BigInt::one(),
            bits: self.bits,
        }
    }

    /// `atan(1/q)` for integer `q >= 2`, by the alternating series
    /// `sum_k (-1)^k / ((2k+1) q^(2k+1))`. The tail after truncation is
    /// bounded by the first omitted term (alternating, decreasing).
    fn atan_inv(self, q: u64) -> Real {
        let scale = self.scale();
        let q2 = BigInt::from(q) * q;
        let mut qpow = BigInt::from(q);
        let mut sum = BigInt::zero();
        let mut err = BigInt::zero();
        let mut k = 0u64;
        loop {
            let term = &scale / (&qpow * (2 * k + 1)); // floor, error <= 1 ulp
            if term.is_zero() {
                // first omitted true term < 1 ulp
                err += 1;
                break;
            }
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            err += 1;
            qpow *= &q2;
            k += 1;
        }
        Real {
            m: sum,
            e: err,
            bits: self.bits,
        }
    }

    /// `atanh(u)` for rational `0 <= u <= 1/2`, by
    /// `sum_k u^(2k+1) / (2k+1)`. After the first term that floors to
    /// zero, the true tail is under `1/(1 - u^2) <= 4/3 < 2` ulps.
    fn atanh_rat(self, num: &BigInt, den: &BigInt) -> Real {
        assert!(!num.is_negative() && num * 2 <= *den, "atanh domain");
        if num.is_zero() {
            return self.from_int(0);
        }
        let scale = self.scale();
        let num2 = num * num;
        let den2 = den * den;
        let mut npow = num.clone();
        let mut dpow = den.clone();
        let mut sum = BigInt::zero();
        let mut err = BigInt::zero();
        let mut k = 0u64;
        loop {
            let term = (&scale * &npow) / (&dpow * (2 * k + 1));
            if term.is_zero() {
                err += 2;
                break;
            }
            sum += term;
            err += 1;
            npow *= &num2;
            dpow *= &den2;
            k += 1;
        }
        Real {
            m: sum,
            e: err,
            bits: self.bits,
        }
    }

    /// Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)`.
    pub fn pi(self) -> Real {
        self.atan_inv(5).mul_int(16).sub(&self.atan_inv(239).mul_int(4))
    }

    /// `ln 2 = 2 atanh(1/3)`.
    pub fn ln2(self) -> Real {
        self.atanh_rat(&BigInt::one(), &BigInt::from(3)).mul_int(2)
    }

    /// Natural log of a positive rational: write `x = 2^g y` with
    /// `y in [1, 2)`, then `ln x = g ln 2 + 2 atanh((y-1)/(y+1))` with
    /// `(y-1)/(y+1) in [0, 1/3]`.
    pub fn ln_rational(self, x: &Rational) -> Real {
        assert!(x.is_positive(), "log of nonpositive value");
        let mut g: i64 = (x.numer().bits() as i64) - (x.denom().bits() as i64);
        // normalize y = x / 2^g into [1, 2)
        let shifted = |g: i64| -> Rational {
            if g >= 0 {
                Rational::new(x.numer().clone(), x.denom() << g as u32)
            } else {
                Rational::new(x.numer() << (-g) as u32, x.denom().clone())
            }
        };
        let mut y = shifted(g);
        while y < Rational::one() {
            g -= 1;
            y = shifted(g);
        }
        while y >= Rational::from_integer(BigInt::from(2)) {
            g += 1;
            y = shifted(g);
        }
        let u_num = y.numer() - y.denom();
        let u_den = y.numer() + y.denom();
        let at = self.atanh_rat(&u_num, &u_den).mul_int(2);
        self.ln2().mul_int(g).add(&at)
    }

    /// Euler's constant via Euler-Maclaurin at `N = 128`:
    /// `gamma = H_N - ln N - 1/(2N) + sum_{r<=m} B_2r / (2r N^2r) + R`,
    /// `|R| <= |B_{2m+2}| / ((2m+2) N^(2m+2))` (the remainder of this
    /// expansion is bounded by the first omitted term because 1/x is
    /// completely monotone). `m` grows until that bound is below 1 ulp.
    pub fn euler_gamma(self) -> Real {
        const N: u64 = 128;
        const LOG2_N: i64 = 7;
        let mut h = Rational::zero();
        for k in 1..=N {
            h += Rational::new(BigInt::one(), BigInt::from(k));
        }
        let mut acc = self
            .from_rational(&h)
            .sub(&self.ln2().mul_int(LOG2_N))
            .sub(&self.from_rational(&Rational::new(
                BigInt::one(),
                BigInt::from(2 * N),
            )));
        let one_ulp = Rational::new(BigInt::one(), self.scale());
        let mut m = 1usize;
        loop {
            let bern = bernoulli_numbers(2 * m + 2);
            let term = &bern[2 * m] / Rational::from_integer(
                BigInt::from(2 * m as u64) * BigInt::from(N).pow(2 * m as u32),
            );
            acc = acc.add(&self.from_rational(&term));
            let bound = bern[2 * m + 2].abs()
                / Rational::from_integer(
                    BigInt::from(2 * m as u64 + 2) * BigInt::from(N).pow(2 * m as u32 + 2),
                );
            if bound < one_ulp {
                acc.e += 1;
                break;
            }
            m += 1;
        }
        acc
    }

    /// `zeta(s)` for integer `s >= 2`, certified.
    ///
    /// Even `s` uses the closed form `zeta(2k) = |B_2k| (2 pi)^(2k) / (2 (2k)!)`.
    /// Odd `s` uses Euler-Maclaurin at `N = 64`:
    /// `zeta(s) = sum_{k<N} k^-s + N^(1-s)/(s-1) + N^-s/2
    ///            + sum_{r<=m} (B_2r/(2r)!) s(s+1)...(s+2r-2) N^(1-s-2r) + R`
    /// with `|R|` at most the first omitted term (x^-s is completely
    /// monotone, so the remainder is bounded by it and shares its sign).
    pub fn zeta(self, s: u32) -> Real {
        assert!(s >= 2, "zeta pole at 1");
        if s % 2 == 0 {
            let bern = bernoulli_numbers(s as usize);
            let two_pi = self.pi().mul_int(2);
            let mut p = self.from_int(1);
            for _ in 0..s {
                p = p.mul(&two_pi);
            }
            let coeff = bern[s as usize].abs()
                / Rational::from_integer(BigInt::from(2) * crate::rational::factorial(s as u64));
            return p.mul_rational(&coeff);
        }
        const N: u64 = 64;
        let mut partial = Rational::zero();
        for k in 1..N {
            partial += Rational::new(BigInt::one(), BigInt::from(k).pow(s));
        }
        let npow_s = BigInt::from(N).pow(s);
        partial += Rational::new(BigInt::from(N), (s - 1) * &npow_s); // N^(1-s)/(s-1)
        partial += Rational::new(BigInt::one(), 2 * &npow_s);
        let mut acc = self.from_rational(&partial);
        let one_ulp = Rational::new(BigInt::one(), self.scale());
        let rising = |r: usize| -> BigInt {
            // s (s+1) ... (s + 2r - 2)
            let mut p = BigInt::one();
            for i in 0..(2 * r - 1) {
                p *= BigInt::from(s as u64 + i as u64);
            }
            p
        };
        let mut r = 1usize;
        loop {
            let bern = bernoulli_numbers(2 * r + 2);
            let term = &bern[2 * r] * Rational::from_integer(rising(r))
                / Rational::from_integer(
                    crate::rational::factorial(2 * r as u64)
                        * BigInt::from(N).pow(s + 2 * r as u32 - 1),
                );
            acc = acc.add(&self.from_rational(&term));
            let bound = bern[2 * r + 2].abs() * Rational::from_integer(rising(r + 1))
                / Rational::from_integer(
                    crate::rational::factorial(2 * r as u64 + 2)
                        * BigInt::from(N).pow(s + 2 * r as u32 + 1),
                );
            if bound < one_ulp {
                acc.e += 1;
                break;
            }
            r += 1;
        }
        acc
    }

    /// Direct-summation oracle for `zeta(s)`: partial sum of `terms`
    /// reciprocal powers plus the integral tail bound
    /// `0 < tail < N^(1-s) / (s-1)`. Slow but independent; used to
    /// cross-check the production route in tests.
    pub fn zeta_direct(self, s: u32, terms: u64) -> Real {
        assert!(s >= 2 && terms >= 1);
        let scale = self.scale();
        let mut sum = BigInt::zero();
        for k in 1..=terms {
            sum += &scale / BigInt::from(k).pow(s); // floor, 1 ulp each
        }
        // tail in [0, bound]: center it
        let bound = &scale / (BigInt::from(terms).pow(s - 1) * (s - 1)) + 1u32;
        let half = &bound / 2u32;
        Real {
            m: sum + &half,
            e: half + BigInt::from(terms) + 2u32,
            bits: self.bits,
        }
    }
}

impl Real {
    /// Assemble from parts; callers must have certified `e` themselves.
    pub(crate) fn from_raw(m: BigInt, e: BigInt, bits: u32) -> Real {
        debug_assert!(!e.is_negative());
        Real { m, e, bits }
    }

    /// Enlarge the error bound by `extra` ulps.
    pub(crate) fn widen(&mut self, extra: u64) {
        self.e += extra;
    }

    pub(crate) fn widen_big(&mut self, extra: &BigInt) {
        debug_assert!(!extra.is_negative());
        self.e += extra;
    }

    /// Center of the certified interval as an exact rational.
    pub fn midpoint(&self) -> Rational {
        Rational::new(self.m.clone(), BigInt::one() << self.bits)
    }

    fn assert_same(&self, other: &Real) {
        assert_eq!(self.bits, other.bits, "mixed RealCtx precision");
    }

    pub fn add(&self, other: &Real) -> Real {
        self.assert_same(other);
        Real {
            m: &self.m + &other.m,
            e: &self.e + &other.e,
            bits: self.bits,
        }
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.assert_same(other);
        Real {
            m: &self.m - &other.m,
            e: &self.e + &other.e,
            bits: self.bits,
        }
    }

    pub fn neg(&self) -> Real {
        Real {
            m: -&self.m,
            e: self.e.clone(),
            bits: self.bits,
        }
    }

    /// `|x|`; `||x| - |m|| <= |x - m|`, so the same bound stays valid.
    pub fn abs(&self) -> Real {
        Real {
            m: self.m.abs(),
            e: self.e.clone(),
            bits: self.bits,
        }
    }

    pub fn mul(&self, other: &Real) -> Real {
        self.assert_same(other);
        let m = shr_round(&(&self.m * &other.m), self.bits);
        let cross = self.m.abs() * &other.e + other.m.abs() * &self.e + &self.e * &other.e;
        let e = div_ceil_nonneg(&cross, &(BigInt::one() << self.bits)) + 1u32;
        Real { m, e, bits: self.bits }
    }

    pub fn div(&self, other: &Real) -> Real {
        self.assert_same(other);
        assert!(
            other.m.abs() > other.e,
            "dividing by an interval that contains zero"
        );
        let m = div_round(&(&self.m << self.bits), &other.m);
        // |x1/x2 - m1/m2| <= (e1 |m2| + e2 |m1|) / (|m2| (|m2| - e2)),
        // converted to ulps by the 2^bits factor.
        let num = (&self.e * other.m.abs() + &other.e * self.m.abs()) << self.bits;
        let den = other.m.abs() * (other.m.abs() - &other.e);
        let e = div_ceil_nonneg(&num, &den) + 1u32;
        Real { m, e, bits: self.bits }
    }

    pub fn mul_int(&self, k: i64) -> Real {
        Real {
            m: &self.m * k,
            e: &self.e * k.unsigned_abs(),
            bits: self.bits,
        }
    }

    pub fn div_int(&self, k: u64) -> Real {
        let kb = BigInt::from(k);
        Real {
            m: div_round(&self.m, &kb),
            e: self.e.div_ceil(&kb) + 1u32,
            bits: self.bits,
        }
    }

    pub fn mul_rational(&self, q: &Rational) -> Real {
        let m = div_round(&(&self.m * q.numer()), q.denom());
        let e = div_ceil_nonneg(&(&self.e * q.numer().abs()), q.denom()) + 1u32;
        Real { m, e, bits: self.bits }
    }

    pub fn add_rational(&self, q: &Rational) -> Real {
        let ctx = RealCtx { bits: self.bits };
        self.add(&ctx.from_rational(q))
    }

    pub fn lower_bound(&self) -> Rational {
        Rational::new(&self.m - &self.e, BigInt::one() << self.bits)
    }

    pub fn upper_bound(&self) -> Rational {
        Rational::new(&self.m + &self.e, BigInt::one() << self.bits)
    }

    /// Certified bound on the absolute error.
    pub fn error_bound(&self) -> Rational {
        Rational::new(self.e.clone(), BigInt::one() << self.bits)
    }

    pub fn to_f64(&self) -> f64 {
        let r = Rational::new(self.m.clone(), BigInt::one() << self.bits);
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// The whole certified interval lies strictly below `other`'s.
    pub fn certainly_less_than(&self, other: &Real) -> bool {
        self.upper_bound() < other.lower_bound()
    }

    /// Does the certified interval contain this exact rational?
    pub fn contains(&self, q: &Rational) -> bool {
        &self.lower_bound() <= q && q <= &self.upper_bound()
    }

    pub fn cmp_certain(&self, other: &Real) -> Option<Ordering> {
        if self.certainly_less_than(other) {
            Some(Ordering::Less)
        } else if other.certainly_less_than(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Decimal string with `digits` fractional digits, only if every
    /// number in the certified interval rounds to the same string.
    pub fn decimal(&self, digits: u32) -> Result<String, String> {
        let pow10 = BigInt::from(10u32).pow(digits);
        let scale = BigInt::one() << self.bits;
        let lo = div_round(&((&self.m - &self.e) * &pow10), &scale);
        let hi = div_round(&((&self.m + &self.e) * &pow10), &scale);
        if lo != hi {
            return Err(format!(
                "requested {digits} digits exceed certified precision (error bound ~{:e})",
                self.error_bound().to_f64().unwrap_or(f64::NAN)
            ));
        }
        let neg = lo.is_negative();
        let v = lo.abs();
        let (ip, fp) = v.div_rem(&pow10);
        if digits == 0 {
            return Ok(format!("{}{}", if neg { "-" } else { "" }, ip));
        }
        let frac = fp.to_string();
        let pad = "0".repeat(digits as usize - frac.len());
        Ok(format!(
            "{}{}.{}{}",
            if neg { "-" } else { "" },
            ip,
            pad,
            frac
        ))
    }
}
