//! Dense univariate polynomials over `Rational`, used as probability
//! generating functions.
//!
//! Coefficients are stored degree-ascending with no trailing zeros (the
//! zero polynomial is an empty vector). A polynomial is a valid PGF when
//! all coefficients are nonnegative and sum to exactly 1; nothing here
//! enforces that on construction, since intermediate recursion states are
//! ordinary polynomials, but `is_distribution` checks it exactly.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{falling, parse_rational, Rational};

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Pgf {
    coeffs: Vec<Rational>,
}

impl Pgf {
    pub fn zero() -> Self {
        Pgf { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Pgf::monomial(Rational::one(), 0)
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        if c.is_zero() {
            return Pgf::zero();
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Pgf { coeffs }
    }

    /// Build from degree-ascending coefficients; trailing zeros are trimmed.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Pgf { coeffs }
    }

    pub fn from_terms(terms: &[(usize, Rational)]) -> Self {
        let deg = terms.iter().map(|(d, _)| *d).max().unwrap_or(0);
        let mut coeffs = vec![Rational::zero(); deg + 1];
        for (d, c) in terms {
            coeffs[*d] += c;
        }
        Pgf::from_coeffs(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the highest nonzero term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn add(&self, other: &Pgf) -> Pgf {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Pgf::from_coeffs(out)
    }

    pub fn sub(&self, other: &Pgf) -> Pgf {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Pgf::from_coeffs(out)
    }

    pub fn mul(&self, other: &Pgf) -> Pgf {
        if self.is_zero() || other.is_zero() {
            return Pgf::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Pgf::from_coeffs(out)
    }

    pub fn scale(&self, c: &Rational) -> Pgf {
        if c.is_zero() {
            return Pgf::zero();
        }
        Pgf {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Pgf {
        if self.is_zero() {
            return Pgf::zero();
        }
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Pgf { coeffs }
    }

    pub fn derivative(&self) -> Pgf {
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
            .collect();
        Pgf::from_coeffs(out)
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Sum of coefficients, i.e. the value at `z = 1`.
    pub fn eval_one(&self) -> Rational {
        self.coeffs.iter().sum()
    }

    /// Fused `r`-th derivative at `z = 1`: `sum_k k(k-1)...(k-r+1) c_k`,
    /// without materializing intermediate derivative polynomials. For a
    /// PGF this is the `r`-th factorial moment.
    pub fn derivative_at_one(&self, r: u64) -> Rational {
        let mut acc = Rational::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if (k as u64) < r {
                continue;
            }
            acc += c * Rational::from_integer(falling(&BigInt::from(k), r));
        }
        acc
    }

    pub fn mean(&self) -> Rational {
        self.derivative_at_one(1)
    }

    /// Variance of the distribution this PGF encodes:
    /// `f''(1) - f'(1)^2 + f'(1)`.
    pub fn variance(&self) -> Rational {
        let g = self.derivative_at_one(1);
        let h = self.derivative_at_one(2);
        h - &g * &g + g
    }

    /// Exact check: nonnegative coefficients summing to 1.
    pub fn is_distribution(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative()) && self.eval_one().is_one()
    }

    /// Degree-ascending canonical coefficient strings, starting at degree 0.
    pub fn to_coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_coeff_strings<S: AsRef<str>>(strs: &[S]) -> Result<Pgf, String> {
        let coeffs = strs
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Pgf::from_coeffs(coeffs))
    }
}

impl fmt::Display for Pgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} z")?,
                _ => write!(f, "{c} z^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Pgf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_coeff_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pgf {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Pgf, D::Error> {
        let strs = Vec::<String>::deserialize(deserializer)?;
        Pgf::from_coeff_strings(&strs).map_err(D::Error::custom)
    }
}
