//! Truncated bivariate formal power series over `Rational`.
//!
//! A `BiSeries` stores the coefficients of `x^i y^j` for `i <= nx`,
//! `j <= ny`, where `(nx, ny)` are explicit truncation orders chosen by
//! the caller. Binary operations on series with different orders truncate
//! to the componentwise minimum, so no operation ever claims more
//! precision than both inputs carry. Coefficients up to the truncation
//! order are exact; a truncated product or inverse agrees with the exact
//! one on every retained coefficient.

use num_traits::Zero;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("cannot invert a series whose constant term is zero")]
    SingularSeries,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BiSeries {
    nx: usize,
    ny: usize,
    /// `coeffs[i][j]` is the coefficient of `x^i y^j`.
    coeffs: Vec<Vec<Rational>>,
}

impl BiSeries {
    pub fn zero(nx: usize, ny: usize) -> Self {
        BiSeries {
            nx,
            ny,
            coeffs: vec![vec![Rational::zero(); ny + 1]; nx + 1],
        }
    }

    pub fn constant(c: Rational, nx: usize, ny: usize) -> Self {
        let mut s = BiSeries::zero(nx, ny);
        s.coeffs[0][0] = c;
        s
    }

    /// Single term `c x^i y^j`. Panics if the term lies outside the orders.
    pub fn monomial(c: Rational, i: usize, j: usize, nx: usize, ny: usize) -> Self {
        assert!(i <= nx && j <= ny, "monomial ({i},{j}) outside orders ({nx},{ny})");
        let mut s = BiSeries::zero(nx, ny);
        s.coeffs[i][j] = c;
        s
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Coefficient of `x^i y^j`. Panics outside the truncation orders,
    /// where the value is simply unknown.
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        assert!(
            i <= self.nx && j <= self.ny,
            "coefficient ({i},{j}) outside orders ({},{})",
            self.nx,
            self.ny
        );
        &self.coeffs[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Rational) {
        assert!(i <= self.nx && j <= self.ny);
        self.coeffs[i][j] = c;
    }

    fn min_orders(&self, other: &BiSeries) -> (usize, usize) {
        (self.nx.min(other.nx), self.ny.min(other.ny))
    }

    pub fn add(&self, other: &BiSeries) -> BiSeries {
        let (nx, ny) = self.min_orders(other);
        let mut out = BiSeries::zero(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                out.coeffs[i][j] = &self.coeffs[i][j] + &other.coeffs[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &BiSeries) -> BiSeries {
        let (nx, ny) = self.min_orders(other);
        let mut out = BiSeries::zero(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                out.coeffs[i][j] = &self.coeffs[i][j] - &other.coeffs[i][j];
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> BiSeries {
        let mut out = self.clone();
        for row in &mut out.coeffs {
            for v in row {
                *v *= c;
            }
        }
        out
    }

    /// Truncated product: exact convolution on all retained coefficients.
    pub fn mul(&self, other: &BiSeries) -> BiSeries {
        let (nx, ny) = self.min_orders(other);
        let mut out = BiSeries::zero(nx, ny);
        for i in 0..=nx {
            for j in 0..=ny {
                if self.coeffs[i][j].is_zero() {
                    continue;
                }
                let a = &self.coeffs[i][j];
                for p in 0..=(nx - i) {
                    for q in 0..=(ny - j) {
                        let b = &other.coeffs[p][q];
                        if !b.is_zero() {
                            let t = a * b;
                            out.coeffs[i + p][j + q] += t;
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiplicative inverse as a truncated series, solving the
    /// convolution equation coefficient by coefficient in graded order.
    /// Fails when the constant term is zero.
    pub fn invert(&self) -> Result<BiSeries, SeriesError> {
        let c0 = &self.coeffs[0][0];
        if c0.is_zero() {
            return Err(SeriesError::SingularSeries);
        }
        let mut out = BiSeries::zero(self.nx, self.ny);
        out.coeffs[0][0] = c0.recip();
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                if i == 0 && j == 0 {
                    continue;
                }
                // sum over (p,q) <= (i,j), excluding (i,j) itself
                let mut acc = Rational::zero();
                for p in 0..=i {
                    for q in 0..=j {
                        if p == i && q == j {
                            continue;
                        }
                        let s = &self.coeffs[i - p][j - q];
                        if !s.is_zero() && !out.coeffs[p][q].is_zero() {
                            acc += s * &out.coeffs[p][q];
                        }
                    }
                }
                out.coeffs[i][j] = -acc / c0;
            }
        }
        Ok(out)
    }

    pub fn is_one(&self) -> bool {
        use num_traits::One;
        self.coeffs.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, c)| {
                if i == 0 && j == 0 {
                    c.is_one()
                } else {
                    c.is_zero()
                }
            })
        })
    }
}
