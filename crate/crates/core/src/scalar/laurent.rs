use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Laurent polynomial `Σ c_m ω^m` with exact rational coefficients.
///
/// Canonical form: exponents strictly increasing, no zero coefficients. Two
/// polynomials are equal iff their term lists are equal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Laurent {
    terms: Vec<(i64, BigRational)>,
}

impl Laurent {
    pub fn monomial(exponent: i64, coefficient: BigRational) -> Self {
        if coefficient.is_zero() {
            return Self::zero();
        }
        Self {
            terms: vec![(exponent, coefficient)],
        }
    }

    /// `ω^m` with unit coefficient.
    pub fn unit(exponent: i64) -> Self {
        Self::monomial(exponent, BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::constant(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    /// Builds from arbitrary `(exponent, coefficient)` pairs, combining
    /// duplicates and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut v: Vec<_> = terms.into_iter().collect();
        v.sort_by_key(|t| t.0);
        Self {
            terms: combine_sorted(v),
        }
    }

    pub fn terms(&self) -> &[(i64, BigRational)] {
        &self.terms
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// `(exponent, coefficient)` if the polynomial is a single term.
    pub fn as_monomial(&self) -> Option<(i64, &BigRational)> {
        match self.terms.as_slice() {
            [(e, c)] => Some((*e, c)),
            _ => None,
        }
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn inverse(&self) -> Result<Self> {
        match self.as_monomial() {
            Some((e, c)) => Ok(Self::monomial(-e, c.recip())),
            None if self.is_zero() => Err(Error::DivisionByZero),
            None => Err(Error::NotRepresentable(format!(
                "inverse of non-monomial {self}"
            ))),
        }
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inverse()?.pow(-n);
        }
        if let Some((e, c)) = self.as_monomial() {
            let coeff = num_traits::pow(c.clone(), n as usize);
            return Ok(Self::monomial(e * n, coeff));
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Multiplies every exponent by an integer, i.e. substitutes `ω → ω^k`.
    pub fn rescale(&self, k: i64) -> Self {
        if k == 0 {
            let sum = self
                .terms
                .iter()
                .fold(BigRational::zero(), |acc, (_, c)| acc + c);
            return Self::constant(sum);
        }
        Self::from_terms(self.terms.iter().map(|(e, c)| (e * k, c.clone())))
    }

    /// Value at a numeric `ω`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * omega.powi(*e as i32))
            .sum()
    }

    /// Largest absolute coefficient; zero iff the polynomial is zero.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    fn scale_shift(&self, e: i64, c: &BigRational) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e2, c2)| (e + e2, c * c2))
                .collect(),
        }
    }
}

fn combine_sorted(v: Vec<(i64, BigRational)>) -> Vec<(i64, BigRational)> {
    let mut out: Vec<(i64, BigRational)> = Vec::with_capacity(v.len());
    for (e, c) in v {
        match out.last_mut() {
            Some((le, lc)) if *le == e => *lc += c,
            _ => {
                if let Some((_, lc)) = out.last() {
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                out.push((e, c));
            }
        }
    }
    if matches!(out.last(), Some((_, c)) if c.is_zero()) {
        out.pop();
    }
    out
}

fn merge(a: &[(i64, BigRational)], b: &[(i64, BigRational)], negate_b: bool) -> Laurent {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let sb = |c: &BigRational| if negate_b { -c } else { c.clone() };
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, sb(&b[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let c = if negate_b {
                    &a[i].1 - &b[j].1
                } else {
                    &a[i].1 + &b[j].1
                };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(|(e, c)| (*e, sb(c))));
    Laurent { terms: out }
}

impl Zero for Laurent {
    fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Laurent {
    fn one() -> Self {
        Self::unit(0)
    }
}

impl<'a> Add<&'a Laurent> for &'a Laurent {
    type Output = Laurent;

    fn add(self, rhs: &'a Laurent) -> Laurent {
        merge(&self.terms, &rhs.terms, false)
    }
}

impl<'a> Sub<&'a Laurent> for &'a Laurent {
    type Output = Laurent;

    fn sub(self, rhs: &'a Laurent) -> Laurent {
        merge(&self.terms, &rhs.terms, true)
    }
}

impl<'a> Mul<&'a Laurent> for &'a Laurent {
    type Output = Laurent;

    fn mul(self, rhs: &'a Laurent) -> Laurent {
        if self.is_zero() || rhs.is_zero() {
            return Laurent::zero();
        }
        if let Some((e, c)) = self.as_monomial() {
            return rhs.scale_shift(e, c);
        }
        if let Some((e, c)) = rhs.as_monomial() {
            return self.scale_shift(e, c);
        }
        let mut v = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                v.push((ea + eb, ca * cb));
            }
        }
        v.sort_by_key(|t| t.0);
        Laurent {
            terms: combine_sorted(v),
        }
    }
}

impl Add for Laurent {
    type Output = Laurent;

    fn add(self, rhs: Laurent) -> Laurent {
        &self + &rhs
    }
}

impl Sub for Laurent {
    type Output = Laurent;

    fn sub(self, rhs: Laurent) -> Laurent {
        &self - &rhs
    }
}

impl Mul for Laurent {
    type Output = Laurent;

    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}

impl AddAssign for Laurent {
    fn add_assign(&mut self, rhs: Laurent) {
        *self = &*self + &rhs;
    }
}

impl Neg for Laurent {
    type Output = Laurent;

    fn neg(self) -> Laurent {
        Laurent {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({e}, {c})")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent{self}")
    }
}
