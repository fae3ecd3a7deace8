//! Scalar fields for operators and vectors.
//!
//! Two modes share one interface:
//! * numeric: `f64`, with `q` a concrete positive number `≠ 1`;
//! * exact: [`Laurent`] polynomials in a formal unit `ω = q^{1/D}`.
//!
//! All fractional powers of `q` that the operators need are produced by
//! [`Field::q_pow`]; exact mode rejects exponents whose `D`-multiple is not an
//! integer.

mod laurent;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

pub use laurent::Laurent;

/// Element of the scalar field matrices and vectors are built over.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Result<Self>;

    fn inv(&self) -> Result<Self>;

    fn powi(&self, n: i64) -> Result<Self>;

    /// Size used for residual reporting; zero iff the scalar is zero.
    fn magnitude(&self) -> f64;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Whether the value can weight a rate: positive for numbers, any nonzero
    /// formal value.
    fn is_valid_weight(&self) -> bool {
        !self.is_zero()
    }
}

impl Scalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(num as f64 / den as f64)
    }

    fn inv(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / self)
    }

    fn powi(&self, n: i64) -> Result<Self> {
        if n < 0 && *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(f64::powi(*self, n as i32))
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn is_valid_weight(&self) -> bool {
        *self > 0.0 && self.is_finite()
    }

    fn to_json(&self) -> Value {
        serde_json::json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::Parse(format!("expected a number, got {v}")))
    }
}

impl Scalar for Laurent {
    fn from_i64(n: i64) -> Self {
        Laurent::from_integer(n)
    }

    fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Laurent::ratio(num, den)
    }

    fn inv(&self) -> Result<Self> {
        self.inverse()
    }

    fn powi(&self, n: i64) -> Result<Self> {
        self.pow(n)
    }

    fn magnitude(&self) -> f64 {
        self.max_abs_coefficient()
    }

    /// `[[exponent, "num/den"], ...]`.
    fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .iter()
                .map(|(e, c)| serde_json::json!([e, c.to_string()]))
                .collect(),
        )
    }

    fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse(format!("expected [[exponent, \"p/q\"], ...], got {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let pair = t.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let e = pair[0].as_i64().ok_or_else(bad)?;
            let c = match &pair[1] {
                Value::String(s) => parse_big_rational(s)?,
                Value::Number(n) => BigRational::from_integer(BigInt::from(
                    n.as_i64().ok_or_else(bad)?,
                )),
                _ => return Err(bad()),
            };
            terms.push((e, c));
        }
        Ok(Laurent::from_terms(terms))
    }
}

fn parse_big_rational(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            s.trim().parse().map_err(|_| err())?,
        )),
    }
}

/// Rational exponent `r` standing for `q^r`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QExponent(Ratio<i64>);

impl QExponent {
    pub const ZERO: QExponent = QExponent(Ratio::new_raw(0, 1));
    pub const ONE: QExponent = QExponent(Ratio::new_raw(1, 1));

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(Ratio::new(num, den)))
    }

    pub fn int(n: i64) -> Self {
        Self(Ratio::from_integer(n))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// The exponent of `ω = q^{1/d}` representing `q^r`, if integral.
    pub fn in_units_of(&self, d: i64) -> Option<i64> {
        let scaled = self.0 * Ratio::from_integer(d);
        scaled.is_integer().then(|| scaled.to_integer())
    }
}

impl From<i64> for QExponent {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Add for QExponent {
    type Output = QExponent;

    fn add(self, rhs: QExponent) -> QExponent {
        QExponent(self.0 + rhs.0)
    }
}

impl Sub for QExponent {
    type Output = QExponent;

    fn sub(self, rhs: QExponent) -> QExponent {
        QExponent(self.0 - rhs.0)
    }
}

impl Neg for QExponent {
    type Output = QExponent;

    fn neg(self) -> QExponent {
        QExponent(-self.0)
    }
}

impl Mul<i64> for QExponent {
    type Output = QExponent;

    fn mul(self, rhs: i64) -> QExponent {
        QExponent(self.0 * rhs)
    }
}

impl fmt::Display for QExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for QExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^({})", self.0)
    }
}

impl FromStr for QExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("bad q-exponent '{s}'"));
        match s.split_once('/') {
            Some((n, d)) => QExponent::new(
                n.trim().parse().map_err(|_| err())?,
                d.trim().parse().map_err(|_| err())?,
            ),
            None => Ok(QExponent::int(s.trim().parse().map_err(|_| err())?)),
        }
    }
}

impl Serialize for QExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Numeric => "numeric",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "numeric" => Ok(Mode::Numeric),
            other => Err(Error::Unknown {
                kind: "mode",
                name: other.to_string(),
            }),
        }
    }
}

/// A scalar mode together with its value of `q`.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Scalar: Scalar;

    fn mode(&self) -> Mode;

    /// `q^r`.
    fn q_pow(&self, r: QExponent) -> Result<Self::Scalar>;

    fn q(&self) -> Self::Scalar {
        self.q_pow(QExponent::ONE)
            .expect("integer powers of q are always representable")
    }

    /// `x^r` for rational `r`.
    fn pow_ratio(&self, x: &Self::Scalar, r: Ratio<i64>) -> Result<Self::Scalar>;

    /// Numeric value, when one is known.
    fn evaluate(&self, x: &Self::Scalar) -> Option<f64>;

    /// The same field with `q` replaced by `q^{-1}`.
    fn inverted(&self) -> Self;
}

/// Floating-point field at a fixed `q > 0`, `q ≠ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericField {
    q: f64,
}

impl NumericField {
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
        }
        if q == 1.0 {
            return Err(Error::InvalidParameter(
                "q = 1 is excluded (symmetric case)".into(),
            ));
        }
        Ok(Self { q })
    }

    pub fn value(&self) -> f64 {
        self.q
    }
}

impl Field for NumericField {
    type Scalar = f64;

    fn mode(&self) -> Mode {
        Mode::Numeric
    }

    fn q_pow(&self, r: QExponent) -> Result<f64> {
        Ok(self.q.powf(r.to_f64()))
    }

    fn q(&self) -> f64 {
        self.q
    }

    fn pow_ratio(&self, x: &f64, r: Ratio<i64>) -> Result<f64> {
        if r.is_integer() {
            return Scalar::powi(x, r.to_integer());
        }
        if *x <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "fractional power of non-positive value {x}"
            )));
        }
        Ok(x.powf(*r.numer() as f64 / *r.denom() as f64))
    }

    fn evaluate(&self, x: &f64) -> Option<f64> {
        Some(*x)
    }

    fn inverted(&self) -> Self {
        Self { q: 1.0 / self.q }
    }
}

/// Exact field of Laurent polynomials in `ω = q^{1/D}`.
///
/// `q` itself stays formal; `q_value` is used only by [`Field::evaluate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactField {
    denom: i64,
    inverted: bool,
    q_value: Option<f64>,
}

impl ExactField {
    /// Resolution `D = 2L`, enough for every half-integer and `1/L` power.
    pub fn for_sites(sites: usize) -> Self {
        Self::with_denominator(2 * sites as i64)
    }

    pub fn with_denominator(denom: i64) -> Self {
        assert!(denom > 0, "resolution must be positive");
        Self {
            denom,
            inverted: false,
            q_value: None,
        }
    }

    pub fn with_q_value(mut self, q: f64) -> Self {
        self.q_value = Some(q);
        self
    }

    pub fn denominator(&self) -> i64 {
        self.denom
    }

    /// `ω^m` as a power of `q`, in this field's orientation.
    pub fn omega_pow(&self, m: i64) -> Laurent {
        Laurent::unit(if self.inverted { -m } else { m })
    }
}

impl Field for ExactField {
    type Scalar = Laurent;

    fn mode(&self) -> Mode {
        Mode::Exact
    }

    fn q_pow(&self, r: QExponent) -> Result<Laurent> {
        let m = r.in_units_of(self.denom).ok_or_else(|| {
            Error::NotRepresentable(format!("q^({r}) with resolution q^(1/{})", self.denom))
        })?;
        Ok(self.omega_pow(m))
    }

    fn pow_ratio(&self, x: &Laurent, r: Ratio<i64>) -> Result<Laurent> {
        if r.is_integer() {
            return x.pow(r.to_integer());
        }
        let unrepresentable = || Error::NotRepresentable(format!("({x})^({r})"));
        let (e, c) = x.as_monomial().ok_or_else(unrepresentable)?;
        if !c.is_one() {
            return Err(unrepresentable());
        }
        let scaled = Ratio::from_integer(e) * r;
        if !scaled.is_integer() {
            return Err(unrepresentable());
        }
        Ok(Laurent::unit(scaled.to_integer()))
    }

    /// `ω` always denotes a root of the original `q`; inversion flips the
    /// exponents at construction.
    fn evaluate(&self, x: &Laurent) -> Option<f64> {
        let q = self.q_value?;
        Some(x.eval(q.powf(1.0 / self.denom as f64)))
    }

    fn inverted(&self) -> Self {
        Self {
            inverted: !self.inverted,
            ..*self
        }
    }
}

/// `[n]_q` for integer `n`, as the finite sum `Σ_{j<|n|} q^{|n|−1−2j}`.
pub fn q_number<F: Field>(field: &F, n: i64) -> Result<F::Scalar> {
    let m = n.abs();
    let mut acc = F::Scalar::zero();
    for j in 0..m {
        acc += field.q_pow(QExponent::int(m - 1 - 2 * j))?;
    }
    Ok(if n < 0 { -acc } else { acc })
}

/// `[x]_q = (q^x − q^{−x})/(q − q^{−1})` for real `x`.
pub fn q_number_real(q: f64, x: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    let den = q - q.recip();
    if den == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok((q.powf(x) - q.powf(-x)) / den)
}

/// `[n]_q! = Π_{k=1..n} [k]_q`, with `[0]_q! = 1`.
pub fn q_factorial<F: Field>(field: &F, n: i64) -> Result<F::Scalar> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!(
            "q-factorial of negative integer {n}"
        )));
    }
    (1..=n).try_fold(F::Scalar::one(), |acc, k| Ok(acc * q_number(field, k)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_pow_exact_examples() {
        let f = ExactField::for_sites(3);
        assert_eq!(f.q_pow(QExponent::ZERO).unwrap(), Laurent::one());
        assert_eq!(f.q_pow(QExponent::new(1, 2).unwrap()).unwrap(), Laurent::unit(3));
        let f4 = ExactField::for_sites(4);
        let r = QExponent::int(1) - QExponent::new(2, 4).unwrap();
        assert_eq!(f4.q_pow(r).unwrap(), Laurent::unit(4));
        assert!(matches!(
            f.q_pow(QExponent::new(1, 4).unwrap()),
            Err(Error::NotRepresentable(_))
        ));
    }

    #[test]
    fn q_number_examples() {
        let f = NumericField::new(2.0).unwrap();
        assert_eq!(q_number(&f, 1).unwrap(), 1.0);
        assert!((q_number(&f, 3).unwrap() - 5.25).abs() < 1e-15);
        assert!((q_number_real(2.0, 3.0).unwrap() - 5.25).abs() < 1e-15);
        let e = ExactField::for_sites(1);
        assert_eq!(
            q_number(&e, 2).unwrap(),
            Laurent::unit(2) + Laurent::unit(-2)
        );
        assert_eq!(q_number_real(1.0, 2.0), Err(Error::DivisionByZero));
    }

    #[test]
    fn q_factorial_examples() {
        let f = NumericField::new(2.0).unwrap();
        assert_eq!(q_factorial(&f, 0).unwrap(), 1.0);
        assert!((q_factorial(&f, 3).unwrap() - 13.125).abs() < 1e-14);
        let e = ExactField::for_sites(1);
        assert_eq!(q_factorial(&e, 0).unwrap(), Laurent::one());
        assert_eq!(q_factorial(&e, 2).unwrap(), q_number(&e, 2).unwrap());
        assert!(q_factorial(&e, -1).is_err());
    }

    #[test]
    fn q_number_symmetries_exact() {
        let e = ExactField::for_sites(2);
        let ei = e.inverted();
        for n in -6..=6 {
            assert_eq!(q_number(&e, n).unwrap(), q_number(&ei, n).unwrap());
            assert_eq!(q_number(&e, -n).unwrap(), -q_number(&e, n).unwrap());
        }
    }

    #[test]
    fn exact_agrees_with_numeric() {
        let q = 1.37;
        let e = ExactField::for_sites(3).with_q_value(q);
        let f = NumericField::new(q).unwrap();
        for n in 0..7 {
            let a = e.evaluate(&q_factorial(&e, n).unwrap()).unwrap();
            let b = q_factorial(&f, n).unwrap();
            assert!((a - b).abs() <= 1e-13 * b.abs());
        }
        let r = QExponent::new(5, 6).unwrap();
        let a = e.evaluate(&e.q_pow(r).unwrap()).unwrap();
        assert!((a - q.powf(5.0 / 6.0)).abs() < 1e-13);
    }

    #[test]
    fn laurent_json_round_trip() {
        let p = Laurent::from_terms([
            (-3, BigRational::new(1.into(), 2.into())),
            (4, BigRational::from_integer(7.into())),
        ]);
        let v = p.to_json();
        assert_eq!(v, serde_json::json!([[-3, "1/2"], [4, "7"]]));
        assert_eq!(Laurent::from_json(&v).unwrap(), p);
    }

    #[test]
    fn pow_ratio_exact_requires_divisibility() {
        let e = ExactField::for_sites(3);
        let x = Laurent::unit(6);
        assert_eq!(e.pow_ratio(&x, Ratio::new(1, 2)).unwrap(), Laurent::unit(3));
        assert!(e.pow_ratio(&Laurent::unit(3), Ratio::new(1, 2)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn q_number_inversion_and_oddness(q in 0.2f64..5.0, x in -8.0f64..8.0) {
                prop_assume!((q - 1.0).abs() > 1e-3);
                let a = q_number_real(q, x).unwrap();
                let b = q_number_real(q.recip(), x).unwrap();
                let c = q_number_real(q, -x).unwrap();
                prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0) * 10.0);
                prop_assert!((a + c).abs() <= 1e-14 * a.abs().max(1.0));
            }

            #[test]
            fn q_factorial_positive(q in 0.2f64..5.0, n in 0i64..12) {
                prop_assume!((q - 1.0).abs() > 1e-3);
                let f = NumericField::new(q).unwrap();
                prop_assert!(q_factorial(&f, n).unwrap() > 0.0);
            }
        }
    }
}
