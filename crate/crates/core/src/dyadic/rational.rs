use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// An exact number of the form `mantissa * 2^exponent`.
///
/// Values are kept canonical: the mantissa is odd, or the value is zero and
/// the exponent is zero. Equality and hashing therefore agree with numeric
/// equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicRational {
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Self {
        let mut mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        mantissa >>= tz;
        Self {
            mantissa,
            exponent: exponent + tz as i64,
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self::pow2(0)
    }

    /// `2^e`.
    pub fn pow2(exponent: i64) -> Self {
        Self {
            mantissa: BigInt::one(),
            exponent,
        }
    }

    pub fn from_int(value: impl Into<BigInt>) -> Self {
        Self::new(value, 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Multiplies by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Returns `k` when the value is exactly `2^k`.
    pub fn log2_exact(&self) -> Option<i64> {
        self.mantissa.is_one().then_some(self.exponent)
    }

    /// `ceil(self * 2^k)` as an integer.
    pub fn ceil_scaled(&self, k: i64) -> BigInt {
        let e = self.exponent + k;
        if e >= 0 {
            &self.mantissa << (e as usize)
        } else {
            let d = BigInt::one() << ((-e) as usize);
            Integer::div_ceil(&self.mantissa, &d)
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as usize))
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << ((-self.exponent) as usize),
            )
        }
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.mantissa.to_f64().unwrap_or(f64::NAN);
        m * 2f64.powi(self.exponent.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    /// Exact quotient `self / other`.
    pub fn ratio(&self, other: &Self) -> Option<ExactRatio> {
        if other.is_zero() {
            return None;
        }
        Some(ExactRatio(self.to_rational() / other.to_rational()))
    }

    /// Rendering as `mantissa*2^exponent`.
    pub fn to_scientific(&self) -> String {
        format!("{}*2^{}", self.mantissa, self.exponent)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for DyadicRational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<u64> for DyadicRational {
    fn from(v: u64) -> Self {
        Self::from_int(v)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mantissa.sign(), other.mantissa.sign()) {
            (a, b) if a != b => return sign_rank(a).cmp(&sign_rank(b)),
            (Sign::NoSign, _) => return Ordering::Equal,
            _ => {}
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &other.mantissa << ((other.exponent - e) as usize);
        a.cmp(&b)
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << ((self.exponent - e) as usize);
        let b = &rhs.mantissa << ((rhs.exponent - e) as usize);
        DyadicRational::new(a + b, e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        self + &(-rhs)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: DyadicRational) -> DyadicRational { (&self).$m(&rhs) }
        }
        impl $tr<&DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: &DyadicRational) -> DyadicRational { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for DyadicRational {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| acc * x)
    }
}

/// Exact decimal expansion (every dyadic rational has a finite one).
impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent >= 0 {
            return write!(f, "{}", &self.mantissa << (self.exponent as usize));
        }
        let digits = (-self.exponent) as usize;
        // m * 2^-k = m * 5^k / 10^k
        let scaled = self.mantissa.abs() * num_traits::pow(BigInt::from(5u8), digits);
        let mut s = scaled.to_string();
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        let (int, frac) = s.split_at(s.len() - digits);
        let frac = frac.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        if frac.is_empty() {
            write!(f, "{sign}{int}")
        } else {
            write!(f, "{sign}{int}.{frac}")
        }
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.to_scientific(), self)
    }
}

/// Serialized as `{"mantissa": "<decimal string>", "exponent": e}`.
impl Serialize for DyadicRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DyadicRational", 3)?;
        st.serialize_field("mantissa", &self.mantissa.to_string())?;
        st.serialize_field("exponent", &self.exponent)?;
        st.serialize_field("decimal", &self.to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            mantissa: String,
            exponent: i64,
        }
        let raw = Raw::deserialize(d)?;
        let m: BigInt = raw.mantissa.parse().map_err(serde::de::Error::custom)?;
        Ok(DyadicRational::new(m, raw.exponent))
    }
}

/// An exact quotient of two dyadic rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExactRatio(pub BigRational);

impl ExactRatio {
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Decimal rendering truncated toward zero to `digits` fractional digits.
    pub fn decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10u8), digits);
        let scaled = (self.0.numer().abs() * &scale) / self.0.denom();
        let mut s = scaled.to_string();
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.0.is_negative() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExactRatio", 3)?;
        st.serialize_field("numerator", &self.0.numer().to_string())?;
        st.serialize_field("denominator", &self.0.denom().to_string())?;
        st.serialize_field("decimal", &self.decimal(12))?;
        st.end()
    }
}
