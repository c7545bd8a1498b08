//! Exact truth degrees in the unit interval.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegreeError {
    #[error("truth degree {0} is outside [0,1]")]
    OutOfRange(String),
    #[error("malformed number `{0}`")]
    Malformed(String),
}

/// A truth degree: an exact rational number in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruthDegree(BigRational);

impl TruthDegree {
    pub fn zero() -> Self {
        TruthDegree(BigRational::zero())
    }

    pub fn one() -> Self {
        TruthDegree(BigRational::one())
    }

    /// Builds `num/den`, rejecting values outside `[0,1]` and zero denominators.
    pub fn ratio(num: i64, den: i64) -> Result<Self, DegreeError> {
        if den == 0 {
            return Err(DegreeError::Malformed(format!("{num}/{den}")));
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn new(value: BigRational) -> Result<Self, DegreeError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(DegreeError::OutOfRange(fmt_rational(&value)));
        }
        Ok(TruthDegree(value))
    }

    /// Clamps an arbitrary rational into `[0,1]`.
    pub fn clamp(value: BigRational) -> Self {
        if value.is_negative() {
            Self::zero()
        } else if value > BigRational::one() {
            Self::one()
        } else {
            TruthDegree(value)
        }
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Łukasiewicz t-norm: `max{a + b - 1, 0}`.
    pub fn luk_and(&self, other: &Self) -> Self {
        Self::clamp(&self.0 + &other.0 - BigRational::one())
    }

    /// Łukasiewicz t-conorm: `min{a + b, 1}`.
    pub fn luk_or(&self, other: &Self) -> Self {
        Self::clamp(&self.0 + &other.0)
    }

    pub fn godel_or(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn godel_and(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Complement `1 - a`.
    pub fn complement(&self) -> Self {
        TruthDegree(BigRational::one() - &self.0)
    }
}

impl fmt::Display for TruthDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_rational(&self.0))
    }
}

/// Renders a rational as `n` or `n/d`.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `n`, `n/d` or a decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, DegreeError> {
    let malformed = || DegreeError::Malformed(text.to_string());
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| malformed())?;
        let d: BigInt = d.trim().parse().map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(malformed());
        }
        BigRational::new(n, d)
    } else if let Some((int, frac)) = body.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return Err(malformed());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(malformed());
        }
        let int: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| malformed())?
        };
        let frac_num: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| malformed())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        BigRational::new(int * &scale + frac_num, scale)
    } else {
        if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
            return Err(malformed());
        }
        BigRational::from_integer(body.parse().map_err(|_| malformed())?)
    };
    Ok(if negative { -value } else { value })
}

impl FromStr for TruthDegree {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TruthDegree::new(parse_rational(s)?)
    }
}

impl From<TruthDegree> for BigRational {
    fn from(d: TruthDegree) -> Self {
        d.0
    }
}
