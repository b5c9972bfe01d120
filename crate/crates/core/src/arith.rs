//! Exact rational scalars and vectors in `N_Q = Q^2`, plus the JSON encodings
//! shared by every report.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::lattice_toric::LatticeVec;

/// Exact rational number.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as a rational number")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-7/4"` or `" 2 / 6 "`.
pub fn parse_rational(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| err())?)),
    }
}

fn bigint_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

/// `{"num": .., "den": ..}`; numerators outside the i64 range become strings.
pub fn rational_json(x: &Q) -> Value {
    json!({"num": bigint_json(x.numer()), "den": bigint_json(x.denom())})
}

/// `[num, den]`, the compact form used inside `tropcurve.json`.
pub fn rational_pair_json(x: &Q) -> Value {
    json!([bigint_json(x.numer()), bigint_json(x.denom())])
}

fn bigint_from_json(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Accepts `{"num","den"}`, `[num, den]`, a bare integer, or a string such as `"3/4"`.
pub fn rational_from_json(v: &Value) -> Option<Q> {
    match v {
        Value::Object(map) => {
            let n = bigint_from_json(map.get("num")?)?;
            let d = bigint_from_json(map.get("den")?)?;
            (!d.is_zero()).then(|| Q::new(n, d))
        }
        Value::Array(items) if items.len() == 2 => {
            let n = bigint_from_json(&items[0])?;
            let d = bigint_from_json(&items[1])?;
            (!d.is_zero()).then(|| Q::new(n, d))
        }
        Value::Number(n) => n.as_i64().map(q),
        Value::String(s) => parse_rational(s).ok(),
        _ => None,
    }
}

/// A point of `N_Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVec {
    pub x: Q,
    pub y: Q,
}

impl RatVec {
    pub fn new(x: Q, y: Q) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero())
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(q(x), q(y))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(&self.x * c, &self.y * c)
    }

    pub fn div(&self, c: &Q) -> Self {
        Self::new(&self.x / c, &self.y / c)
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// The lattice vector, if both coordinates are integers that fit in `i64`.
    pub fn to_lattice(&self) -> Option<LatticeVec> {
        if !self.is_integral() {
            return None;
        }
        Some(LatticeVec::new(self.x.to_integer().to_i64()?, self.y.to_integer().to_i64()?))
    }

    /// `det(self, other)`.
    pub fn cross(&self, other: &RatVec) -> Q {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn to_json(&self) -> Value {
        json!([rational_json(&self.x), rational_json(&self.y)])
    }

    pub fn to_pair_json(&self) -> Value {
        json!([rational_pair_json(&self.x), rational_pair_json(&self.y)])
    }

    pub fn from_json(v: &Value) -> Option<Self> {
        let items = v.as_array()?;
        if items.len() != 2 {
            return None;
        }
        Some(Self::new(rational_from_json(&items[0])?, rational_from_json(&items[1])?))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64().unwrap_or(f64::NAN), self.y.to_f64().unwrap_or(f64::NAN))
    }
}

impl From<LatticeVec> for RatVec {
    fn from(v: LatticeVec) -> Self {
        Self::from_ints(v.x, v.y)
    }
}

impl Add for &RatVec {
    type Output = RatVec;
    fn add(self, rhs: &RatVec) -> RatVec {
        RatVec::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub for &RatVec {
    type Output = RatVec;
    fn sub(self, rhs: &RatVec) -> RatVec {
        RatVec::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Neg for &RatVec {
    type Output = RatVec;
    fn neg(self) -> RatVec {
        RatVec::new(-&self.x, -&self.y)
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Integer ceiling of a rational.
pub fn ceil(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// Integer floor of a rational.
pub fn floor(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn one() -> Q {
    Q::one()
}
