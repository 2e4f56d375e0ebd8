use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// Exact non-negative rational instant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(BigRational);

impl Time {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn int(n: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn midpoint(a: &Self, b: &Self) -> Self {
        Self((&a.0 + &b.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self(&self.0 * BigRational::from_integer(BigInt::from(k)))
    }

    pub fn div_int(&self, k: i64) -> Self {
        Self(&self.0 / BigRational::from_integer(BigInt::from(k)))
    }

    pub fn min<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max<'a>(&'a self, other: &'a Self) -> &'a Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for &Time {
    type Output = Time;

    fn add(self, rhs: &Time) -> Time {
        Time(&self.0 + &rhs.0)
    }
}

impl Sub for &Time {
    type Output = Time;

    fn sub(self, rhs: &Time) -> Time {
        Time(&self.0 - &rhs.0)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<i64> for Time {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl FromStr for Time {
    type Err = ModelError;

    /// Accepts `7`, `3/4` and exact decimals such as `0.125`. Negative values are rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadTime(s.to_owned());
        let t = s.trim();
        let r = if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        } else if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let whole: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| bad())?
            };
            let scale = BigInt::from(10).pow(frac.len() as u32);
            let f: BigInt = frac.parse().map_err(|_| bad())?;
            let mag = whole.abs() * &scale + f;
            BigRational::new(if negative { -mag } else { mag }, scale)
        } else {
            BigRational::from_integer(t.parse().map_err(|_| bad())?)
        };
        if r.is_negative() {
            return Err(bad());
        }
        Ok(Self(r))
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Self(BigRational::from_integer(BigInt::from(n)))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Closed interval [lo, hi] of instants.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(Time, Time)", into = "(Time, Time)")]
pub struct TimeInterval {
    lo: Time,
    hi: Time,
}

impl TimeInterval {
    pub fn new(lo: Time, hi: Time) -> Result<Self, ModelError> {
        if lo > hi {
            return Err(ModelError::InvalidInterval(format!("[{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn ints(lo: i64, hi: i64) -> Result<Self, ModelError> {
        Self::new(Time::int(lo), Time::int(hi))
    }

    pub fn point(t: Time) -> Self {
        Self { lo: t.clone(), hi: t }
    }

    pub fn lo(&self) -> &Time {
        &self.lo
    }

    pub fn hi(&self) -> &Time {
        &self.hi
    }

    pub fn len(&self) -> Time {
        &self.hi - &self.lo
    }

    pub fn is_instant(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Time {
        Time::midpoint(&self.lo, &self.hi)
    }

    pub fn contains(&self, t: &Time) -> bool {
        &self.lo <= t && t <= &self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Every instant of `self` is strictly earlier than every instant of `other`.
    pub fn before(&self, other: &Self) -> bool {
        self.hi < other.lo
    }
}

impl TryFrom<(Time, Time)> for TimeInterval {
    type Error = ModelError;

    fn try_from((lo, hi): (Time, Time)) -> Result<Self, ModelError> {
        Self::new(lo, hi)
    }
}

impl From<TimeInterval> for (Time, Time) {
    fn from(i: TimeInterval) -> Self {
        (i.lo, i.hi)
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bound {
    at: Time,
    closed: bool,
}

/// One connected piece of a region; `hi = None` means unbounded above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    lo: Bound,
    hi: Option<Bound>,
}

impl Span {
    fn intersects(&self, i: &TimeInterval) -> bool {
        let above_lo = match i.hi.cmp(&self.lo.at) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo.closed,
            Ordering::Less => false,
        };
        let below_hi = match &self.hi {
            None => true,
            Some(h) => match i.lo.cmp(&h.at) {
                Ordering::Less => true,
                Ordering::Equal => h.closed,
                Ordering::Greater => false,
            },
        };
        let nonempty = match &self.hi {
            None => true,
            Some(h) => match self.lo.at.cmp(&h.at) {
                Ordering::Less => true,
                Ordering::Equal => self.lo.closed && h.closed,
                Ordering::Greater => false,
            },
        };
        nonempty && above_lo && below_hi
    }
}

/// Finite union of intervals with open or closed ends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Region {
    spans: Vec<Span>,
}

impl Region {
    pub fn empty() -> Self {
        Self::default()
    }

    fn span(lo: Time, lo_closed: bool, hi: Option<(Time, bool)>) -> Self {
        Self {
            spans: vec![Span {
                lo: Bound {
                    at: lo,
                    closed: lo_closed,
                },
                hi: hi.map(|(at, closed)| Bound { at, closed }),
            }],
        }
    }

    /// [lo, hi]
    pub fn closed(lo: Time, hi: Time) -> Self {
        Self::span(lo, true, Some((hi, true)))
    }

    /// [lo, hi)
    pub fn half_open(lo: Time, hi: Time) -> Self {
        Self::span(lo, true, Some((hi, false)))
    }

    /// (lo, hi]
    pub fn open_closed(lo: Time, hi: Time) -> Self {
        Self::span(lo, false, Some((hi, true)))
    }

    /// [lo, ∞)
    pub fn from(lo: Time) -> Self {
        Self::span(lo, true, None)
    }

    pub fn point(t: Time) -> Self {
        Self::closed(t.clone(), t)
    }

    pub fn union(mut self, other: Self) -> Self {
        self.spans.extend(other.spans);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn intersects(&self, i: &TimeInterval) -> bool {
        self.spans.iter().any(|s| s.intersects(i))
    }
}

impl From<&TimeInterval> for Region {
    fn from(i: &TimeInterval) -> Self {
        Self::closed(i.lo.clone(), i.hi.clone())
    }
}
