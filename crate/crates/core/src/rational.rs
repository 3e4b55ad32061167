//! Exact rational numbers.
//!
//! Values whose numerator and denominator fit in an `i64` are stored inline and
//! combined through `i128` intermediates; anything larger spills to a
//! [`BigRational`]. The representation is canonical (a value is inline if and
//! only if it fits), so the derived equality and hashing are exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// numerator, denominator; denominator > 0, lowest terms, numerator != i64::MIN
    Small(i64, i64),
    Big(Box<BigRational>),
}

/// An exact rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

fn gcd_u128(a: u128, b: u128) -> u128 {
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return (a as u64).gcd(&(b as u64)) as u128;
    }
    a.gcd(&b)
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_integer(n: i64) -> Self {
        if n == i64::MIN {
            return Self::from_big(BigRational::from_integer(BigInt::from(n)));
        }
        Rational(Repr::Small(n, 1))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::from_big(BigRational::new(num, den))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if num == 0 {
            return Self::zero();
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_u128(num.unsigned_abs(), den as u128);
        if g > 1 {
            num /= g as i128;
            den /= g as i128;
        }
        if fits(num) && fits(den) {
            Rational(Repr::Small(num as i64, den as i64))
        } else {
            Rational(Repr::Big(Box::new(BigRational::new_raw(
                BigInt::from(num),
                BigInt::from(den),
            ))))
        }
    }

    /// Takes a reduced or unreduced big rational and stores it canonically.
    pub fn from_big(r: BigRational) -> Self {
        let r = if r.denom().is_negative() { -r } else { r };
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN {
                let g = (n.unsigned_abs()).gcd(&(d as u64));
                if g == 1 {
                    return Rational(Repr::Small(n, d));
                }
                return Self::from_i128(n as i128, d as i128);
            }
        }
        let r = r.reduced();
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN {
                return Rational(Repr::Small(n, d));
            }
        }
        Rational(Repr::Big(Box::new(r)))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                if *n < 0 {
                    Rational(Repr::Small(-*d, -*n))
                } else {
                    Rational(Repr::Small(*d, *n))
                }
            }
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(n.div_floor(d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(n.div_ceil(d)),
            Repr::Big(b) => b.ceil().to_integer(),
        }
    }

    /// Numerator and denominator both bounded by `limit` in absolute value.
    pub fn is_small(&self, limit: i64) -> bool {
        matches!(self.0, Repr::Small(n, d) if n.abs() <= limit && d <= limit)
    }

    /// The rational with the smallest denominator (then smallest magnitude)
    /// in the open interval `(lo, hi)`. Panics unless `lo < hi`.
    pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
        assert!(lo < hi, "empty interval");
        if lo.is_negative() && hi.is_positive() {
            return Rational::zero();
        }
        if !hi.is_positive() {
            return -Self::simplest_between(&-hi, &-lo);
        }
        Self::simplest_positive(lo, Some(hi))
    }

    /// `0 <= lo < hi`, with `None` meaning an unbounded interval.
    fn simplest_positive(lo: &Rational, hi: Option<&Rational>) -> Rational {
        let next = Rational::from(lo.floor()) + Rational::one();
        match hi {
            None => next,
            Some(h) if next < *h => next,
            Some(h) => {
                // lo and hi share the integer part
                let base = Rational::from(lo.floor());
                let frac_lo = lo - &base;
                let frac_hi = h - &base;
                let inner_hi = (!frac_lo.is_zero()).then(|| frac_lo.recip());
                base + Self::simplest_positive(&frac_hi.recip(), inner_hi.as_ref()).recip()
            }
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact value of a finite float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Self::from_big)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn add_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(n1, d1), Repr::Small(n2, d2)) => {
                if *n2 == 0 {
                    return self.clone();
                }
                if *n1 == 0 {
                    return rhs.clone();
                }
                if d1 == d2 {
                    Self::from_i128(*n1 as i128 + *n2 as i128, *d1 as i128)
                } else {
                    let num = *n1 as i128 * *d2 as i128 + *n2 as i128 * *d1 as i128;
                    Self::from_i128(num, *d1 as i128 * *d2 as i128)
                }
            }
            _ => Self::from_big(self.to_big() + rhs.to_big()),
        }
    }

    fn mul_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(n1, d1), Repr::Small(n2, d2)) => {
                if *n1 == 0 || *n2 == 0 {
                    return Self::zero();
                }
                let g1 = n1.unsigned_abs().gcd(&(*d2 as u64)) as i128;
                let g2 = n2.unsigned_abs().gcd(&(*d1 as u64)) as i128;
                let num = (*n1 as i128 / g1) * (*n2 as i128 / g2);
                let den = (*d1 as i128 / g2) * (*d2 as i128 / g1);
                if fits(num) && fits(den) {
                    Rational(Repr::Small(num as i64, den as i64))
                } else {
                    Rational(Repr::Big(Box::new(BigRational::new_raw(
                        BigInt::from(num),
                        BigInt::from(den),
                    ))))
                }
            }
            _ => Self::from_big(self.to_big() * rhs.to_big()),
        }
    }

    fn neg_ref(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-*n, *d)),
            Repr::Big(b) => Self::from_big(-(**b).clone()),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Self::from_integer(n as i64)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(n1, d1), Repr::Small(n2, d2)) => {
                (*n1 as i128 * *d2 as i128).cmp(&(*n2 as i128 * *d1 as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                let f: fn(&Rational, &Rational) -> Rational = $body;
                f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_ref(b));
forward_binop!(Sub, sub, |a, b| a.add_ref(&b.neg_ref()));
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

macro_rules! forward_assign {
    ($tr:ident, $method:ident, $op:ident) => {
        impl $tr<Rational> for Rational {
            fn $method(&mut self, rhs: Rational) {
                *self = (&*self).$op(&rhs);
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            fn $method(&mut self, rhs: &'a Rational) {
                *self = (&*self).$op(rhs);
            }
        }
    };
}

forward_assign!(AddAssign, add_assign, add);
forward_assign!(SubAssign, sub_assign, sub);
forward_assign!(MulAssign, mul_assign, mul);
forward_assign!(DivAssign, div_assign, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p`, `p/q` and plain decimals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Self::from_bigints(p, q));
        }
        if let Some((int, frac)) = t.split_once('.') {
            let negative = int.starts_with('-');
            let digits = int.trim_start_matches(['-', '+']);
            if frac.is_empty() && digits.is_empty() {
                return Err(err());
            }
            if !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            let whole: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().map_err(|_| err())?
            };
            let frac_val: BigInt = if frac.is_empty() {
                BigInt::zero()
            } else {
                frac.parse().map_err(|_| err())?
            };
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let mut num = whole * &scale + frac_val;
            if negative {
                num = -num;
            }
            return Ok(Self::from_bigints(num, scale));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Self::from(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational as a string \"p/q\" or an integer")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::from(BigInt::from(v)))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

/// Shorthand for `Rational::new`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(n)
}

#[cfg(test)]
mod tests {
    #[test]
    fn simplest_between_examples() {
        use super::Rational as R;
        let s = |a: (i64, i64), b: (i64, i64)| R::simplest_between(&q(a.0, a.1), &q(b.0, b.1));
        assert_eq!(s((1, 3), (1, 2)), q(2, 5));
        assert_eq!(s((1, 2), (1, 1)), q(2, 3));
        assert_eq!(s((0, 1), (1, 1)), q(1, 2));
        assert_eq!(s((-7, 3), (-2, 1)), q(-9, 4));
        assert_eq!(s((-1, 2), (1, 3)), q(0, 1));
        assert_eq!(s((3, 1), (7, 1)), q(4, 1));
        assert_eq!(s((314, 100), (315, 100)), q(22, 7));
    }

    use super::*;
    use proptest::prelude::*;

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn canonical_form() {
        assert_eq!(q(2, 4), q(1, 2));
        assert_eq!(q(-3, -6), q(1, 2));
        assert_eq!(q(3, -6).to_string(), "-1/2");
        assert_eq!(q(0, -5), Rational::zero());
        assert_eq!(qi(7).to_string(), "7");
    }

    #[test]
    fn spills_and_demotes() {
        let a = qi(i64::MAX);
        let b = &a + &a;
        assert_eq!(b.numer(), BigInt::from(i64::MAX) * 2);
        let back = &b - &a;
        assert_eq!(back, a);
        assert!(matches!(back.0, Repr::Small(..)));
        let m = qi(i64::MIN + 1) - qi(1);
        assert!(matches!(m.0, Repr::Big(..)));
        assert_eq!(m.to_string(), i64::MIN.to_string());
    }

    #[test]
    fn parses_literals() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("-1.25".parse::<Rational>().unwrap(), q(-5, 4));
        assert_eq!(".5".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!(" 12 ".parse::<Rational>().unwrap(), qi(12));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
    }

    #[test]
    fn json_is_string() {
        let v = vec![q(1, 2), qi(3)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["1/2","3"]"#);
        let back: Vec<Rational> = serde_json::from_str(r#"["1/2", 3]"#).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(q(-7, 2).floor(), BigInt::from(-4));
        assert_eq!(q(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(q(7, 2).floor(), BigInt::from(3));
    }

    fn arb_rational() -> impl Strategy<Value = (i64, i64)> {
        prop_oneof![
            (-50i64..50, 1i64..50),
            (any::<i64>(), 1i64..i64::MAX),
            (-(1i64 << 40)..(1i64 << 40), 1i64..(1i64 << 40)),
        ]
        .prop_filter("no MIN", |(n, _)| *n != i64::MIN)
    }

    proptest! {
        #[test]
        fn agrees_with_bigrational((n1, d1) in arb_rational(), (n2, d2) in arb_rational()) {
            let (a, b) = (q(n1, d1), q(n2, d2));
            let (ba, bb) = (big(n1, d1), big(n2, d2));
            prop_assert_eq!((&a + &b).to_big(), &ba + &bb);
            prop_assert_eq!((&a - &b).to_big(), &ba - &bb);
            prop_assert_eq!((&a * &b).to_big(), &ba * &bb);
            if !b.is_zero() {
                prop_assert_eq!((&a / &b).to_big(), &ba / &bb);
            }
            prop_assert_eq!(a.cmp(&b), ba.cmp(&bb));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
        }

        #[test]
        fn string_round_trip((n, d) in arb_rational(), (m, e) in arb_rational()) {
            let x = q(n, d) * q(m, e) * q(m, e);
            let s = x.to_string();
            prop_assert_eq!(s.parse::<Rational>().unwrap(), x);
        }
    }
}
