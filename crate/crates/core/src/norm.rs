//! `L_p` norms with exact evaluation where the value is rational (or the
//! square root of a rational) and high-precision floats otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{norm_l1, norm_l2_squared, norm_linf};
use crate::rational::Rational;

/// Mantissa bits used for general `p`.
pub const PRECISION_BITS: usize = 192;
/// Relative tolerance below which two general-`p` norms count as tied.
pub const RELATIVE_TOLERANCE: f64 = 1e-25;

const RM: RoundingMode = RoundingMode::ToEven;

/// A norm exponent `p >= 1` or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PNorm {
    One,
    Two,
    Inf,
    /// rational `p > 1`, `p != 2`
    Other(Rational),
}

impl PNorm {
    pub fn new(p: Rational) -> Result<Self> {
        if p < Rational::one() {
            return input(format!("norm exponent must be >= 1, got {p}"));
        }
        Ok(if p.is_one() {
            PNorm::One
        } else if p == Rational::from_integer(2) {
            PNorm::Two
        } else {
            PNorm::Other(p)
        })
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn dual(&self) -> PNorm {
        match self {
            PNorm::One => PNorm::Inf,
            PNorm::Inf => PNorm::One,
            PNorm::Two => PNorm::Two,
            PNorm::Other(p) => PNorm::new(p / (p - Rational::one())).expect("conjugate exceeds 1"),
        }
    }

    pub fn eval(&self, x: &[Rational]) -> NormValue {
        match self {
            PNorm::One => NormValue::Exact(norm_l1(x)),
            PNorm::Inf => NormValue::Exact(norm_linf(x)),
            PNorm::Two => NormValue::SqrtOf(norm_l2_squared(x)),
            PNorm::Other(p) => {
                let mut cc = consts();
                NormValue::Approx(PowerSum::new(x, p, &mut cc).root(p, &mut cc))
            }
        }
    }

    /// The entry of `points` with the largest norm; ties (within
    /// `RELATIVE_TOLERANCE` for general `p`) go to the earliest entry.
    pub fn argmax<'a>(&self, points: &'a [Vec<Rational>]) -> Option<(NormValue, &'a [Rational])> {
        match self {
            PNorm::Other(p) => {
                let mut cc = consts();
                let mut best: Option<(PowerSum, usize)> = None;
                for (i, x) in points.iter().enumerate() {
                    let s = PowerSum::new(x, p, &mut cc);
                    if best.as_ref().is_none_or(|(b, _)| s.exceeds(b)) {
                        best = Some((s, i));
                    }
                }
                best.map(|(s, i)| (NormValue::Approx(s.root(p, &mut cc)), &points[i][..]))
            }
            _ => {
                let mut best: Option<(NormValue, usize)> = None;
                for (i, x) in points.iter().enumerate() {
                    let v = self.eval(x);
                    if best.as_ref().is_none_or(|(b, _)| v.cmp_same_kind(b) == Ordering::Greater) {
                        best = Some((v, i));
                    }
                }
                best.map(|(v, i)| (v, &points[i][..]))
            }
        }
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(PNorm::Inf),
            t => PNorm::new(t.parse().map_err(|e| Error::Input(format!("norm exponent: {e}")))?),
        }
    }
}

impl TryFrom<String> for PNorm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PNorm> for String {
    fn from(p: PNorm) -> String {
        p.to_string()
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::One => f.write_str("1"),
            PNorm::Two => f.write_str("2"),
            PNorm::Inf => f.write_str("inf"),
            PNorm::Other(p) => write!(f, "{p}"),
        }
    }
}

/// A norm value: exact rational, exact square root of a rational, or a
/// high-precision approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum NormValue {
    Exact(Rational),
    SqrtOf(Rational),
    Approx(HighPrecision),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HighPrecision {
    pub decimal: String,
    pub value: f64,
}

impl NormValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            NormValue::Exact(r) => r.to_f64(),
            NormValue::SqrtOf(r) => r.to_f64().sqrt(),
            NormValue::Approx(h) => h.value,
        }
    }

    /// The exact rational value, if it is one.
    pub fn exact(&self) -> Option<Rational> {
        match self {
            NormValue::Exact(r) => Some(r.clone()),
            _ => None,
        }
    }

    fn cmp_same_kind(&self, other: &NormValue) -> Ordering {
        match (self, other) {
            (NormValue::Exact(a), NormValue::Exact(b)) | (NormValue::SqrtOf(a), NormValue::SqrtOf(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

/// Serialized as its display string: `"3/2"`, `"sqrt(5)"` or a decimal.
impl Serialize for NormValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Exact(r) => write!(f, "{r}"),
            NormValue::SqrtOf(r) => write!(f, "sqrt({r})"),
            NormValue::Approx(h) => f.write_str(&h.decimal),
        }
    }
}

fn consts() -> Consts {
    Consts::new().expect("astro-float constants cache")
}

fn to_big_float(r: &Rational, cc: &mut Consts) -> BigFloat {
    let n = BigFloat::parse(&r.numer().to_string(), Radix::Dec, PRECISION_BITS, RM, cc);
    let d = BigFloat::parse(&r.denom().to_string(), Radix::Dec, PRECISION_BITS, RM, cc);
    n.div(&d, PRECISION_BITS, RM)
}

/// `Σ |x_i|^p`, monotone in the norm and cheaper to compare than the root.
struct PowerSum(BigFloat);

impl PowerSum {
    fn new(x: &[Rational], p: &Rational, cc: &mut Consts) -> Self {
        let pf = to_big_float(p, cc);
        let mut acc = BigFloat::from_word(0, PRECISION_BITS);
        for v in x.iter().filter(|v| !v.is_zero()) {
            let t = to_big_float(&v.abs(), cc).pow(&pf, PRECISION_BITS, RM, cc);
            acc = acc.add(&t, PRECISION_BITS, RM);
        }
        PowerSum(acc)
    }

    fn exceeds(&self, other: &PowerSum) -> bool {
        let diff = self.0.sub(&other.0, PRECISION_BITS, RM);
        let tol = other.0.mul(&BigFloat::from_f64(RELATIVE_TOLERANCE, PRECISION_BITS), PRECISION_BITS, RM);
        diff.cmp(&tol).is_some_and(|c| c > 0)
    }

    fn root(&self, p: &Rational, cc: &mut Consts) -> HighPrecision {
        let inv = to_big_float(&p.recip(), cc);
        let v = if self.0.is_zero() { self.0.clone() } else { self.0.pow(&inv, PRECISION_BITS, RM, cc) };
        let decimal = v.format(Radix::Dec, RM, cc).expect("finite value");
        let value = decimal.parse::<f64>().unwrap_or(f64::NAN);
        HighPrecision { decimal, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn parse_and_dual() {
        assert_eq!("1".parse::<PNorm>().unwrap(), PNorm::One);
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Inf);
        assert_eq!("4/2".parse::<PNorm>().unwrap(), PNorm::Two);
        assert_eq!("3".parse::<PNorm>().unwrap().dual(), PNorm::Other(q(3, 2)));
        assert!("1/2".parse::<PNorm>().is_err());
        assert_eq!(PNorm::One.dual(), PNorm::Inf);
    }

    #[test]
    fn exact_values() {
        let x = vec![qi(3), qi(-4)];
        assert_eq!(PNorm::One.eval(&x), NormValue::Exact(qi(7)));
        assert_eq!(PNorm::Inf.eval(&x), NormValue::Exact(qi(4)));
        assert_eq!(PNorm::Two.eval(&x), NormValue::SqrtOf(qi(25)));
        assert_eq!(PNorm::Two.eval(&x).to_string(), "sqrt(25)");
    }

    #[test]
    fn general_p_close_to_float() {
        let x = vec![qi(3), qi(-4), q(1, 2)];
        let v = PNorm::Other(qi(3)).eval(&x).to_f64();
        let expect = (27.0f64 + 64.0 + 0.125).cbrt();
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        // p = 3/2 on (1, 1): 2^(2/3)
        let v = PNorm::Other(q(3, 2)).eval(&[qi(1), qi(1)]).to_f64();
        assert!((v - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(PNorm::Other(qi(3)).eval(&[qi(0)]).to_f64(), 0.0);
    }

    #[test]
    fn argmax_ties_prefer_first() {
        let pts = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)], vec![q(1, 2), q(1, 2)]];
        let (v, at) = PNorm::Inf.argmax(&pts).unwrap();
        assert_eq!(v, NormValue::Exact(qi(1)));
        assert_eq!(at, &pts[0][..]);
        let (_, at) = PNorm::Other(qi(3)).argmax(&pts).unwrap();
        assert_eq!(at, &pts[0][..]);
        let (_, at) = PNorm::One.argmax(&pts).unwrap();
        assert_eq!(at, &pts[0][..]);
    }
}
