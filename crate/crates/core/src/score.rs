//! Score values: exact rationals, or certified enclosures `[lo, hi]` with
//! dyadic endpoints when an exact sum would be impractically large.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Score {
    Exact(BigRational),
    /// The true value lies in `[lo, hi]`, `lo < hi`.
    Enclosure { lo: BigRational, hi: BigRational },
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `x / 2^bits` as a rational.
pub fn dyadic(x: BigUint, bits: u32) -> BigRational {
    BigRational::new(BigInt::from(x), BigInt::from(BigUint::from(1u8) << bits))
}

impl Score {
    pub fn zero() -> Score {
        Score::Exact(BigRational::zero())
    }

    pub fn count(n: usize) -> Score {
        Score::Exact(int(n as u64))
    }

    /// Builds an enclosure, collapsing it when the endpoints coincide.
    pub fn enclosure(lo: BigRational, hi: BigRational) -> Score {
        match lo.cmp(&hi) {
            Ordering::Equal => Score::Exact(lo),
            Ordering::Less => Score::Enclosure { lo, hi },
            Ordering::Greater => panic!("inverted enclosure"),
        }
    }

    pub fn lo(&self) -> &BigRational {
        match self {
            Score::Exact(v) => v,
            Score::Enclosure { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &BigRational {
        match self {
            Score::Exact(v) => v,
            Score::Enclosure { hi, .. } => hi,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Score::Exact(v) => Some(v),
            Score::Enclosure { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Score::Exact(_))
    }

    /// Ordering when it is certain from the enclosures.
    pub fn certain_cmp(&self, other: &Score) -> Option<Ordering> {
        if let (Score::Exact(a), Score::Exact(b)) = (self, other) {
            return Some(a.cmp(b));
        }
        if self.hi() < other.lo() {
            Some(Ordering::Less)
        } else if self.lo() > other.hi() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Whether the value is certainly at most `bound`.
    pub fn certainly_le(&self, bound: &BigRational) -> bool {
        self.hi() <= bound
    }

    /// Whether the value is certainly above `bound`.
    pub fn certainly_gt(&self, bound: &BigRational) -> bool {
        self.lo() > bound
    }

    pub fn add(&self, other: &Score) -> Score {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => Score::Exact(a + b),
            _ => Score::enclosure(self.lo() + other.lo(), self.hi() + other.hi()),
        }
    }

    /// Decimal approximation of the midpoint, for display only.
    pub fn approx(&self) -> f64 {
        let mid = (self.lo() + self.hi()) / BigInt::from(2);
        to_f64(&mid)
    }
}

/// Decimal approximation of a rational, for display only.
pub fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let r = r.abs();
    let (n, d) = (r.numer(), r.denom());
    // shift so the quotient has about 64 significant bits
    let shift = 64i64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n << shift as usize) / d
    } else {
        n / (d << (-shift) as usize)
    };
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if neg {
        -v
    } else {
        v
    }
}

/// `p/q` for rationals, integers without denominator.
pub fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Exact(v) => f.write_str(&fmt_rat(v)),
            Score::Enclosure { lo, hi } => write!(f, "[{},{}]", fmt_rat(lo), fmt_rat(hi)),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<BigRational> for Score {
    fn from(v: BigRational) -> Score {
        Score::Exact(v)
    }
}

impl From<u64> for Score {
    fn from(v: u64) -> Score {
        Score::Exact(int(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        assert_eq!(Score::Exact(rat(25, 12)).to_string(), "25/12");
        assert_eq!(Score::from(5).to_string(), "5");
        assert_eq!(Score::enclosure(rat(1, 4), rat(1, 2)).to_string(), "[1/4,1/2]");
        assert_eq!(Score::enclosure(rat(1, 2), rat(1, 2)), Score::Exact(rat(1, 2)));
    }

    #[test]
    fn certain_comparisons() {
        let a = Score::enclosure(rat(1, 4), rat(1, 2));
        let b = Score::enclosure(rat(3, 4), rat(1, 1));
        let c = Score::enclosure(rat(1, 3), rat(5, 6));
        assert_eq!(a.certain_cmp(&b), Some(Ordering::Less));
        assert_eq!(a.certain_cmp(&c), None);
        assert!(a.certainly_le(&rat(1, 2)));
        assert!(!a.certainly_gt(&rat(1, 4)));
        assert_eq!(a.add(&b).to_string(), "[1,3/2]");
    }

    #[test]
    fn decimal_approximation() {
        assert!((to_f64(&rat(25, 12)) - 25.0 / 12.0).abs() < 1e-12);
        assert!((to_f64(&rat(-1, 3)) + 1.0 / 3.0).abs() < 1e-12);
        assert!((to_f64(&dyadic(BigUint::from(3u8), 2)) - 0.75).abs() < 1e-12);
    }
}
