//! Universes and points.
//!
//! Every set expression lives in one of four countable universes. Points
//! carry arbitrary-precision naturals; enumerations that must touch every
//! point below a cutoff (truncations, windows) run over machine integers
//! since a cutoff is a `u64`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::setexpr::SetExprError;

pub type Nat = BigUint;

/// Upper limit on linear scans performed while evaluating a single point
/// (totient sums, enumeration inversions, preimage listings).
pub const SCAN_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Universe {
    /// The naturals.
    Omega,
    /// Pairs of naturals.
    OmegaSq,
    /// Pairs `(n, t)` with `t` in `{0, 1}`, the carrier of a disjoint sum.
    OmegaTagged,
    /// Rationals in `[0, 1]`.
    QUnit,
}

impl Universe {
    pub fn name(self) -> &'static str {
        match self {
            Universe::Omega => "omega",
            Universe::OmegaSq => "omega^2",
            Universe::OmegaTagged => "omega x {0,1}",
            Universe::QUnit => "Q cap [0,1]",
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A reduced fraction `num/den` with `0 <= num <= den`.
///
/// Field order makes the derived `Ord` agree with the enumeration of
/// `QUnit`: ascending denominator, then ascending numerator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frac {
    den: Nat,
    num: Nat,
}

impl Frac {
    pub fn new(num: Nat, den: Nat) -> Result<Frac, SetExprError> {
        if den.is_zero() {
            return Err(SetExprError::Parameter("fraction with zero denominator".into()));
        }
        if num > den {
            return Err(SetExprError::Parameter(format!("{num}/{den} lies outside [0,1]")));
        }
        let g = num.gcd(&den);
        let (num, den) = if num.is_zero() {
            (Nat::zero(), Nat::one())
        } else {
            (num / &g, den / &g)
        };
        Ok(Frac { den, num })
    }

    pub fn from_u64(num: u64, den: u64) -> Result<Frac, SetExprError> {
        Frac::new(Nat::from(num), Nat::from(den))
    }

    pub fn num(&self) -> &Nat {
        &self.num
    }

    pub fn den(&self) -> &Nat {
        &self.den
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone().into(), self.den.clone().into())
    }

    pub fn from_rational(r: &BigRational) -> Result<Frac, SetExprError> {
        let num = r
            .numer()
            .to_biguint()
            .ok_or_else(|| SetExprError::Parameter(format!("{r} lies outside [0,1]")))?;
        let den = r.denom().to_biguint().expect("denominator is positive");
        Frac::new(num, den)
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A point of one of the universes. The universe itself is not stored:
/// `Pair` serves both `OmegaSq` and `OmegaTagged`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Nat(Nat),
    Pair(Nat, Nat),
    Frac(Frac),
}

impl Point {
    pub fn nat(n: u64) -> Point {
        Point::Nat(Nat::from(n))
    }

    pub fn pair(m: u64, n: u64) -> Point {
        Point::Pair(Nat::from(m), Nat::from(n))
    }

    pub fn frac(num: u64, den: u64) -> Point {
        Point::Frac(Frac::from_u64(num, den).expect("valid fraction"))
    }

    /// Checks that the point belongs to `universe`.
    pub fn check(&self, universe: Universe) -> Result<(), SetExprError> {
        let ok = match (self, universe) {
            (Point::Nat(_), Universe::Omega) => true,
            (Point::Pair(_, _), Universe::OmegaSq) => true,
            (Point::Pair(_, t), Universe::OmegaTagged) => *t <= Nat::one(),
            (Point::Frac(_), Universe::QUnit) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(SetExprError::UniverseMismatch {
                context: format!("point {self}"),
                expected: universe,
                found: self.natural_universe(),
            })
        }
    }

    /// The universe a point of this shape belongs to by default.
    pub fn natural_universe(&self) -> Universe {
        match self {
            Point::Nat(_) => Universe::Omega,
            Point::Pair(_, _) => Universe::OmegaSq,
            Point::Frac(_) => Universe::QUnit,
        }
    }

    pub fn as_nat(&self) -> Option<&Nat> {
        match self {
            Point::Nat(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.as_nat().and_then(|n| n.to_u64())
    }

    pub fn as_pair(&self) -> Option<(&Nat, &Nat)> {
        match self {
            Point::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_frac(&self) -> Option<&Frac> {
        match self {
            Point::Frac(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Nat(n) => write!(f, "{n}"),
            Point::Pair(a, b) => write!(f, "({a},{b})"),
            Point::Frac(q) => write!(f, "{q}"),
        }
    }
}

pub(crate) fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Position of a rational in the enumeration 0/1, 1/1, 1/2, 1/3, 2/3, 1/4, ...
pub fn qunit_index(q: &Frac) -> Result<Nat, SetExprError> {
    let den = q
        .den()
        .to_u64()
        .filter(|d| *d <= SCAN_BUDGET)
        .ok_or_else(|| SetExprError::Budget(format!("enumeration index of {q}")))?;
    let num = q.num().to_u64().expect("num <= den");
    if den == 1 {
        return Ok(Nat::from(num));
    }
    let mut index: u64 = 2;
    for d in 2..den {
        index += totient(d);
    }
    index += (1..num).filter(|p| gcd_u64(*p, den) == 1).count() as u64;
    Ok(Nat::from(index))
}

/// Inverse of [`qunit_index`].
pub fn qunit_at(index: &Nat) -> Result<Frac, SetExprError> {
    let mut rest = index
        .to_u64()
        .filter(|i| *i <= SCAN_BUDGET * 16)
        .ok_or_else(|| SetExprError::Budget(format!("rational at enumeration index {index}")))?;
    if rest < 2 {
        return Frac::from_u64(rest, 1);
    }
    rest -= 2;
    let mut den = 2u64;
    loop {
        let count = totient(den);
        if rest < count {
            let num = (1..den)
                .filter(|p| gcd_u64(*p, den) == 1)
                .nth(rest as usize)
                .expect("rank below totient");
            return Frac::from_u64(num, den);
        }
        rest -= count;
        den += 1;
    }
}

/// The first `n` rationals of the enumeration, as `(num, den)` pairs.
pub fn qunit_prefix(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
    if n == 0 {
        return out;
    }
    out.push((0, 1));
    if n == 1 {
        return out;
    }
    out.push((1, 1));
    let mut den = 2u64;
    while (out.len() as u64) < n {
        for num in 1..den {
            if gcd_u64(num, den) == 1 {
                out.push((num, den));
                if out.len() as u64 == n {
                    break;
                }
            }
        }
        den += 1;
    }
    out
}

/// All points of `universe` below cutoff `n`, in canonical order.
pub fn window(universe: Universe, n: u64) -> Vec<Point> {
    match universe {
        Universe::Omega => (0..n).map(Point::nat).collect(),
        Universe::OmegaSq => {
            let mut out = Vec::with_capacity((n * n).min(1 << 24) as usize);
            for m in 0..n {
                for k in 0..n {
                    out.push(Point::pair(m, k));
                }
            }
            out
        }
        Universe::OmegaTagged => {
            let mut out = Vec::with_capacity((2 * n) as usize);
            for m in 0..n {
                out.push(Point::pair(m, 0));
                out.push(Point::pair(m, 1));
            }
            out
        }
        Universe::QUnit => qunit_prefix(n)
            .into_iter()
            .map(|(p, q)| Point::frac(p, q))
            .collect(),
    }
}

/// Whether `p` falls inside the cutoff-`n` window of `universe`.
pub fn in_window(universe: Universe, p: &Point, n: u64) -> Result<bool, SetExprError> {
    let bound = Nat::from(n);
    Ok(match (universe, p) {
        (Universe::Omega, Point::Nat(k)) => *k < bound,
        (Universe::OmegaSq, Point::Pair(a, b)) => *a < bound && *b < bound,
        (Universe::OmegaTagged, Point::Pair(a, _)) => *a < bound,
        (Universe::QUnit, Point::Frac(q)) => {
            // Denominators past 2*sqrt(n)+2 cannot occur among the first n rationals.
            match q.den().to_u64() {
                Some(d) if (d as f64) <= 2.0 * (n as f64).sqrt() + 2.0 => qunit_index(q)? < bound,
                _ => false,
            }
        }
        _ => {
            p.check(universe)?;
            unreachable!()
        }
    })
}
