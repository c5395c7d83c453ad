//! Weight families of summable ideals and their exact or certified sums.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::score::{dyadic, fmt_rat, Score};

/// Index sets up to this size (with rational weights) are summed exactly.
pub const EXACT_TERMS: usize = 2048;
/// Geometric weights are summed exactly only below this index.
pub const EXACT_GEOM_INDEX: u64 = 4096;
/// Fractional bits of a first enclosure.
pub const ENCLOSURE_BITS: u32 = 96;
/// Fractional bits used when a comparison of enclosures is inconclusive.
pub const REFINED_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    /// `f(n) = 1/(n+1)`.
    Harmonic,
    /// `f(n) = 1/(n+1)^p`, `p >= 1` rational.
    Pow(BigRational),
    /// `f(n) = r^n`, `0 < r < 1` rational.
    Geom(BigRational),
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Harmonic => f.write_str("harmonic"),
            Weight::Pow(p) => write!(f, "pow,{}", fmt_rat(p)),
            Weight::Geom(r) => write!(f, "geom,{}", fmt_rat(r)),
        }
    }
}

fn biguint(x: &BigInt) -> BigUint {
    x.to_biguint().expect("nonnegative")
}

impl Weight {
    /// Whether `Σ f(n)` over all of ω diverges.
    pub fn diverges(&self) -> bool {
        match self {
            Weight::Harmonic => true,
            Weight::Pow(p) => p.is_one(),
            Weight::Geom(_) => false,
        }
    }

    fn integer_power(&self) -> Option<u32> {
        match self {
            Weight::Harmonic => Some(1),
            Weight::Pow(p) if p.is_integer() => p.to_integer().to_u32().filter(|p| *p <= 64),
            _ => None,
        }
    }

    /// `f(n)` when it is rational.
    pub fn term(&self, n: u64) -> Option<BigRational> {
        if let Some(p) = self.integer_power() {
            let den = num_traits::pow(BigInt::from(n) + 1, p as usize);
            return Some(BigRational::new(BigInt::one(), den));
        }
        match self {
            Weight::Geom(r) => Some(num_traits::pow(r.clone(), n as usize)),
            _ => None,
        }
    }

    /// `Σ_{n ∈ xs} f(n)`; exact when affordable, otherwise a certified
    /// enclosure with `ENCLOSURE_BITS` fractional bits.
    pub fn mass(&self, xs: &[u64]) -> Score {
        if let Some(exact) = self.exact_mass(xs) {
            return Score::Exact(exact);
        }
        self.mass_bits(xs, ENCLOSURE_BITS)
    }

    fn exact_mass(&self, xs: &[u64]) -> Option<BigRational> {
        if xs.len() > EXACT_TERMS {
            return None;
        }
        match self {
            Weight::Geom(r) => {
                let m = *xs.iter().max().unwrap_or(&0);
                if m > EXACT_GEOM_INDEX {
                    return None;
                }
                // Σ a^n b^(m-n) / b^m
                let (a, b) = (biguint(r.numer()), biguint(r.denom()));
                let mut num = BigUint::zero();
                for &n in xs {
                    num += num_traits::pow(a.clone(), n as usize) * num_traits::pow(b.clone(), (m - n) as usize);
                }
                let den = num_traits::pow(b, m as usize);
                Some(BigRational::new(num.into(), den.into()))
            }
            _ => {
                let p = self.integer_power()?;
                let dens: Vec<BigUint> = xs
                    .iter()
                    .map(|&n| num_traits::pow(BigUint::from(n) + 1u8, p as usize))
                    .collect();
                if dens.is_empty() {
                    return Some(BigRational::zero());
                }
                let (num, den) = split_sum(&dens);
                Some(BigRational::new(num.into(), den.into()))
            }
        }
    }

    /// Certified enclosure with `bits` fractional bits per term.
    pub fn mass_bits(&self, xs: &[u64], bits: u32) -> Score {
        let (lo, hi) = match self {
            Weight::Geom(r) => geom_bounds(r, xs, bits),
            _ => match self.integer_power() {
                Some(p) => power_bounds(p, xs, bits),
                None => {
                    let Weight::Pow(p) = self else { unreachable!() };
                    rational_power_bounds(p, xs, bits)
                }
            },
        };
        Score::enclosure(dyadic(lo, bits), dyadic(hi, bits))
    }
}

/// Unreduced `Σ 1/d_i` by binary splitting, as `(num, den)`.
fn split_sum(dens: &[BigUint]) -> (BigUint, BigUint) {
    if dens.len() == 1 {
        return (BigUint::one(), dens[0].clone());
    }
    let mid = dens.len() / 2;
    let (n1, d1) = split_sum(&dens[..mid]);
    let (n2, d2) = split_sum(&dens[mid..]);
    (n1 * &d2 + n2 * &d1, d1 * d2)
}

fn power_bounds(p: u32, xs: &[u64], bits: u32) -> (BigUint, BigUint) {
    if bits <= 100 {
        let one = 1u128 << bits;
        let (mut lo, mut hi) = (0u128, 0u128);
        let mut big: Option<(BigUint, BigUint)> = None;
        for &n in xs {
            let base = u128::from(n) + 1;
            match base.checked_pow(p) {
                Some(m) => {
                    lo += one / m;
                    hi += one.div_ceil(m);
                }
                None => {
                    let m = num_traits::pow(BigUint::from(base), p as usize);
                    let (l, h) = floor_ceil_div(&(BigUint::one() << bits), &m);
                    let acc = big.get_or_insert_with(|| (BigUint::zero(), BigUint::zero()));
                    acc.0 += l;
                    acc.1 += h;
                }
            }
        }
        let (mut l, mut h) = (BigUint::from(lo), BigUint::from(hi));
        if let Some((bl, bh)) = big {
            l += bl;
            h += bh;
        }
        return (l, h);
    }
    let one = BigUint::one() << bits;
    let (mut lo, mut hi) = (BigUint::zero(), BigUint::zero());
    for &n in xs {
        let m = num_traits::pow(BigUint::from(n) + 1u8, p as usize);
        let (l, h) = floor_ceil_div(&one, &m);
        lo += l;
        hi += h;
    }
    (lo, hi)
}

fn floor_ceil_div(a: &BigUint, b: &BigUint) -> (BigUint, BigUint) {
    let q = a / b;
    if (&q * b) == *a {
        (q.clone(), q)
    } else {
        let up = &q + 1u8;
        (q, up)
    }
}

/// Terms `(n+1)^(-a/b)`: `floor(X^(1/b)) = floor(floor(X)^(1/b))` gives the
/// lower end exactly, and the ceiling of the root of `ceil(X)` bounds above.
fn rational_power_bounds(p: &BigRational, xs: &[u64], bits: u32) -> (BigUint, BigUint) {
    let a = biguint(p.numer()).to_usize().expect("small exponent");
    let b = biguint(p.denom()).to_u32().expect("small exponent");
    let scale = BigUint::one() << (bits as usize * b as usize);
    let (mut lo, mut hi) = (BigUint::zero(), BigUint::zero());
    for &n in xs {
        let m = num_traits::pow(BigUint::from(n) + 1u8, a);
        let (fx, cx) = floor_ceil_div(&scale, &m);
        lo += fx.nth_root(b);
        let r = cx.nth_root(b);
        if num_traits::pow(r.clone(), b as usize) == cx {
            hi += r;
        } else {
            hi += r + 1u8;
        }
    }
    (lo, hi)
}

fn geom_bounds(r: &BigRational, xs: &[u64], bits: u32) -> (BigUint, BigUint) {
    let (a, b) = (biguint(r.numer()), biguint(r.denom()));
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    let one = BigUint::one() << bits;
    let (mut cur_lo, mut cur_hi) = (one.clone(), one);
    let mut at = 0u64;
    let (mut lo, mut hi) = (BigUint::zero(), BigUint::zero());
    for n in sorted {
        while at < n {
            cur_lo = &cur_lo * &a / &b;
            cur_hi = floor_ceil_div(&(&cur_hi * &a), &b).1;
            at += 1;
            if cur_hi <= BigUint::one() && cur_lo.is_zero() {
                // every later term lies in [0, 2^-bits]
                at = n;
            }
        }
        lo += &cur_lo;
        hi += &cur_hi;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::rat;

    #[test]
    fn small_harmonic_sums_are_exact() {
        assert_eq!(Weight::Harmonic.mass(&[0, 1, 2, 3]), Score::Exact(rat(25, 12)));
        assert_eq!(Weight::Harmonic.mass(&[]), Score::Exact(rat(0, 1)));
    }

    #[test]
    fn enclosure_contains_exact_value() {
        let xs: Vec<u64> = (0..3000).collect();
        let exact = {
            let mut acc = BigRational::zero();
            for n in &xs {
                acc += Weight::Harmonic.term(*n).unwrap();
            }
            acc
        };
        for bits in [ENCLOSURE_BITS, REFINED_BITS] {
            let s = Weight::Harmonic.mass_bits(&xs, bits);
            assert!(s.lo() <= &exact && &exact <= s.hi());
        }
        let sq = Weight::Pow(rat(2, 1)).mass_bits(&xs[..500], ENCLOSURE_BITS);
        let sq_exact = Weight::Pow(rat(2, 1)).mass(&xs[..500]);
        assert!(sq.lo() <= sq_exact.lo() && sq_exact.hi() <= sq.hi());
    }

    #[test]
    fn geometric_enclosure_brackets_exact_sum() {
        let w = Weight::Geom(rat(2, 3));
        let xs = [0u64, 5, 17, 40, 41];
        let exact = w.mass(&xs);
        assert!(exact.is_exact());
        let enc = w.mass_bits(&xs, 64);
        assert!(enc.lo() <= exact.lo() && exact.hi() <= enc.hi());
    }

    #[test]
    fn rational_powers_bracket_float_value() {
        let w = Weight::Pow(rat(3, 2));
        let xs = [0u64, 3, 8, 99];
        let s = w.mass(&xs);
        let approx: f64 = xs.iter().map(|n| ((*n + 1) as f64).powf(-1.5)).sum();
        assert!(crate::score::to_f64(s.lo()) <= approx + 1e-12);
        assert!(crate::score::to_f64(s.hi()) >= approx - 1e-12);
        assert!(crate::score::to_f64(&(s.hi() - s.lo())) < 1e-20);
    }
}
