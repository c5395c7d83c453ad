//! Exact pointwise evaluation: membership, function application and
//! bounded preimage listing.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{FuncExpr, Partition, Result, SetExpr, SetExprError};
use crate::point::{qunit_at, qunit_index, Nat, Point, SCAN_BUDGET};

/// Largest block index whose points are listed; their size grows with `k`.
pub const BLOCK_BUDGET: u32 = 1 << 12;

/// Exponent `k` with `b^k <= n < b^(k+1)`, for `n >= 1`.
pub(crate) fn ilog(b: &Nat, n: &Nat) -> (u64, Nat) {
    // start just below the estimate from bit lengths, then step up
    let ratio = n.bits().saturating_sub(1) as f64 / b.to_f64().map_or(f64::INFINITY, f64::log2);
    let mut k = (ratio as u64).saturating_sub(1);
    let mut power = num_traits::pow(b.clone(), k as usize);
    while power > *n {
        power /= b;
        k -= 1;
    }
    loop {
        let next = &power * b;
        if next > *n {
            return (k, power);
        }
        power = next;
        k += 1;
    }
}

/// Index of the block of base `b` containing `n`, if any.
pub(crate) fn block_of(b: &Nat, n: &Nat) -> Option<Nat> {
    if n.is_zero() {
        return None;
    }
    let (k, power) = ilog(b, n);
    let offset = n - &power;
    (offset <= Nat::from(k)).then(|| Nat::from(k))
}

fn is_power(b: &Nat, n: &Nat) -> bool {
    if n.is_zero() {
        return false;
    }
    let mut n = n.clone();
    while (&n % b).is_zero() {
        n /= b;
    }
    n.is_one()
}

pub(crate) fn nat_bits_ok(n: &Nat) -> Result<u32> {
    n.to_u32()
        .filter(|v| u64::from(*v) <= SCAN_BUDGET)
        .ok_or_else(|| SetExprError::Budget(format!("index {n}")))
}

pub(crate) fn in_qball(q: &BigRational, center: &BigRational, radius: &BigRational) -> bool {
    (q - center).abs() < *radius
}

/// Fibre points one membership query may visit.
pub const MEMBER_BUDGET: u64 = 1 << 14;

pub fn contains(e: &SetExpr, p: &Point) -> Result<bool> {
    p.check(e.universe())?;
    contains_unchecked(e, p, &mut 0)
}

fn nat(p: &Point) -> &Nat {
    p.as_nat().expect("universe checked")
}

fn pair(p: &Point) -> (&Nat, &Nat) {
    p.as_pair().expect("universe checked")
}

fn contains_unchecked(e: &SetExpr, p: &Point, work: &mut u64) -> Result<bool> {
    Ok(match e {
        SetExpr::Finite(_, points) => points.binary_search(p).is_ok(),
        SetExpr::Range(a, b) => {
            let n = nat(p);
            a <= n && n < b
        }
        SetExpr::Ap(a, d) => {
            let n = nat(p);
            n >= a && ((n - a) % d).is_zero()
        }
        SetExpr::Evens => nat(p).is_even(),
        SetExpr::Odds => nat(p).is_odd(),
        SetExpr::Squares => {
            let n = nat(p);
            let r = n.sqrt();
            &r * &r == *n
        }
        SetExpr::Powers(b) => is_power(b, nat(p)),
        SetExpr::Blocks(b) => block_of(b, nat(p)).is_some(),
        SetExpr::Block(b, k) => block_of(b, nat(p)).as_ref() == Some(k),
        SetExpr::Tri => {
            let (m, n) = pair(p);
            n <= m
        }
        SetExpr::Grid(a, b) => {
            let (m, n) = pair(p);
            contains_unchecked(a, &Point::Nat(m.clone()), work)?
                && contains_unchecked(b, &Point::Nat(n.clone()), work)?
        }
        SetExpr::Row(m0, e) => {
            let (m, n) = pair(p);
            m == m0 && contains_unchecked(e, &Point::Nat(n.clone()), work)?
        }
        SetExpr::Union(a, b) => contains_unchecked(a, p, work)? || contains_unchecked(b, p, work)?,
        SetExpr::Inter(a, b) => contains_unchecked(a, p, work)? && contains_unchecked(b, p, work)?,
        SetExpr::Diff(a, b) => contains_unchecked(a, p, work)? && !contains_unchecked(b, p, work)?,
        SetExpr::Image(f, inner) => {
            for q in preimage_points(f, p)? {
                *work += 1;
                if *work > MEMBER_BUDGET {
                    return Err(SetExprError::Budget(format!("membership of {p} in {e}")));
                }
                if contains_unchecked(inner, &q, work)? {
                    return Ok(true);
                }
            }
            false
        }
        SetExpr::Preimage(f, inner) => match apply(f, p)? {
            Some(q) => contains_unchecked(inner, &q, work)?,
            None => false,
        },
        SetExpr::Tag0(inner) | SetExpr::Tag1(inner) => {
            let (n, t) = pair(p);
            let want = u8::from(matches!(e, SetExpr::Tag1(_)));
            *t == Nat::from(want) && contains_unchecked(inner, &Point::Nat(n.clone()), work)?
        }
        SetExpr::QAll => true,
        SetExpr::QBall(c, r) => {
            let q = p.as_frac().expect("universe checked").to_rational();
            in_qball(&q, &c.to_rational(), &r.to_rational())
        }
    })
}

/// Applies `f`; `Ok(None)` where a partial function is undefined.
pub fn apply(f: &FuncExpr, p: &Point) -> Result<Option<Point>> {
    p.check(f.domain())?;
    Ok(match f {
        FuncExpr::Id(_) => Some(p.clone()),
        FuncExpr::Proj1 => Some(Point::Nat(pair(p).0.clone())),
        FuncExpr::Proj2 => Some(Point::Nat(pair(p).1.clone())),
        FuncExpr::PairC0 => Some(Point::Pair(nat(p).clone(), Nat::zero())),
        FuncExpr::TagJoin(a, b) => {
            let (n, t) = pair(p);
            let inner = Point::Nat(n.clone());
            if t.is_zero() {
                apply(a, &inner)?
            } else {
                apply(b, &inner)?
            }
        }
        FuncExpr::BlockIndex(b) => block_of(b, nat(p)).map(Point::Nat),
        FuncExpr::CellIndex(Partition::Dyadic) => {
            let n = nat(p);
            (!n.is_zero()).then(|| Point::nat(n.bits() - 1))
        }
        FuncExpr::CellIndex(Partition::Blocks(b)) => block_of(&Nat::from(*b), nat(p)).map(Point::Nat),
        FuncExpr::Table(entries, default) => {
            Some(entries.get(nat(p)).unwrap_or(default).clone())
        }
        FuncExpr::Compose(outer, inner) => match apply(inner, p)? {
            Some(q) => apply(outer, &q)?,
            None => None,
        },
        FuncExpr::QIndex => Some(Point::Nat(qunit_index(p.as_frac().expect("universe checked"))?)),
        FuncExpr::Mod(k) => Some(Point::Nat(nat(p) % k)),
        FuncExpr::Cantor => {
            let (m, n) = pair(p);
            let s: Nat = m + n;
            Some(Point::Nat(&s * (&s + 1u8) / 2u8 + n))
        }
    })
}

fn unpair(z: &Nat) -> Point {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let w: Nat = ((z * 8u8 + 1u8).sqrt() - 1u8) / 2u8;
    let t = &w * (&w + 1u8) / 2u8;
    let n = z - &t;
    let m = &w - &n;
    Point::Pair(m, n)
}

/// All points of `f`'s domain mapped to `p`, when that set is finite and
/// listable; `Undecidable` when the fibre is infinite or unknown in size.
pub fn preimage_points(f: &FuncExpr, p: &Point) -> Result<Vec<Point>> {
    p.check(f.codomain())?;
    let unbounded = || SetExprError::Undecidable(format!("fibre of {f} over {p} is not bounded"));
    Ok(match f {
        FuncExpr::Id(_) => vec![p.clone()],
        FuncExpr::Proj1 | FuncExpr::Proj2 | FuncExpr::Mod(_) => return Err(unbounded()),
        FuncExpr::PairC0 => {
            let (i, t) = pair(p);
            if t.is_zero() {
                vec![Point::Nat(i.clone())]
            } else {
                vec![]
            }
        }
        FuncExpr::TagJoin(a, b) => {
            let mut out = Vec::new();
            for q in preimage_points(a, p)? {
                out.push(Point::Pair(nat(&q).clone(), Nat::zero()));
            }
            for q in preimage_points(b, p)? {
                out.push(Point::Pair(nat(&q).clone(), Nat::one()));
            }
            out.sort();
            out
        }
        FuncExpr::BlockIndex(b) => block_points(b, nat(p))?,
        FuncExpr::CellIndex(Partition::Blocks(b)) => block_points(&Nat::from(*b), nat(p))?,
        FuncExpr::CellIndex(Partition::Dyadic) => {
            let n = nat_bits_ok(nat(p))?;
            if n > 20 {
                return Err(SetExprError::Budget(format!("dyadic cell {n} has 2^{n} points")));
            }
            let lo = 1u64 << n;
            (lo..2 * lo).map(Point::nat).collect()
        }
        FuncExpr::Table(entries, default) => {
            if p == default {
                return Err(unbounded());
            }
            entries
                .iter()
                .filter(|(_, v)| *v == p)
                .map(|(k, _)| Point::Nat(k.clone()))
                .collect()
        }
        FuncExpr::Compose(outer, inner) => {
            let mut out = Vec::new();
            for q in preimage_points(outer, p)? {
                out.extend(preimage_points(inner, &q)?);
            }
            out.sort();
            out.dedup();
            out
        }
        FuncExpr::QIndex => vec![Point::Frac(qunit_at(nat(p))?)],
        FuncExpr::Cantor => vec![unpair(nat(p))],
    })
}

fn block_points(b: &Nat, k: &Nat) -> Result<Vec<Point>> {
    let k = nat_bits_ok(k)?;
    if k > BLOCK_BUDGET {
        return Err(SetExprError::Budget(format!("block {k}")));
    }
    let start = num_traits::pow(b.clone(), k as usize);
    Ok((0..=u64::from(k)).map(|j| Point::Nat(&start + j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setexpr::{parse_func, parse_set};

    fn c(e: &str, p: Point) -> bool {
        contains(&parse_set(e).unwrap(), &p).unwrap()
    }

    #[test]
    fn basic_membership() {
        assert!(c("ap(3,4)", Point::nat(11)));
        assert!(!c("ap(3,4)", Point::nat(12)));
        assert!(c("blocks(10)", Point::nat(102)));
        assert!(!c("blocks(10)", Point::nat(103)));
        assert!(c("blocks(10)", Point::nat(1)));
        assert!(!c("powers(2)", Point::nat(6)));
        assert!(c("powers(2)", Point::nat(1)));
        assert!(c("squares", Point::nat(49)));
        assert!(c("tri", Point::pair(3, 3)));
        assert!(!c("tri", Point::pair(2, 3)));
        assert!(c("qball(1/2,1/4)", Point::frac(1, 3)));
        assert!(!c("qball(1/2,1/4)", Point::frac(1, 4)));
    }

    #[test]
    fn membership_beyond_64_bits() {
        let e = parse_set("img(blockindex(10),evens)").unwrap();
        // E_30 = {10^30, ..., 10^30 + 30} contains even numbers.
        assert!(contains(&e, &Point::nat(30)).unwrap());
        let big: Nat = num_traits::pow(Nat::from(10u8), 40) + 7u8;
        assert!(contains(&parse_set("blocks(10)").unwrap(), &Point::Nat(big)).unwrap());
    }

    #[test]
    fn wrong_universe_is_an_error() {
        let e = parse_set("evens").unwrap();
        assert_eq!(contains(&e, &Point::pair(1, 2)).unwrap_err().code(), "setexpr::universe");
    }

    #[test]
    fn application() {
        let pair = parse_func("pairc0").unwrap();
        assert_eq!(apply(&pair, &Point::nat(4)).unwrap(), Some(Point::pair(4, 0)));
        let bi = parse_func("blockindex(10)").unwrap();
        assert_eq!(apply(&bi, &Point::nat(102)).unwrap(), Some(Point::nat(2)));
        assert_eq!(apply(&bi, &Point::nat(5)).unwrap(), None);
        let cantor = parse_func("cantor").unwrap();
        for z in 0..200u64 {
            let q = unpair(&Nat::from(z));
            assert_eq!(apply(&cantor, &q).unwrap(), Some(Point::nat(z)));
        }
    }

    #[test]
    fn unbounded_image_is_reported() {
        let e = parse_set("img(proj1,tri)").unwrap();
        assert_eq!(contains(&e, &Point::nat(3)).unwrap_err().code(), "setexpr::undecidable");
    }
}
