//! Structural rewriting and finiteness analysis used by the deciders.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::eval::{apply, contains, preimage_points};
use super::{FuncExpr, Partition, SetExpr};
use crate::point::{Nat, Point, Universe, SCAN_BUDGET};

/// `(a, d)` when `e` is structurally the progression `{a + kd}`.
pub fn as_ap(e: &SetExpr) -> Option<(Nat, Nat)> {
    match e {
        SetExpr::Ap(a, d) => Some((a.clone(), d.clone())),
        SetExpr::Evens => Some((Nat::zero(), Nat::from(2u8))),
        SetExpr::Odds => Some((Nat::from(1u8), Nat::from(2u8))),
        _ => None,
    }
}

/// Intersection of two progressions: another progression, or `None` when
/// they are disjoint.
pub fn intersect_aps(a1: &Nat, d1: &Nat, a2: &Nat, d2: &Nat) -> Option<(Nat, Nat)> {
    let (a1i, d1i, a2i, d2i) = (
        BigInt::from(a1.clone()),
        BigInt::from(d1.clone()),
        BigInt::from(a2.clone()),
        BigInt::from(d2.clone()),
    );
    let eg = d1i.extended_gcd(&d2i);
    let g = eg.gcd;
    let diff = &a2i - &a1i;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let lcm = &d1i / &g * &d2i;
    // x = a1 + d1 * t with d1 * t ≡ diff (mod d2)
    let t = (&diff / &g * &eg.x).mod_floor(&(&d2i / &g));
    let x0 = (&a1i + &d1i * t).mod_floor(&lcm);
    let floor = a1i.clone().max(a2i.clone());
    // smallest x ≡ x0 (mod lcm) with x >= floor
    let x = if x0 >= floor {
        x0
    } else {
        let steps = (&floor - &x0 + &lcm - 1) / &lcm;
        x0 + steps * &lcm
    };
    Some((x.to_biguint().expect("nonnegative"), lcm.to_biguint().expect("positive")))
}

/// Explicit element list when `e` is finite for structural reasons and
/// small enough to list.
pub fn finite_elements(e: &SetExpr) -> Option<Vec<Point>> {
    let list = match e {
        SetExpr::Finite(_, points) => points.clone(),
        SetExpr::Range(a, b) => {
            if b <= a {
                return Some(Vec::new());
            }
            let (a, b) = (a.to_u64()?, b.to_u64()?);
            if b - a > SCAN_BUDGET {
                return None;
            }
            (a..b).map(Point::nat).collect()
        }
        SetExpr::Block(b, k) => {
            let k = k.to_u32().filter(|k| *k <= 4096)?;
            let start = num_traits::pow(b.clone(), k as usize);
            (0..=u64::from(k)).map(|j| Point::Nat(&start + j)).collect()
        }
        SetExpr::Row(m, inner) => finite_elements(inner)?
            .into_iter()
            .map(|p| Point::Pair(m.clone(), p.as_nat().expect("omega").clone()))
            .collect(),
        SetExpr::Grid(a, b) => {
            let a = finite_elements(a)?;
            let b = finite_elements(b)?;
            if a.is_empty() || b.is_empty() {
                return Some(Vec::new());
            }
            if (a.len() as u64).saturating_mul(b.len() as u64) > SCAN_BUDGET {
                return None;
            }
            let mut out = Vec::new();
            for m in &a {
                for k in &b {
                    out.push(Point::Pair(m.as_nat()?.clone(), k.as_nat()?.clone()));
                }
            }
            out
        }
        SetExpr::Union(a, b) => {
            let mut out = finite_elements(a)?;
            out.extend(finite_elements(b)?);
            out
        }
        SetExpr::Inter(a, b) => match (finite_elements(a), finite_elements(b)) {
            (Some(xs), _) => filter_members(xs, b)?,
            (None, Some(ys)) => filter_members(ys, a)?,
            (None, None) => return None,
        },
        SetExpr::Diff(a, b) => {
            let xs = finite_elements(a)?;
            let mut out = Vec::new();
            for p in xs {
                if !contains(b, &p).ok()? {
                    out.push(p);
                }
            }
            out
        }
        SetExpr::Image(f, inner) => {
            let mut out = Vec::new();
            for p in finite_elements(inner)? {
                if let Some(q) = apply(f, &p).ok()? {
                    out.push(q);
                }
            }
            out
        }
        SetExpr::Preimage(f, inner) => {
            let mut out = Vec::new();
            for q in finite_elements(inner)? {
                out.extend(preimage_points(f, &q).ok()?);
            }
            out
        }
        SetExpr::Tag0(inner) | SetExpr::Tag1(inner) => {
            let t = Nat::from(u8::from(matches!(e, SetExpr::Tag1(_))));
            finite_elements(inner)?
                .into_iter()
                .map(|p| Point::Pair(p.as_nat().expect("omega").clone(), t.clone()))
                .collect()
        }
        SetExpr::QBall(_, r) if r.num().is_zero() => Vec::new(),
        _ => return None,
    };
    let mut list = list;
    list.sort();
    list.dedup();
    Some(list)
}

fn filter_members(xs: Vec<Point>, other: &SetExpr) -> Option<Vec<Point>> {
    let mut out = Vec::new();
    for p in xs {
        if contains(other, &p).ok()? {
            out.push(p);
        }
    }
    Some(out)
}

/// Maps with finite fibres, defined at all but finitely many points.
fn finite_to_one(f: &FuncExpr) -> bool {
    match f {
        FuncExpr::Id(_)
        | FuncExpr::PairC0
        | FuncExpr::CellIndex(Partition::Dyadic)
        | FuncExpr::QIndex
        | FuncExpr::Cantor => true,
        FuncExpr::TagJoin(a, b) | FuncExpr::Compose(a, b) => finite_to_one(a) && finite_to_one(b),
        _ => false,
    }
}

/// `Some(true)` when `e` is certainly infinite, `Some(false)` when it is
/// certainly finite, `None` otherwise.
pub fn is_infinite(e: &SetExpr) -> Option<bool> {
    if finite_elements(e).is_some() {
        return Some(false);
    }
    match e {
        SetExpr::Finite(..) | SetExpr::Range(..) | SetExpr::Block(..) => Some(false),
        SetExpr::Ap(..)
        | SetExpr::Evens
        | SetExpr::Odds
        | SetExpr::Squares
        | SetExpr::Powers(_)
        | SetExpr::Blocks(_)
        | SetExpr::Tri
        | SetExpr::QAll => Some(true),
        SetExpr::QBall(_, r) => Some(!r.num().is_zero()),
        SetExpr::Row(_, inner) | SetExpr::Tag0(inner) | SetExpr::Tag1(inner) => is_infinite(inner),
        SetExpr::Grid(a, b) => match (is_infinite(a)?, is_infinite(b)?) {
            (false, false) => Some(false),
            _ => {
                let nonempty = |x: &SetExpr| is_infinite(x) == Some(true) || finite_elements(x).is_some_and(|v| !v.is_empty());
                (nonempty(a) && nonempty(b)).then_some(true)
            }
        },
        SetExpr::Union(a, b) => match (is_infinite(a), is_infinite(b)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        SetExpr::Inter(a, b) => {
            if is_infinite(a) == Some(false) || is_infinite(b) == Some(false) {
                return Some(false);
            }
            if let (Some((a1, d1)), Some((a2, d2))) = (as_ap(a), as_ap(b)) {
                return Some(intersect_aps(&a1, &d1, &a2, &d2).is_some());
            }
            if a == b {
                return is_infinite(a);
            }
            None
        }
        SetExpr::Diff(a, b) => match (is_infinite(a)?, is_infinite(b)) {
            (false, _) => Some(false),
            (true, Some(false)) => Some(true),
            _ => None,
        },
        SetExpr::Image(f, inner) => {
            if finite_to_one(f) {
                return is_infinite(inner);
            }
            // partial maps: infinite only on sets inside their domain
            let base = match f.as_ref() {
                FuncExpr::BlockIndex(b) => b.clone(),
                FuncExpr::CellIndex(Partition::Blocks(b)) => Nat::from(*b),
                _ => return None,
            };
            match inner.as_ref() {
                SetExpr::Blocks(c) if *c == base => Some(true),
                SetExpr::Preimage(g, x) if matches!(g.as_ref(), FuncExpr::BlockIndex(c) if *c == base) => is_infinite(x),
                _ => None,
            }
        }
        SetExpr::Preimage(f, inner) => match f.as_ref() {
            FuncExpr::Id(_) => is_infinite(inner),
            FuncExpr::BlockIndex(_) | FuncExpr::CellIndex(_) | FuncExpr::QIndex | FuncExpr::Cantor => {
                is_infinite(inner)
            }
            _ => None,
        },
    }
}

fn is_full_omega(e: &SetExpr) -> bool {
    matches!(as_ap(e), Some((a, d)) if a.is_zero() && d == Nat::from(1u8))
}

/// Sound local rewrites; the result denotes the same set.
pub fn normalize(e: &SetExpr) -> SetExpr {
    match e {
        SetExpr::Union(a, b) => {
            let (a, b) = (normalize(a), normalize(b));
            if a == b {
                return a;
            }
            if finite_elements(&b).is_some_and(|v| v.is_empty()) {
                return a;
            }
            if finite_elements(&a).is_some_and(|v| v.is_empty()) {
                return b;
            }
            SetExpr::Union(Box::new(a), Box::new(b))
        }
        SetExpr::Inter(a, b) => {
            let (a, b) = (normalize(a), normalize(b));
            if a == b || is_full_omega(&b) {
                return a;
            }
            if is_full_omega(&a) {
                return b;
            }
            if let (Some((a1, d1)), Some((a2, d2))) = (as_ap(&a), as_ap(&b)) {
                return match intersect_aps(&a1, &d1, &a2, &d2) {
                    Some((x, l)) => SetExpr::Ap(x, l),
                    None => SetExpr::empty(Universe::Omega),
                };
            }
            // blocks(b) ∩ pre(blockindex(b), X) = pre(blockindex(b), X)
            for (outer, inner) in [(&a, &b), (&b, &a)] {
                if let (SetExpr::Blocks(base), SetExpr::Preimage(f, _)) = (outer, inner) {
                    if let FuncExpr::BlockIndex(b2) = f.as_ref() {
                        if base == b2 {
                            return inner.clone();
                        }
                    }
                }
            }
            SetExpr::Inter(Box::new(a), Box::new(b))
        }
        SetExpr::Diff(a, b) => {
            let (a, b) = (normalize(a), normalize(b));
            if finite_elements(&b).is_some_and(|v| v.is_empty()) {
                return a;
            }
            SetExpr::Diff(Box::new(a), Box::new(b))
        }
        SetExpr::Grid(a, b) => SetExpr::Grid(Box::new(normalize(a)), Box::new(normalize(b))),
        SetExpr::Row(m, inner) => SetExpr::Row(m.clone(), Box::new(normalize(inner))),
        SetExpr::Tag0(inner) => SetExpr::Tag0(Box::new(normalize(inner))),
        SetExpr::Tag1(inner) => SetExpr::Tag1(Box::new(normalize(inner))),
        SetExpr::Image(f, inner) => {
            let f = f.simplified();
            let inner = normalize(inner);
            match f {
                FuncExpr::Id(_) => inner,
                f => SetExpr::Image(Box::new(f), Box::new(inner)),
            }
        }
        SetExpr::Preimage(f, inner) => {
            let f = f.simplified();
            let inner = normalize(inner);
            match f {
                FuncExpr::Id(_) => inner,
                f => SetExpr::Preimage(Box::new(f), Box::new(inner)),
            }
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setexpr::{parse_set, truncate};

    #[test]
    fn progression_intersection_matches_truncation() {
        for (a1, d1, a2, d2) in [(0u64, 2u64, 1u64, 3u64), (3, 4, 5, 6), (1, 2, 0, 4), (7, 1, 2, 5), (10, 6, 1, 4)] {
            let e = parse_set(&format!("(ap({a1},{d1})&ap({a2},{d2}))")).unwrap();
            let expect = truncate(&e, 200).unwrap().points;
            let got = match intersect_aps(&a1.into(), &d1.into(), &a2.into(), &d2.into()) {
                Some((x, l)) => truncate(&SetExpr::Ap(x, l), 200).unwrap().points,
                None => Vec::new(),
            };
            assert_eq!(got, expect, "ap({a1},{d1}) & ap({a2},{d2})");
        }
    }

    #[test]
    fn finiteness() {
        assert_eq!(is_infinite(&parse_set("(evens\\{2})").unwrap()), Some(true));
        assert_eq!(is_infinite(&parse_set("(evens&odds)").unwrap()), Some(false));
        assert_eq!(is_infinite(&parse_set("row(3,range(0,9))").unwrap()), Some(false));
        assert_eq!(is_infinite(&parse_set("img(blockindex(10),blocks(10))").unwrap()), Some(true));
        assert_eq!(
            finite_elements(&parse_set("(range(0,10)&odds)").unwrap()).unwrap().len(),
            5
        );
    }

    #[test]
    fn normalization_preserves_windows() {
        for text in [
            "(evens&ap(0,1))",
            "(ap(1,3)&ap(0,2))",
            "(blocks(10)&pre(blockindex(10),evens))",
            "img(id,squares)",
            "(odds|{})",
        ] {
            let e = parse_set(text).unwrap();
            let n = normalize(&e);
            assert_eq!(truncate(&e, 2000).unwrap().points, truncate(&n, 2000).unwrap().points, "{text}");
        }
    }
}
