//! Exact finite windows of set expressions.
//!
//! Primitive sets are enumerated directly over machine integers; set
//! operations merge sorted lists. Images and preimages fall back to
//! pointwise evaluation over the window.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::eval::{apply, contains, in_qball};
use super::{FuncExpr, Result, SetExpr, SetExprError};
use crate::point::{in_window, qunit_index, qunit_prefix, window, Nat, Point, Universe, SCAN_BUDGET};

/// The finite set `expr ∩ window(N)`, sorted canonically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationView {
    pub universe: Universe,
    pub cutoff: u64,
    #[serde(serialize_with = "points_as_strings")]
    pub points: Vec<Point>,
    /// False when an image through a function without bounded fibres was
    /// approximated by mapping the truncated argument.
    pub exact: bool,
}

fn points_as_strings<S: serde::Serializer>(points: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(|p| p.to_string()))
}

impl TruncationView {
    pub fn new(universe: Universe, cutoff: u64, mut points: Vec<Point>) -> Result<TruncationView> {
        for p in &points {
            p.check(universe)?;
        }
        points.sort();
        points.dedup();
        Ok(TruncationView { universe, cutoff, points, exact: true })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// The points as machine integers; only meaningful on `Omega`.
    pub fn nats(&self) -> Result<Vec<u64>> {
        self.points
            .iter()
            .map(|p| {
                p.as_u64().ok_or_else(|| SetExprError::UniverseMismatch {
                    context: format!("point {p}"),
                    expected: Universe::Omega,
                    found: p.natural_universe(),
                })
            })
            .collect()
    }

    /// The points as pairs of machine integers (`OmegaSq`, `OmegaTagged`).
    pub fn pairs(&self) -> Result<Vec<(u64, u64)>> {
        self.points
            .iter()
            .map(|p| {
                p.as_pair()
                    .and_then(|(a, b)| Some((a.to_u64()?, b.to_u64()?)))
                    .ok_or_else(|| SetExprError::UniverseMismatch {
                        context: format!("point {p}"),
                        expected: Universe::OmegaSq,
                        found: p.natural_universe(),
                    })
            })
            .collect()
    }

    /// Enumeration indices of the points (`QUnit`).
    pub fn qindices(&self) -> Result<Vec<u64>> {
        self.points
            .iter()
            .map(|p| match p {
                Point::Frac(q) => Ok(qunit_index(q)?.to_u64().expect("index below cutoff")),
                other => Err(SetExprError::UniverseMismatch {
                    context: format!("point {other}"),
                    expected: Universe::QUnit,
                    found: other.natural_universe(),
                }),
            })
            .collect()
    }

    pub fn is_subset(&self, other: &TruncationView) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }
}

/// Machine-integer form of a window, used internally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Raw {
    Nat(Vec<u64>),
    Pair(Vec<(u64, u64)>),
    /// Enumeration indices of rationals.
    Q(Vec<u64>),
}

impl Raw {
    fn empty(u: Universe) -> Raw {
        match u {
            Universe::Omega => Raw::Nat(Vec::new()),
            Universe::OmegaSq | Universe::OmegaTagged => Raw::Pair(Vec::new()),
            Universe::QUnit => Raw::Q(Vec::new()),
        }
    }

    fn into_nats(self) -> Vec<u64> {
        match self {
            Raw::Nat(v) => v,
            _ => unreachable!("universe checked at construction"),
        }
    }

    fn into_pairs(self) -> Vec<(u64, u64)> {
        match self {
            Raw::Pair(v) => v,
            _ => unreachable!("universe checked at construction"),
        }
    }

    fn into_points(self, n: u64) -> Vec<Point> {
        match self {
            Raw::Nat(v) => v.into_iter().map(Point::nat).collect(),
            Raw::Pair(v) => v.into_iter().map(|(a, b)| Point::pair(a, b)).collect(),
            Raw::Q(v) => {
                let table = qunit_prefix(n);
                v.into_iter()
                    .map(|i| {
                        let (p, q) = table[i as usize];
                        Point::frac(p, q)
                    })
                    .collect()
            }
        }
    }

    fn from_points(u: Universe, points: impl IntoIterator<Item = Point>) -> Result<Raw> {
        let mut raw = Raw::empty(u);
        for p in points {
            match (&mut raw, &p) {
                (Raw::Nat(v), Point::Nat(k)) => v.push(k.to_u64().expect("inside window")),
                (Raw::Pair(v), Point::Pair(a, b)) => {
                    v.push((a.to_u64().expect("inside window"), b.to_u64().expect("inside window")))
                }
                (Raw::Q(v), Point::Frac(q)) => v.push(qunit_index(q)?.to_u64().expect("inside window")),
                _ => p.check(u).map(|_| ())?,
            }
        }
        Ok(raw)
    }
}

fn merge<T: Ord + Copy>(a: &[T], b: &[T], keep: (bool, bool, bool)) -> Vec<T> {
    // keep = (only in a, in both, only in b)
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.cmp(y),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                if keep.0 {
                    out.push(a[i]);
                }
                i += 1;
            }
            std::cmp::Ordering::Equal => {
                if keep.1 {
                    out.push(a[i]);
                }
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Greater => {
                if keep.2 {
                    out.push(b[j]);
                }
                j += 1;
            }
        }
    }
    out
}

fn combine(a: Raw, b: Raw, keep: (bool, bool, bool)) -> Raw {
    match (a, b) {
        (Raw::Nat(x), Raw::Nat(y)) => Raw::Nat(merge(&x, &y, keep)),
        (Raw::Pair(x), Raw::Pair(y)) => Raw::Pair(merge(&x, &y, keep)),
        (Raw::Q(x), Raw::Q(y)) => Raw::Q(merge(&x, &y, keep)),
        _ => unreachable!("universes checked at construction"),
    }
}

/// `n` as a `u64` capped at `cap`.
fn capped(n: &Nat, cap: u64) -> u64 {
    n.to_u64().map_or(cap, |v| v.min(cap))
}

fn blocks_below(b: u64, n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut start = 1u64;
    let mut k = 0u64;
    while start < n {
        for x in start..=start.saturating_add(k) {
            if x >= n {
                break;
            }
            out.push(x);
        }
        // Successive blocks never overlap once b >= 2: b^(k+1) >= 2b^k > b^k + k.
        start = match start.checked_mul(b) {
            Some(s) => s,
            None => break,
        };
        k += 1;
    }
    out.dedup();
    out
}

fn qball_indices(c: &crate::point::Frac, r: &crate::point::Frac, n: u64) -> Vec<u64> {
    let small = |x: &Nat| x.to_u64().filter(|v| *v <= u64::from(u32::MAX));
    let table = qunit_prefix(n);
    if let (Some(cn), Some(cd), Some(rn), Some(rd)) = (small(c.num()), small(c.den()), small(r.num()), small(r.den())) {
        // |p/q - cn/cd| < rn/rd  <=>  |p*cd - cn*q| * rd < rn * q * cd
        let (cn, cd, rn, rd) = (cn as i128, cd as i128, rn as i128, rd as i128);
        return table
            .iter()
            .enumerate()
            .filter(|(_, (p, q))| {
                let (p, q) = (*p as i128, *q as i128);
                (p * cd - cn * q).abs() * rd < rn * q * cd
            })
            .map(|(i, _)| i as u64)
            .collect();
    }
    let (c, r) = (c.to_rational(), r.to_rational());
    table
        .iter()
        .enumerate()
        .filter(|(_, (p, q))| {
            let x = num_rational::BigRational::new((*p).into(), (*q).into());
            in_qball(&x, &c, &r)
        })
        .map(|(i, _)| i as u64)
        .collect()
}

/// Whether every fibre of `f` is finite and listable.
pub(crate) fn bounded_fibres(f: &FuncExpr) -> bool {
    match f {
        FuncExpr::Proj1 | FuncExpr::Proj2 | FuncExpr::Mod(_) | FuncExpr::Table(..) => false,
        FuncExpr::TagJoin(a, b) | FuncExpr::Compose(a, b) => bounded_fibres(a) && bounded_fibres(b),
        _ => true,
    }
}

pub(crate) fn raw(e: &SetExpr, n: u64, exact: &mut bool) -> Result<Raw> {
    Ok(match e {
        SetExpr::Finite(u, points) => {
            let mut inside = Vec::new();
            for p in points {
                if in_window(*u, p, n)? {
                    inside.push(p.clone());
                }
            }
            let mut r = Raw::from_points(*u, inside)?;
            if let Raw::Q(v) = &mut r {
                v.sort_unstable();
            }
            r
        }
        SetExpr::Range(a, b) => {
            let (a, b) = (capped(a, n), capped(b, n));
            Raw::Nat((a..b.max(a)).collect())
        }
        SetExpr::Ap(a, d) => {
            let a = capped(a, n);
            let d = capped(d, n.max(1));
            Raw::Nat((a..n).step_by(d as usize).collect())
        }
        SetExpr::Evens => Raw::Nat((0..n).step_by(2).collect()),
        SetExpr::Odds => Raw::Nat((1..n).step_by(2).collect()),
        SetExpr::Squares => Raw::Nat((0..).map(|k: u64| k * k).take_while(|s| *s < n).collect()),
        SetExpr::Powers(b) => {
            let b = capped(b, n.max(2));
            let mut out = Vec::new();
            let mut x = 1u64;
            while x < n {
                out.push(x);
                x = match x.checked_mul(b) {
                    Some(v) => v,
                    None => break,
                };
            }
            Raw::Nat(out)
        }
        SetExpr::Blocks(b) => Raw::Nat(blocks_below(capped(b, n.max(2)), n)),
        SetExpr::Block(b, k) => {
            let b = capped(b, n.max(2));
            let start = k.to_u32().and_then(|k| b.checked_pow(k));
            match (start, k.to_u64()) {
                (Some(s), Some(k)) if s < n => Raw::Nat((s..=s.saturating_add(k)).take_while(|x| *x < n).collect()),
                _ => Raw::Nat(Vec::new()),
            }
        }
        SetExpr::Tri => Raw::Pair((0..n).flat_map(|m| (0..=m).map(move |k| (m, k))).collect()),
        SetExpr::Grid(a, b) => {
            let a = raw(a, n, exact)?.into_nats();
            let b = raw(b, n, exact)?.into_nats();
            Raw::Pair(a.iter().flat_map(|m| b.iter().map(move |k| (*m, *k))).collect())
        }
        SetExpr::Row(m, e) => match m.to_u64().filter(|m| *m < n) {
            Some(m) => Raw::Pair(raw(e, n, exact)?.into_nats().into_iter().map(|k| (m, k)).collect()),
            None => Raw::Pair(Vec::new()),
        },
        SetExpr::Union(a, b) => combine(raw(a, n, exact)?, raw(b, n, exact)?, (true, true, true)),
        SetExpr::Inter(a, b) => combine(raw(a, n, exact)?, raw(b, n, exact)?, (false, true, false)),
        SetExpr::Diff(a, b) => combine(raw(a, n, exact)?, raw(b, n, exact)?, (true, false, false)),
        SetExpr::Tag0(inner) => Raw::Pair(raw(inner, n, exact)?.into_nats().into_iter().map(|k| (k, 0)).collect()),
        SetExpr::Tag1(inner) => Raw::Pair(raw(inner, n, exact)?.into_nats().into_iter().map(|k| (k, 1)).collect()),
        SetExpr::QAll => Raw::Q((0..n).collect()),
        SetExpr::QBall(c, r) => Raw::Q(qball_indices(c, r, n)),
        SetExpr::Image(f, inner) => image_raw(f, inner, n, exact)?,
        SetExpr::Preimage(f, inner) => {
            if let FuncExpr::Id(_) = f.as_ref() {
                return raw(inner, n, exact);
            }
            let u = f.domain();
            let mut out = Vec::new();
            let mut seen: HashMap<Point, bool> = HashMap::new();
            for p in window(u, n) {
                if let Some(q) = apply(f, &p)? {
                    let inside = match seen.get(&q) {
                        Some(&b) => b,
                        None => {
                            let b = contains(inner, &q)?;
                            seen.insert(q, b);
                            b
                        }
                    };
                    if inside {
                        out.push(p);
                    }
                }
            }
            Raw::from_points(u, out)?
        }
    })
}

fn image_raw(f: &FuncExpr, inner: &SetExpr, n: u64, exact: &mut bool) -> Result<Raw> {
    let u = f.codomain();
    if let FuncExpr::Id(_) = f {
        return raw(inner, n, exact);
    }
    if bounded_fibres(f) {
        match image_by_fibres(f, inner, n) {
            Ok(points) => return Raw::from_points(u, points),
            Err(SetExprError::Budget(_)) | Err(SetExprError::Undecidable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    *exact = false;
    let arg = raw(inner, n, exact)?.into_points(n);
    let mut out = Vec::new();
    for p in &arg {
        if let Some(q) = apply(f, p)? {
            if in_window(u, &q, n)? {
                out.push(q);
            }
        }
    }
    out.sort();
    out.dedup();
    Raw::from_points(u, out)
}

/// Exact image window: a codomain point is kept when some point of its
/// (finite) fibre lies in the argument set.
fn image_by_fibres(f: &FuncExpr, inner: &SetExpr, n: u64) -> Result<Vec<Point>> {
    let mut work = 0u64;
    let mut out = Vec::new();
    // largest fibres first, so an over-budget window fails early
    for q in window(f.codomain(), n).into_iter().rev() {
        for p in super::eval::preimage_points(f, &q)? {
            work += 1;
            if work > SCAN_BUDGET {
                return Err(SetExprError::Budget(format!("image of {f} below {n}")));
            }
            if contains(inner, &p)? {
                out.push(q.clone());
                break;
            }
        }
    }
    out.reverse();
    Ok(out)
}

pub(crate) fn truncate_nats(e: &SetExpr, n: u64) -> Result<Vec<u64>> {
    if e.universe() != Universe::Omega {
        return Err(SetExprError::UniverseMismatch {
            context: "truncation".into(),
            expected: Universe::Omega,
            found: e.universe(),
        });
    }
    Ok(raw(e, n, &mut true)?.into_nats())
}

pub(crate) fn truncate_pairs(e: &SetExpr, n: u64) -> Result<Vec<(u64, u64)>> {
    if !matches!(e.universe(), Universe::OmegaSq | Universe::OmegaTagged) {
        return Err(SetExprError::UniverseMismatch {
            context: "truncation".into(),
            expected: Universe::OmegaSq,
            found: e.universe(),
        });
    }
    Ok(raw(e, n, &mut true)?.into_pairs())
}

pub fn truncate(e: &SetExpr, n: u64) -> Result<TruncationView> {
    let mut exact = true;
    let points = raw(e, n, &mut exact)?.into_points(n);
    Ok(TruncationView {
        universe: e.universe(),
        cutoff: n,
        points,
        exact,
    })
}

/// Sorted, deduplicated values of `f` on the points of `v`.
pub fn image(f: &FuncExpr, v: &TruncationView) -> Result<TruncationView> {
    let mut out = Vec::new();
    for p in &v.points {
        if let Some(q) = apply(f, p)? {
            out.push(q);
        }
    }
    out.sort();
    out.dedup();
    Ok(TruncationView {
        universe: f.codomain(),
        cutoff: v.cutoff,
        points: out,
        exact: v.exact,
    })
}

/// Points of `v` that `f` maps into `e`.
pub fn preimage(f: &FuncExpr, e: &SetExpr, v: &TruncationView) -> Result<TruncationView> {
    if f.codomain() != e.universe() {
        return Err(SetExprError::UniverseMismatch {
            context: "preimage".into(),
            expected: f.codomain(),
            found: e.universe(),
        });
    }
    let mut out = Vec::new();
    for p in &v.points {
        if let Some(q) = apply(f, p)? {
            if contains(e, &q)? {
                out.push(p.clone());
            }
        }
    }
    Ok(TruncationView {
        universe: v.universe,
        cutoff: v.cutoff,
        points: out,
        exact: v.exact,
    })
}
