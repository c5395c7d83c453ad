//! Sound, incomplete membership rules. Anything no rule covers comes back
//! `Unknown` with a score series attached.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::scores::{default_schedule, score_series, ScoreSeries};
use super::weights::Weight;
use super::{CellWeights, Ideal, IdealError, IdealHandle, Result};
use crate::point::{Nat, Point, Universe};
use crate::score::{int, Score};
use crate::setexpr::simplify::{as_ap, finite_elements, is_infinite, normalize};
use crate::setexpr::{FuncExpr, Partition, SetExpr};
use crate::vdw::VDW_TWO_COLORS;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub rule: String,
    pub reason: String,
    /// All truncation scores are at most this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Score>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub note: String,
    pub series: ScoreSeries,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    In { certificate: Certificate },
    Positive { certificate: Certificate },
    Unknown { diagnostics: Diagnostics },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::In { .. } => "In",
            Verdict::Positive { .. } => "Positive",
            Verdict::Unknown { .. } => "Unknown",
        }
    }

    pub fn is_in(&self) -> bool {
        matches!(self, Verdict::In { .. })
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Verdict::Positive { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::In { certificate } | Verdict::Positive { certificate } => Some(certificate),
            Verdict::Unknown { .. } => None,
        }
    }

    /// The score bound of an `In` certificate.
    pub fn bound(&self) -> Option<&Score> {
        match self {
            Verdict::In { certificate } => certificate.bound.as_ref(),
            _ => None,
        }
    }
}

/// A decided case, before any score series is attached.
#[derive(Clone, Debug)]
pub(crate) enum Ruled {
    In(Certificate),
    Pos(Certificate),
}

impl Ruled {
    fn is_in(&self) -> bool {
        matches!(self, Ruled::In(_))
    }

    fn bound(&self) -> Option<&BigRational> {
        match self {
            Ruled::In(c) => c.bound.as_ref().map(|b| b.hi()),
            Ruled::Pos(_) => None,
        }
    }
}

fn cert(rule: &str, reason: impl Into<String>, bound: Option<BigRational>) -> Certificate {
    Certificate {
        rule: rule.into(),
        reason: reason.into(),
        bound: bound.map(Score::Exact),
    }
}

fn small(rule: &str, reason: impl Into<String>, bound: Option<BigRational>) -> Option<Ruled> {
    Some(Ruled::In(cert(rule, reason, bound)))
}

fn positive(rule: &str, reason: impl Into<String>) -> Option<Ruled> {
    Some(Ruled::Pos(cert(rule, reason, None)))
}

/// Verdict for `e`; `Unknown` carries scores at the default schedule.
pub fn decide(h: &IdealHandle, e: &SetExpr) -> Result<Verdict> {
    decide_at(h, e, &default_schedule(h.universe()))
}

/// As [`decide`], sampling `Unknown` diagnostics at `schedule`.
pub fn decide_at(h: &IdealHandle, e: &SetExpr, schedule: &[u64]) -> Result<Verdict> {
    h.check_set(e)?;
    if let Some(r) = rule(h, &normalize(e))? {
        return Ok(match r {
            Ruled::In(certificate) => Verdict::In { certificate },
            Ruled::Pos(certificate) => Verdict::Positive { certificate },
        });
    }
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(IdealError::Parameter(
            "diagnostic schedule needs at least 3 strictly increasing cutoffs".into(),
        ));
    }
    Ok(Verdict::Unknown {
        diagnostics: Diagnostics {
            note: "no rule applies; summary scores along the schedule".into(),
            series: score_series(h, e, schedule)?,
        },
    })
}

/// Verdict from the rules alone; `None` where no rule applies.
pub fn certify(h: &IdealHandle, e: &SetExpr) -> Result<Option<Verdict>> {
    h.check_set(e)?;
    Ok(rule(h, &normalize(e))?.map(|r| match r {
        Ruled::In(certificate) => Verdict::In { certificate },
        Ruled::Pos(certificate) => Verdict::Positive { certificate },
    }))
}

pub(crate) fn rule(h: &IdealHandle, e: &SetExpr) -> Result<Option<Ruled>> {
    match &h.ideal {
        Ideal::Restrict(inner, a) => {
            let both = normalize(&SetExpr::inter(e.clone(), a.clone())?);
            return rule(inner, &both);
        }
        Ideal::Dsum(i, j) => return dsum_rule(i, j, e),
        _ => {}
    }
    if let Some(list) = finite_elements(e) {
        return Ok(Some(Ruled::In(finite_certificate(h, &list))));
    }
    if let Some(r) = specific(h, e)? {
        return Ok(Some(r));
    }
    combinators(h, e)
}

fn finite_certificate(h: &IdealHandle, list: &[Point]) -> Certificate {
    let n = list.len() as u64;
    let reason = format!("finite set of {n} point(s)");
    let bound = match &h.ideal {
        Ideal::Fin => Some(int(n)),
        Ideal::Summable(w) => {
            let xs: Vec<u64> = list.iter().filter_map(|p| p.as_u64()).collect();
            if xs.len() == list.len() {
                Some(w.mass(&xs).hi().clone())
            } else {
                Some(int(n))
            }
        }
        Ideal::Vdw | Ideal::EdMinus => Some(int(n)),
        // hitting every child of a level-k interval takes 2^k points
        Ideal::Nwd => Some(int(u64::from(n.checked_ilog2().unwrap_or(0)))),
        Ideal::Density(..) => {
            return cert("finite", format!("{reason}; cells past its maximum are empty, so μ_n = 0 eventually"), None)
        }
        _ => None,
    };
    cert("finite", reason, bound)
}

fn nonempty(e: &SetExpr) -> bool {
    is_infinite(e) == Some(true) || finite_elements(e).is_some_and(|v| !v.is_empty())
}

fn nat_rat(n: &Nat) -> BigRational {
    BigRational::from_integer(n.clone().into())
}

fn specific(h: &IdealHandle, e: &SetExpr) -> Result<Option<Ruled>> {
    Ok(match &h.ideal {
        Ideal::Fin => {
            if is_infinite(e) == Some(true) {
                positive("infinite", "the set is infinite")
            } else {
                None
            }
        }
        Ideal::Summable(w) => summable_rule(w, e),
        Ideal::Vdw => vdw_rule(e),
        Ideal::Density(part, weights) => density_rule(part, weights, e),
        Ideal::EdMinus => edminus_rule(e),
        Ideal::Fin2 => fubini_rule(&IdealHandle::fin(), &IdealHandle::fin(), e)?,
        Ideal::Fubini(i, j) => fubini_rule(i, j, e)?,
        Ideal::Nwd => match e {
            SetExpr::QAll => positive("dense", "every rational of [0,1]; dense in [0,1]"),
            SetExpr::QBall(c, r) if !r.num().is_zero() => {
                positive("dense", format!("all rationals within {r} of {c}; dense in a nondegenerate interval"))
            }
            _ => None,
        },
        Ideal::Dsum(..) | Ideal::Restrict(..) => unreachable!("handled in rule"),
    })
}

fn summable_rule(w: &Weight, e: &SetExpr) -> Option<Ruled> {
    match w {
        Weight::Pow(p) if !p.is_one() => {
            let bound = p / (p - BigRational::one());
            return small(
                "convergent weights",
                format!("Σ_n 1/(n+1)^{p} ≤ 1 + ∫_1^∞ x^-{p} dx = p/(p-1) over all of ω"),
                Some(bound),
            );
        }
        Weight::Geom(r) => {
            let bound = BigRational::one() / (BigRational::one() - r);
            return small("convergent weights", format!("Σ_n ({r})^n = 1/(1-r) over all of ω"), Some(bound));
        }
        _ => {}
    }
    // w diverges: harmonic
    if let Some((a, d)) = as_ap(e) {
        return positive(
            "divergent progression",
            format!("Σ_k 1/({a}+{d}k+1) ≥ (1/({a}+{d})) Σ_k 1/(k+1) diverges"),
        );
    }
    match e {
        SetExpr::Powers(b) => {
            let b = nat_rat(b);
            let bound = &b / (&b - BigRational::one());
            small("geometric mass", format!("Σ_k 1/({b}^k+1) < Σ_k {b}^-k = {bound}"), Some(bound))
        }
        SetExpr::Squares => small(
            "square mass",
            "Σ_k 1/(k^2+1) ≤ 1 + Σ_{k≥1} 1/k^2 ≤ 1 + 2 = 3",
            Some(int(3)),
        ),
        SetExpr::Blocks(_) | SetExpr::Preimage(_, _) if blocks_base(e).is_some() => {
            let b = nat_rat(blocks_base(e)?);
            let bound = (&b * &b) / ((&b - BigRational::one()) * (&b - BigRational::one()));
            small(
                "block mass",
                format!("block n has n+1 points ≥ {b}^n, so the mass is ≤ Σ_n (n+1){b}^-n = {bound}"),
                Some(bound),
            )
        }
        _ => None,
    }
}

/// Base `b` when `e` lies inside `blocks(b)` structurally.
fn blocks_base(e: &SetExpr) -> Option<&Nat> {
    match e {
        SetExpr::Blocks(b) => Some(b),
        SetExpr::Preimage(f, _) => match f.as_ref() {
            FuncExpr::BlockIndex(b) => Some(b),
            _ => None,
        },
        _ => None,
    }
}

fn vdw_rule(e: &SetExpr) -> Option<Ruled> {
    if let Some((a, d)) = as_ap(e) {
        return positive("infinite progression", format!("ap({a},{d}) contains progressions of every length"));
    }
    match e {
        SetExpr::Powers(b) => small(
            "no 3-term progression",
            format!("b^i < b^j < b^k in progression means 1 + b^(k-i) = 2b^(j-i), impossible mod {b}"),
            Some(int(2)),
        ),
        SetExpr::Squares => small("no 4-term progression", "no four distinct squares form a progression", Some(int(3))),
        SetExpr::Blocks(b) => positive(
            "long blocks",
            format!("block {{{b}^n, ..., {b}^n+n}} is a progression of length n+1"),
        ),
        SetExpr::Preimage(f, x) => match (f.as_ref(), is_infinite(x)) {
            (FuncExpr::BlockIndex(b), Some(true)) => positive(
                "long blocks",
                format!("contains block n of base {b} for infinitely many n, a progression of length n+1"),
            ),
            _ => None,
        },
        _ => None,
    }
}

fn density_rule(part: &Partition, weights: &CellWeights, e: &SetExpr) -> Option<Ruled> {
    if *weights != CellWeights::Size {
        return None;
    }
    if let Some((a, d)) = as_ap(e) {
        return positive(
            "progression density",
            format!("a cell of size s holds at least floor(s/{d}) - 1 terms of ap({a},{d}); cell sizes grow, so μ_n ≥ 1/(2·{d}) eventually"),
        );
    }
    let dyadic = *part == Partition::Dyadic;
    match e {
        SetExpr::Powers(b) => small(
            "sparse",
            if dyadic {
                format!("[2^n, 2^(n+1)) holds at most one power of {b}; μ_n ≤ 2^-n → 0")
            } else {
                format!("a cell {{B^n..B^n+n}} holds at most one power of {b}; μ_n ≤ 1/(n+1) → 0")
            },
            None,
        ),
        SetExpr::Squares => small(
            "sparse",
            if dyadic {
                "[2^n, 2^(n+1)) holds at most 2^(n/2) squares; μ_n ≤ 2^(-n/2) → 0".to_string()
            } else {
                "consecutive squares near B^n are 2B^(n/2) apart, so a cell holds at most one; μ_n ≤ 1/(n+1) → 0"
                    .to_string()
            },
            None,
        ),
        _ => match (part, blocks_base(e)) {
            (Partition::Dyadic, Some(b)) => small(
                "sparse",
                format!("|blocks({b}) ∩ [0,N)| ≤ (log_{b} N + 1)^2, so μ_n ≤ (n+2)^2 2^-n → 0"),
                None,
            ),
            (Partition::Blocks(base), Some(b)) if Nat::from(*base) == *b => match e {
                SetExpr::Blocks(_) => positive("full cells", "every cell lies inside the set; μ_n = 1"),
                SetExpr::Preimage(_, x) if is_infinite(x) == Some(true) => {
                    positive("full cells", "infinitely many cells lie inside the set; μ_n = 1 for those n")
                }
                _ => None,
            },
            _ => None,
        },
    }
}

fn edminus_rule(e: &SetExpr) -> Option<Ruled> {
    match e {
        SetExpr::Tri => positive("growing sections", "|A_(n)| = n+1 for every n"),
        SetExpr::Row(m, x) if is_infinite(x) == Some(true) => {
            positive("infinite section", format!("the section at {m} is infinite"))
        }
        SetExpr::Grid(a, b) => match (finite_elements(b), is_infinite(b)) {
            (Some(list), _) => small(
                "bounded sections",
                format!("every section is contained in a set of {} point(s)", list.len()),
                Some(int(list.len() as u64)),
            ),
            (None, Some(true)) if nonempty(a) => positive("infinite section", "sections over the first factor are infinite"),
            _ => None,
        },
        SetExpr::Preimage(f, x) => match f.as_ref() {
            FuncExpr::Proj1 if nonempty(x) => positive("infinite section", "the set contains a full column {m} × ω"),
            FuncExpr::Proj2 => match (finite_elements(x), is_infinite(x)) {
                (Some(list), _) => small(
                    "bounded sections",
                    format!("every section equals a set of {} point(s)", list.len()),
                    Some(int(list.len() as u64)),
                ),
                (None, Some(true)) => positive("infinite section", "every section is infinite"),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// The section rule `A ∈ I ⊗ J` iff `{m : A_(m) ∉ J} ∈ I`.
fn fubini_rule(i: &IdealHandle, j: &IdealHandle, e: &SetExpr) -> Result<Option<Ruled>> {
    let with_outer = |x: &SetExpr, what: &str| -> Result<Option<Ruled>> {
        Ok(match rule(i, x)? {
            Some(Ruled::In(c)) => small("sections", format!("{what}; that set of rows is small: {}", c.reason), None),
            Some(Ruled::Pos(c)) => positive("sections", format!("{what}; that set of rows is positive: {}", c.reason)),
            None => None,
        })
    };
    Ok(match e {
        SetExpr::Tri => small("sections", "every section A_(m) = {0..m} is finite, hence small", None),
        SetExpr::Row(m, _) => small("sections", format!("only the section at {m} can be positive; one row is small"), None),
        SetExpr::Grid(a, b) => match rule(j, b)? {
            Some(Ruled::In(c)) => small("sections", format!("every section lies in {b}, which is small: {}", c.reason), None),
            Some(Ruled::Pos(_)) => with_outer(a, &format!("the positive sections sit over {a}"))?,
            None => None,
        },
        SetExpr::Preimage(f, x) => match f.as_ref() {
            FuncExpr::Proj1 => with_outer(x, &format!("sections over {x} are all of ω"))?,
            FuncExpr::Proj2 => match rule(j, x)? {
                Some(Ruled::In(c)) => small("sections", format!("every section equals {x}, which is small: {}", c.reason), None),
                Some(Ruled::Pos(_)) => positive("sections", format!("every section equals the positive set {x}")),
                None => None,
            },
            _ => None,
        },
        _ => None,
    })
}

/// Splits a tagged set into its `tag0` and `tag1` parts.
pub fn split_tagged(e: &SetExpr) -> Option<(SetExpr, SetExpr)> {
    let empty = || SetExpr::empty(Universe::Omega);
    Some(match e {
        SetExpr::Tag0(x) => ((**x).clone(), empty()),
        SetExpr::Tag1(x) => (empty(), (**x).clone()),
        SetExpr::Finite(_, points) => {
            let mut parts = (Vec::new(), Vec::new());
            for p in points {
                let (n, t) = p.as_pair()?;
                let side = if t.is_zero() { &mut parts.0 } else { &mut parts.1 };
                side.push(Point::Nat(n.clone()));
            }
            (
                SetExpr::finite(Universe::Omega, parts.0).ok()?,
                SetExpr::finite(Universe::Omega, parts.1).ok()?,
            )
        }
        SetExpr::Union(a, b) | SetExpr::Inter(a, b) | SetExpr::Diff(a, b) => {
            let ((a0, a1), (b0, b1)) = (split_tagged(a)?, split_tagged(b)?);
            let op = |x: SetExpr, y: SetExpr| match e {
                SetExpr::Union(..) => SetExpr::union(x, y),
                SetExpr::Inter(..) => SetExpr::inter(x, y),
                _ => SetExpr::diff(x, y),
            };
            (op(a0, b0).ok()?, op(a1, b1).ok()?)
        }
        SetExpr::Image(f, x) if **f == FuncExpr::PairC0 => ((**x).clone(), empty()),
        SetExpr::Preimage(f, x) => match f.as_ref() {
            FuncExpr::TagJoin(g0, g1) => (
                SetExpr::preimage((**g0).clone(), (**x).clone()).ok()?,
                SetExpr::preimage((**g1).clone(), (**x).clone()).ok()?,
            ),
            _ => return None,
        },
        _ => return None,
    })
}

fn dsum_rule(i: &IdealHandle, j: &IdealHandle, e: &SetExpr) -> Result<Option<Ruled>> {
    if let Some(list) = finite_elements(e) {
        let bound = int(list.len() as u64);
        return Ok(small("finite", format!("finite set of {} point(s)", list.len()), Some(bound)));
    }
    let Some((a, b)) = split_tagged(e) else {
        return Ok(None);
    };
    let (ra, rb) = (rule(i, &normalize(&a))?, rule(j, &normalize(&b))?);
    Ok(match (&ra, &rb) {
        (Some(Ruled::Pos(c)), _) => positive("left part", format!("the tag0 part {a} is positive: {}", c.reason)),
        (_, Some(Ruled::Pos(c))) => positive("right part", format!("the tag1 part {b} is positive: {}", c.reason)),
        (Some(Ruled::In(ca)), Some(Ruled::In(cb))) => {
            let bound = match (ra.as_ref().and_then(Ruled::bound), rb.as_ref().and_then(Ruled::bound)) {
                (Some(x), Some(y)) => Some(x.max(y).clone()),
                _ => None,
            };
            small("both parts", format!("tag0 part: {}; tag1 part: {}", ca.reason, cb.reason), bound)
        }
        _ => None,
    })
}

/// Bound for a union of two small sets, when the ideal admits one.
fn union_bound(h: &IdealHandle, a: Option<&BigRational>, b: Option<&BigRational>) -> Option<Option<BigRational>> {
    match &h.ideal {
        Ideal::Fin | Ideal::Summable(_) | Ideal::EdMinus => Some(Some(a? + b?)),
        Ideal::Vdw => {
            // an AP of length W(k+1; 2) split in two has a monochromatic (k+1)-AP
            let k = a?.clone().max(b?.clone());
            let k: usize = k.to_integer().try_into().ok()?;
            if k == 0 {
                return Some(Some(BigRational::zero()));
            }
            let w = *VDW_TWO_COLORS.get(k + 1)?;
            Some(Some(int(w - 1)))
        }
        Ideal::Nwd => None,
        _ => Some(None),
    }
}

fn combinators(h: &IdealHandle, e: &SetExpr) -> Result<Option<Ruled>> {
    Ok(match e {
        SetExpr::Union(a, b) => {
            let (ra, rb) = (rule(h, a)?, rule(h, b)?);
            match (&ra, &rb) {
                (Some(Ruled::Pos(c)), _) | (_, Some(Ruled::Pos(c))) => {
                    positive("union", format!("a branch is positive: {}", c.reason))
                }
                (Some(x), Some(y)) if x.is_in() && y.is_in() => match union_bound(h, x.bound(), y.bound()) {
                    Some(bound) => small("union", "both branches are small", bound),
                    None => None,
                },
                _ => None,
            }
        }
        SetExpr::Inter(a, b) => {
            let (ra, rb) = (rule(h, a)?, rule(h, b)?);
            match (ra, rb) {
                (Some(Ruled::In(c)), _) | (_, Some(Ruled::In(c))) => small(
                    "subset",
                    format!("contained in a small set: {}", c.reason),
                    c.bound.map(|b| b.hi().clone()),
                ),
                _ => None,
            }
        }
        SetExpr::Diff(a, b) => match rule(h, a)? {
            Some(Ruled::In(c)) => small(
                "subset",
                format!("contained in a small set: {}", c.reason),
                c.bound.map(|b| b.hi().clone()),
            ),
            Some(Ruled::Pos(c)) => match rule(h, b)? {
                Some(r) if r.is_in() => positive("difference", format!("positive minus small stays positive: {}", c.reason)),
                _ => None,
            },
            None => None,
        },
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::make_ideal;
    use crate::score::rat;
    use crate::setexpr::parse_set;

    fn verdict(ideal: &str, set: &str) -> Verdict {
        decide(&make_ideal(ideal).unwrap(), &parse_set(set).unwrap()).unwrap()
    }

    #[test]
    fn documented_verdicts() {
        assert!(verdict("vdw", "ap(0,2)").is_positive());
        let v = verdict("summable(harmonic)", "powers(2)");
        assert!(v.is_in());
        assert_eq!(v.bound(), Some(&Score::Exact(rat(2, 1))));
        assert!(verdict("fin2", "tri").is_in());
        assert!(verdict("density", "blocks(10)").is_in());
        assert!(verdict("dsum(vdw,fin)", "tag0(ap(0,1))").is_positive());
    }

    #[test]
    fn structural_rules() {
        assert!(verdict("fin", "(evens\\{0})").is_positive());
        assert!(verdict("fin", "(evens&odds)").is_in());
        assert!(verdict("vdw", "(powers(2)|squares)").is_in());
        assert_eq!(verdict("vdw", "(powers(2)|squares)").bound(), Some(&Score::from(34)));
        assert!(verdict("vdw", "(squares|blocks(10))").is_positive());
        assert!(verdict("edminus", "tri").is_positive());
        assert!(verdict("edminus", "grid(evens,{1,2})").is_in());
        assert!(verdict("edminus", "row(3,odds)").is_positive());
        assert!(verdict("fin2", "grid(evens,odds)").is_positive());
        assert!(verdict("fubini(fin,fin)", "grid(evens,odds)").is_positive());
        assert!(verdict("fin2", "grid({1,2},odds)").is_in());
        assert!(verdict("nwd", "qball(1/2,1/4)").is_positive());
        assert!(verdict("nwd", "{1/2,1/3}").is_in());
        assert!(verdict("density", "ap(1,3)").is_positive());
        assert!(verdict("summable(harmonic)", "squares").is_in());
        assert!(verdict("restrict(vdw,blocks(10))", "pre(blockindex(10),evens)").is_positive());
        assert!(verdict("dsum(vdw,fin)", "(tag0(powers(2))|tag1({1}))").is_in());
        assert!(verdict("dsum(vdw,fin)", "(tag0(powers(2))|tag1(odds))").is_positive());
    }

    #[test]
    fn unknown_carries_a_series() {
        let v = verdict("summable(harmonic)", "img(mod(7),evens)");
        match v {
            Verdict::Unknown { diagnostics } => assert!(diagnostics.series.samples.len() >= 3),
            other => panic!("expected Unknown, got {other:?}"),
        }
    }
}
