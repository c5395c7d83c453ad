//! Constructions showing that a given function is not a witness for
//! `Fin ≤_BW J`, for `J` the harmonic summable ideal, `ED₋` or `nwd`.
//! Every construction works on one truncation and says so.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{ReductionError, Result};
use crate::ideals::{nwd_score, Weight};
use crate::point::{qunit_prefix, Point, Universe};
use crate::score::{int, Score};
use crate::setexpr::{apply, FuncExpr};

/// A fibre whose harmonic mass certainly exceeds this is taken as positive.
pub const POSITIVITY_TARGET: u64 = 10;

/// Dyadic intervals visited by the nowhere-dense construction by default.
pub const NWD_INTERVALS: usize = 64;

/// Fixed-point bits for certified lower sums of `1/(i+1)`.
const LOWER_BITS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// A single fibre is already positive.
    Fiber,
    Case1,
    Case2,
    /// The cutoff is too small to tell the cases apart.
    Unknown,
    /// The greedy distinct-value construction.
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberChoice {
    pub value: u64,
    pub size: u64,
    pub score: Score,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Case1 {
    /// `c_0 < c_1 < ...` in choice order.
    pub c: Vec<u64>,
    /// `p_{c_n}`, each at most `2^-n`.
    pub masses: Vec<Score>,
    /// Mass of `f⁻¹[C]`.
    pub total: Score,
    /// Whether the greedy run reached `floor(log2 N)` terms.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Case2Row {
    pub n: u64,
    pub z: u64,
    pub r: Score,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Case2 {
    /// Threshold `p`: every chosen fibre has mass above it.
    pub p: Score,
    pub k: u64,
    pub z_count: u64,
    pub rows: Vec<Case2Row>,
    pub a_size: u64,
    /// Mass of `A`, at least `Σ_{k<=n<|Z|} 1/(n+1)`.
    pub a_mass: Score,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SummableEvidence {
    pub fibers: u64,
    pub undefined: u64,
    pub heaviest: Option<FiberChoice>,
    pub case1: Option<Case1>,
    pub case2: Option<Case2>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bundle {
    pub row: u64,
    pub columns: Vec<u64>,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdminusEvidence {
    pub undefined: u64,
    pub fiber: Option<FiberChoice>,
    pub bundles: Vec<Bundle>,
    pub skipped_rows: Vec<u64>,
    pub distinct: bool,
    /// `|(A ∩ f⁻¹[C])_(n)|` for every retained row.
    pub response_sections: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NwdPick {
    pub interval: String,
    pub x: String,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NwdEvidence {
    pub undefined: u64,
    pub fiber: Option<FiberChoice>,
    pub picks: Vec<NwdPick>,
    /// `(level, nwd score of A at resolution 2^level)`.
    pub a_scores: Vec<(u32, u64)>,
    /// Nested intervals of the responder, as `[lo, hi]`.
    pub nest: Vec<String>,
    /// `(level, nwd score of A ∩ f⁻¹[C])`.
    pub response_scores: Vec<(u32, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "ideal", rename_all = "snake_case")]
pub enum Evidence {
    Summable(SummableEvidence),
    Edminus(EdminusEvidence),
    Nwd(NwdEvidence),
}

/// What the responder needs to answer a challenge `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Responder {
    /// `value -> largest n with mass ≤ 2^-n` (negative: above 1).
    Levels(BTreeMap<u64, i64>),
    Bundles(Vec<Vec<u64>>),
    /// `(x as (num, den), f(x))` in pick order.
    Points(Vec<((u64, u64), u64)>),
    Nothing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefuterOutput {
    pub version: &'static str,
    pub construction: &'static str,
    pub function: String,
    pub cutoff: u64,
    pub case: CaseTag,
    /// The construction only looks at the cutoff window.
    pub truncation_relative: bool,
    /// Description of the positive set `A`.
    #[serde(rename = "A")]
    pub a: String,
    /// `f[A]` on the window, the default challenge.
    #[serde(rename = "B")]
    pub b: Vec<u64>,
    /// Response to the default challenge.
    #[serde(rename = "C")]
    pub c: Vec<u64>,
    pub evidence: Evidence,
    #[serde(skip)]
    responder: Responder,
}

impl RefuterOutput {
    /// A `C ⊆ b` with `A ∩ f⁻¹[C]` small, chosen deterministically.
    pub fn respond(&self, b: &[u64]) -> Vec<u64> {
        match &self.responder {
            Responder::Levels(levels) => greedy_levels(levels, b),
            Responder::Bundles(bundles) => {
                let b: BTreeSet<u64> = b.iter().copied().collect();
                bundles.iter().filter_map(|v| v.iter().find(|x| b.contains(x)).copied()).collect()
            }
            Responder::Points(points) => {
                let b: BTreeSet<u64> = b.iter().copied().collect();
                let d: Vec<((u64, u64), u64)> = points.iter().filter(|(_, v)| b.contains(v)).copied().collect();
                let (picked, _) = bisect(&d);
                let mut c: Vec<u64> = picked.iter().map(|i| d[*i].1).collect();
                c.sort_unstable();
                c
            }
            Responder::Nothing => Vec::new(),
        }
    }
}

fn value_u64(p: &Point) -> Result<u64> {
    p.as_u64()
        .ok_or_else(|| ReductionError::Parameter(format!("value {p} is not a natural below 2^64")))
}

fn check_func(f: &FuncExpr, domain: Universe) -> Result<()> {
    if f.domain() != domain || f.codomain() != Universe::Omega {
        return Err(ReductionError::Parameter(format!(
            "need a function {} -> omega, got {} -> {}",
            domain.name(),
            f.domain().name(),
            f.codomain().name()
        )));
    }
    Ok(())
}

/// Largest `n` with `s ≤ 2^-n` for certain; `-1` when `s` may exceed 1.
fn level(s: &Score) -> i64 {
    let hi = s.hi();
    if hi.is_zero() {
        return i64::MAX;
    }
    let q: BigInt = hi.denom() / hi.numer();
    if q.is_zero() {
        -1
    } else {
        q.bits() as i64 - 1
    }
}

/// `c_n` = least unused value of `b` with level at least `n`, for
/// `n = 0, 1, ...` until none is left.
fn greedy_levels(levels: &BTreeMap<u64, i64>, b: &[u64]) -> Vec<u64> {
    let mut pool: Vec<u64> = b.iter().copied().filter(|v| levels.contains_key(v)).collect();
    pool.sort_unstable();
    pool.dedup();
    let mut used = vec![false; pool.len()];
    let mut out = Vec::new();
    for n in 0i64.. {
        let Some(i) = (0..pool.len()).find(|&i| !used[i] && levels[&pool[i]] >= n) else {
            break;
        };
        used[i] = true;
        out.push(pool[i]);
    }
    out
}

fn two_pow_neg(j: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << j)
}

/// Fibres `S_n = f⁻¹[{n}] ∩ [0, N)` of the harmonic-summable refuter.
pub fn refute_summable(f: &FuncExpr, n: u64) -> Result<RefuterOutput> {
    check_func(f, Universe::Omega)?;
    if n < 2 {
        return Err(ReductionError::Parameter("cutoff must be at least 2".into()));
    }
    let mut fibers: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut undefined = 0u64;
    for i in 0..n {
        match apply(f, &Point::nat(i))? {
            Some(v) => fibers.entry(value_u64(&v)?).or_default().push(i),
            None => undefined += 1,
        }
    }
    let w = Weight::Harmonic;
    let masses: BTreeMap<u64, Score> = fibers.iter().map(|(v, s)| (*v, w.mass(s))).collect();
    let heaviest = masses
        .iter()
        .max_by(|a, b| a.1.lo().cmp(b.1.lo()).then(b.0.cmp(a.0)))
        .map(|(v, s)| FiberChoice { value: *v, size: fibers[v].len() as u64, score: s.clone() });
    let mut out = RefuterOutput {
        version: crate::SCHEMA_VERSION,
        construction: "refute_summable",
        function: f.to_string(),
        cutoff: n,
        case: CaseTag::Unknown,
        truncation_relative: true,
        a: String::new(),
        b: Vec::new(),
        c: Vec::new(),
        evidence: Evidence::Summable(SummableEvidence {
            fibers: fibers.len() as u64,
            undefined,
            heaviest: heaviest.clone(),
            case1: None,
            case2: None,
        }),
        responder: Responder::Nothing,
    };

    if let Some(h) = heaviest.as_ref().filter(|h| h.score.certainly_gt(&int(POSITIVITY_TARGET))) {
        out.case = CaseTag::Fiber;
        out.a = format!("pre({f},{{{}}})", h.value);
        out.b = vec![h.value];
        return Ok(out);
    }

    // Case 1: values with p_c ≤ 2^-n for n < floor(log2 N)
    let steps = i64::from(63 - n.leading_zeros());
    let levels: BTreeMap<u64, i64> = masses.iter().map(|(v, s)| (*v, level(s))).collect();
    let all: Vec<u64> = levels.keys().copied().collect();
    let mut c = greedy_levels(&levels, &all);
    c.truncate(steps as usize);
    let picked: Vec<Score> = c.iter().map(|v| masses[v].clone()).collect();
    let total = picked.iter().fold(Score::zero(), |acc, s| acc.add(s));
    let case1 = Case1 { complete: c.len() as i64 == steps, c: c.clone(), masses: picked, total };
    let Evidence::Summable(ev) = &mut out.evidence else { unreachable!() };
    let complete = case1.complete;
    ev.case1 = Some(case1);
    if complete {
        out.case = CaseTag::Case1;
        out.a = format!("[0,{n})");
        out.b = all;
        out.c = c;
        out.responder = Responder::Levels(levels);
        return Ok(out);
    }

    // Case 2: Z = {z : p_z > 2^-j} with |Z| > 2^j + 2, k = 2^j
    let mut chosen = None;
    for j in 1..62u32 {
        let p = two_pow_neg(j);
        let z: Vec<u64> = masses.iter().filter(|(_, s)| s.certainly_gt(&p)).map(|(v, _)| *v).collect();
        let k = 1u64 << j;
        if z.len() as u64 > k + 2 {
            chosen = Some((j, z));
            break;
        }
        if (k as usize) > masses.len() {
            break;
        }
    }
    let Some((j, z)) = chosen else {
        return Ok(out);
    };
    let k = 1u64 << j;
    let mut rows = Vec::new();
    let mut a_points: Vec<u64> = Vec::new();
    let mut r_levels = BTreeMap::new();
    for (idx, &zn) in z.iter().enumerate().skip(k as usize) {
        let idx = idx as u64;
        let need = ((1u128 << LOWER_BITS) + u128::from(idx)) / (u128::from(idx) + 1);
        let mut acc = 0u128;
        let mut taken = Vec::new();
        for &i in fibers[&zn].iter().rev() {
            if acc >= need {
                break;
            }
            acc += (1u128 << LOWER_BITS) / (u128::from(i) + 1);
            taken.push(i);
        }
        taken.sort_unstable();
        let r = w.mass(&taken);
        r_levels.insert(zn, level(&r));
        rows.push(Case2Row { n: idx, z: zn, r });
        a_points.extend(taken);
    }
    a_points.sort_unstable();
    let a_mass = w.mass(&a_points);
    let b: Vec<u64> = rows.iter().map(|r| r.z).collect();
    out.case = CaseTag::Case2;
    out.a = format!("explicit subset of the fibres of z_n, n >= {k} ({} points)", a_points.len());
    out.c = greedy_levels(&r_levels, &b);
    out.b = b;
    out.responder = Responder::Levels(r_levels);
    let Evidence::Summable(ev) = &mut out.evidence else { unreachable!() };
    ev.case2 = Some(Case2 {
        p: Score::Exact(two_pow_neg(j)),
        k,
        z_count: z.len() as u64,
        rows,
        a_size: a_points.len() as u64,
        a_mass,
    });
    Ok(out)
}

/// Greedy distinct-value construction on the `N × N` square.
pub fn refute_edminus(f: &FuncExpr, n: u64) -> Result<RefuterOutput> {
    check_func(f, Universe::OmegaSq)?;
    if n < 2 {
        return Err(ReductionError::Parameter("cutoff must be at least 2".into()));
    }
    let side = n as usize;
    let mut table: Vec<Option<u64>> = Vec::with_capacity(side * side);
    let mut undefined = 0u64;
    for m in 0..n {
        for k in 0..n {
            let v = apply(f, &Point::pair(m, k))?.map(|v| value_u64(&v)).transpose()?;
            undefined += u64::from(v.is_none());
            table.push(v);
        }
    }
    // largest section of any fibre
    let mut best: Option<FiberChoice> = None;
    for m in 0..side {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for v in table[m * side..(m + 1) * side].iter().flatten() {
            *counts.entry(*v).or_default() += 1;
        }
        for (v, c) in counts {
            if best.as_ref().is_none_or(|b| c > b.size) {
                best = Some(FiberChoice { value: v, size: c, score: Score::from(c) });
            }
        }
    }
    let mut out = RefuterOutput {
        version: crate::SCHEMA_VERSION,
        construction: "refute_edminus",
        function: f.to_string(),
        cutoff: n,
        case: CaseTag::Greedy,
        truncation_relative: true,
        a: String::new(),
        b: Vec::new(),
        c: Vec::new(),
        evidence: Evidence::Edminus(EdminusEvidence {
            undefined,
            fiber: None,
            bundles: Vec::new(),
            skipped_rows: Vec::new(),
            distinct: true,
            response_sections: Vec::new(),
        }),
        responder: Responder::Nothing,
    };
    if let Some(b) = best.filter(|b| 2 * b.size >= n) {
        out.case = CaseTag::Fiber;
        out.a = format!("pre({f},{{{}}})", b.value);
        out.b = vec![b.value];
        let Evidence::Edminus(ev) = &mut out.evidence else { unreachable!() };
        ev.fiber = Some(b);
        return Ok(out);
    }

    let mut used: BTreeSet<u64> = BTreeSet::new();
    let mut bundles = Vec::new();
    let mut skipped = Vec::new();
    for m in 0..side {
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for k in 0..side {
            if columns.len() > m {
                break;
            }
            if let Some(v) = table[m * side + k] {
                if !used.contains(&v) && !values.contains(&v) {
                    columns.push(k as u64);
                    values.push(v);
                }
            }
        }
        if columns.len() == m + 1 {
            used.extend(values.iter().copied());
            bundles.push(Bundle { row: m as u64, columns, values });
        } else {
            skipped.push(m as u64);
        }
    }
    let all: Vec<u64> = bundles.iter().flat_map(|b| b.values.iter().copied()).collect();
    let distinct = all.iter().collect::<BTreeSet<_>>().len() == all.len();
    out.responder = Responder::Bundles(bundles.iter().map(|b| b.values.clone()).collect());
    out.c = out.respond(&all);
    let c: BTreeSet<u64> = out.c.iter().copied().collect();
    let sections = bundles
        .iter()
        .map(|b| (b.row, b.values.iter().filter(|v| c.contains(v)).count() as u64))
        .collect();
    out.a = format!("{{(n, k^n_i) : i <= n}} over {} rows", bundles.len());
    out.b = all;
    let Evidence::Edminus(ev) = &mut out.evidence else { unreachable!() };
    ev.bundles = bundles;
    ev.skipped_rows = skipped;
    ev.distinct = distinct;
    ev.response_sections = sections;
    Ok(out)
}

/// Open dyadic intervals `(k/2^L, (k+1)/2^L)`, level by level.
fn dyadic_intervals(count: usize) -> Vec<(u32, u64)> {
    let mut out = Vec::with_capacity(count);
    let mut level = 0u32;
    while out.len() < count {
        for k in 0..(1u64 << level) {
            if out.len() == count {
                break;
            }
            out.push((level, k));
        }
        level += 1;
    }
    out
}

fn inside_open(q: (u64, u64), level: u32, k: u64) -> bool {
    let (p, d) = (u128::from(q.0), u128::from(q.1));
    let x = p << level;
    x > u128::from(k) * d && x < u128::from(k + 1) * d
}

/// Nested bisection over the points `d`: at each level take the first
/// unpicked point of the current interval, then move into the half with
/// more unpicked points (ties to the left). Returns picked indices and the
/// intervals `(level, k)`.
fn bisect(d: &[((u64, u64), u64)]) -> (Vec<usize>, Vec<(u32, u64)>) {
    let mut picked = Vec::new();
    let mut nest = Vec::new();
    let mut alive: Vec<usize> = (0..d.len()).collect();
    let (mut level, mut k) = (0u32, 0u64);
    let in_closed = |q: (u64, u64), level: u32, k: u64| {
        let x = u128::from(q.0) << level;
        x >= u128::from(k) * u128::from(q.1) && x <= u128::from(k + 1) * u128::from(q.1)
    };
    while !alive.is_empty() && level < 62 {
        nest.push((level, k));
        let first = alive.remove(0);
        picked.push(first);
        let (left, right): (Vec<usize>, Vec<usize>) =
            alive.iter().partition(|&&i| in_closed(d[i].0, level + 1, 2 * k));
        let right: Vec<usize> = right.into_iter().filter(|&i| in_closed(d[i].0, level + 1, 2 * k + 1)).collect();
        level += 1;
        if left.len() >= right.len() {
            k *= 2;
            alive = left;
        } else {
            k = 2 * k + 1;
            alive = right;
        }
    }
    (picked, nest)
}

fn fmt_q(q: (u64, u64)) -> String {
    if q.1 == 1 {
        q.0.to_string()
    } else {
        format!("{}/{}", q.0, q.1)
    }
}

fn resolution_scores(points: &[(u64, u64)], levels: u32) -> Vec<(u32, u64)> {
    (1..=levels).map(|l| (l, nwd_score(points, 1u64 << l))).collect()
}

/// One rational with a fresh value in each of the first `intervals`
/// dyadic intervals, among the first `n` rationals.
pub fn refute_nwd(f: &FuncExpr, n: u64, intervals: usize) -> Result<RefuterOutput> {
    check_func(f, Universe::QUnit)?;
    if intervals == 0 {
        return Err(ReductionError::Parameter("need at least one interval".into()));
    }
    let qs = qunit_prefix(n);
    let mut values = Vec::with_capacity(qs.len());
    let mut undefined = 0u64;
    for &(p, d) in &qs {
        let v = apply(f, &Point::frac(p, d))?.map(|v| value_u64(&v)).transpose()?;
        undefined += u64::from(v.is_none());
        values.push(v);
    }
    let top = 63 - n.max(2).leading_zeros();
    let mut fibers: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
    for (q, v) in qs.iter().zip(&values) {
        if let Some(v) = v {
            fibers.entry(*v).or_default().push(*q);
        }
    }
    let s_all = nwd_score(&qs, n);
    let dense = fibers
        .iter()
        .map(|(v, pts)| (*v, pts.len() as u64, nwd_score(pts, n)))
        .filter(|(_, _, s)| *s >= 2.max(s_all.div_ceil(2)))
        .max_by(|a, b| a.2.cmp(&b.2).then(b.0.cmp(&a.0)));
    let mut out = RefuterOutput {
        version: crate::SCHEMA_VERSION,
        construction: "refute_nwd",
        function: f.to_string(),
        cutoff: n,
        case: CaseTag::Greedy,
        truncation_relative: true,
        a: String::new(),
        b: Vec::new(),
        c: Vec::new(),
        evidence: Evidence::Nwd(NwdEvidence {
            undefined,
            fiber: None,
            picks: Vec::new(),
            a_scores: Vec::new(),
            nest: Vec::new(),
            response_scores: Vec::new(),
        }),
        responder: Responder::Nothing,
    };
    if let Some((v, size, s)) = dense {
        out.case = CaseTag::Fiber;
        out.a = if size == qs.len() as u64 { "qall".to_string() } else { format!("pre({f},{{{v}}})") };
        out.b = vec![v];
        let Evidence::Nwd(ev) = &mut out.evidence else { unreachable!() };
        ev.fiber = Some(FiberChoice { value: v, size, score: Score::from(s) });
        ev.a_scores = resolution_scores(&fibers[&v], top);
        return Ok(out);
    }

    let mut used: BTreeSet<u64> = BTreeSet::new();
    let mut taken = vec![false; qs.len()];
    let mut picks = Vec::new();
    let mut points = Vec::new();
    for (level, k) in dyadic_intervals(intervals) {
        let found = (0..qs.len()).find(|&i| {
            !taken[i] && values[i].is_some_and(|v| !used.contains(&v)) && inside_open(qs[i], level, k)
        });
        let Some(i) = found else {
            return Err(ReductionError::Parameter(format!(
                "the first {n} rationals cannot fill {intervals} intervals with fresh values (stuck at level {level}, interval {k})"
            )));
        };
        let v = values[i].expect("checked");
        taken[i] = true;
        used.insert(v);
        picks.push(NwdPick {
            interval: format!("({},{})", fmt_q((k, 1u64 << level)), fmt_q((k + 1, 1u64 << level))),
            x: fmt_q(qs[i]),
            value: v,
        });
        points.push((qs[i], v));
    }
    let (picked, nest) = bisect(&points);
    let mut response: Vec<(u64, u64)> = picked.iter().map(|&i| points[i].0).collect();
    response.sort_by(|a, b| (u128::from(a.0) * u128::from(b.1)).cmp(&(u128::from(b.0) * u128::from(a.1))));
    let mut a_points: Vec<(u64, u64)> = points.iter().map(|(q, _)| *q).collect();
    a_points.sort();
    out.a = format!("{{x_n : n < {intervals}}}, one point per dyadic interval");
    out.b = points.iter().map(|(_, v)| *v).collect();
    out.responder = Responder::Points(points.clone());
    out.c = out.respond(&out.b.clone());
    let Evidence::Nwd(ev) = &mut out.evidence else { unreachable!() };
    ev.picks = picks;
    ev.a_scores = resolution_scores(&a_points, top);
    ev.nest = nest
        .iter()
        .map(|&(l, k)| format!("[{},{}]", fmt_q((k, 1u64 << l)), fmt_q((k + 1, 1u64 << l))))
        .collect();
    ev.response_scores = resolution_scores(&response, top);
    Ok(out)
}
