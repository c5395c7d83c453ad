//! Truncation scores: the finite statistics whose growth or vanishing
//! stands in for positivity or smallness.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::ap::longest_ap;
use super::{CellWeights, Ideal, IdealHandle, Result};
use crate::point::Universe;
use crate::score::{int, Score};
use crate::setexpr::{truncate, truncate_nats, truncate_pairs, Partition, SetExpr, TruncationView};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellScore {
    pub cell: u64,
    pub count: u64,
    pub score: Score,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FubiniDiagnostics {
    /// `(m, |v_(m)|)` for every `m < N`.
    pub sections: Vec<(u64, u64)>,
    /// `(s, #{m : |v_(m)| >= s})` for `s = 1, 2, 4, ...`.
    pub columns_at_least: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreValue {
    Scalar { value: Score },
    Cells { cells: Vec<CellScore> },
    Pair { left: Box<ScoreValue>, right: Box<ScoreValue> },
    Fubini { diagnostics: FubiniDiagnostics },
}

/// Samples `(N, score)` with strictly increasing cutoffs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScoreSeries {
    pub samples: Vec<(u64, Score)>,
}

impl ScoreSeries {
    pub fn last(&self) -> Option<&Score> {
        self.samples.last().map(|(_, s)| s)
    }

    pub fn cutoffs(&self) -> Vec<u64> {
        self.samples.iter().map(|(n, _)| *n).collect()
    }
}

/// `10^2, ..., 10^6` on ω; smaller windows where a cutoff means more work.
pub fn default_schedule(u: Universe) -> Vec<u64> {
    match u {
        Universe::Omega | Universe::OmegaTagged => vec![100, 1_000, 10_000, 100_000, 1_000_000],
        Universe::OmegaSq => vec![10, 32, 100, 316, 1_000],
        Universe::QUnit => vec![100, 1_000, 10_000, 100_000],
    }
}

/// Window contents in machine form.
pub(crate) enum Data {
    Nats(Vec<u64>),
    Pairs(Vec<(u64, u64)>),
    /// Rationals as `(num, den)`, in enumeration order.
    Fracs(Vec<(u64, u64)>),
}

fn view_data(v: &TruncationView) -> Result<Data> {
    Ok(match v.universe {
        Universe::Omega => Data::Nats(v.nats()?),
        Universe::OmegaSq | Universe::OmegaTagged => Data::Pairs(v.pairs()?),
        Universe::QUnit => Data::Fracs(
            v.points
                .iter()
                .map(|p| {
                    let q = p.as_frac().expect("universe checked");
                    (q.num().to_u64().expect("small"), q.den().to_u64().expect("small"))
                })
                .collect(),
        ),
    })
}

fn expr_data(e: &SetExpr, n: u64) -> Result<Data> {
    Ok(match e.universe() {
        Universe::Omega => Data::Nats(truncate_nats(e, n)?),
        Universe::OmegaSq | Universe::OmegaTagged => Data::Pairs(truncate_pairs(e, n)?),
        Universe::QUnit => view_data(&truncate(e, n)?)?,
    })
}

/// Score of a truncation view.
pub fn score(h: &IdealHandle, v: &TruncationView) -> Result<ScoreValue> {
    h.check_universe(v.universe)?;
    if let Ideal::Restrict(inner, a) = &h.ideal {
        let window = truncate(a, v.cutoff)?;
        let kept: Vec<_> = v.points.iter().filter(|p| window.contains(p)).cloned().collect();
        let sub = TruncationView { points: kept, ..v.clone() };
        return score(inner, &sub);
    }
    score_data(h, view_data(v)?, v.cutoff)
}

/// Score of `truncate(e, n)`, computed without materializing points.
pub fn score_expr(h: &IdealHandle, e: &SetExpr, n: u64) -> Result<ScoreValue> {
    h.check_set(e)?;
    if let Ideal::Restrict(inner, a) = &h.ideal {
        let both = SetExpr::inter(e.clone(), a.clone())?;
        return score_expr(inner, &both, n);
    }
    score_data(h, expr_data(e, n)?, n)
}

pub(crate) fn score_data(h: &IdealHandle, data: Data, n: u64) -> Result<ScoreValue> {
    let scalar = |s: Score| ScoreValue::Scalar { value: s };
    Ok(match (&h.ideal, data) {
        (Ideal::Fin, Data::Nats(xs)) => scalar(Score::count(xs.len())),
        (Ideal::Summable(w), Data::Nats(xs)) => scalar(w.mass(&xs)),
        (Ideal::Vdw, Data::Nats(xs)) => scalar(Score::from(longest_ap(&xs).map_or(0, |p| p.length))),
        (Ideal::Density(part, w), Data::Nats(xs)) => ScoreValue::Cells {
            cells: cell_scores(part, w, &xs, n),
        },
        (Ideal::EdMinus, Data::Pairs(ps)) => scalar(Score::from(max_section(&ps))),
        (Ideal::Nwd, Data::Fracs(qs)) => scalar(Score::from(nwd_score(&qs, n))),
        (Ideal::Fin2 | Ideal::Fubini(..), Data::Pairs(ps)) => ScoreValue::Fubini {
            diagnostics: fubini_diagnostics(&ps, n),
        },
        (Ideal::Dsum(i, j), Data::Pairs(ps)) => {
            let left: Vec<u64> = ps.iter().filter(|(_, t)| *t == 0).map(|(k, _)| *k).collect();
            let right: Vec<u64> = ps.iter().filter(|(_, t)| *t == 1).map(|(k, _)| *k).collect();
            ScoreValue::Pair {
                left: Box::new(score_data(i, Data::Nats(left), n)?),
                right: Box::new(score_data(j, Data::Nats(right), n)?),
            }
        }
        _ => unreachable!("universe checked by the caller"),
    })
}

/// Cells of the partition that meet `[0, n)`.
pub fn cells_below(part: &Partition, n: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    let mut k = 0u64;
    while let Some((lo, hi)) = part.cell_bounds(k) {
        if lo >= n {
            break;
        }
        out.push((k, lo, hi));
        k += 1;
    }
    out
}

pub fn cell_scores(part: &Partition, w: &CellWeights, xs: &[u64], n: u64) -> Vec<CellScore> {
    cells_below(part, n)
        .into_iter()
        .map(|(k, lo, hi)| {
            let a = xs.partition_point(|x| *x < lo);
            let b = xs.partition_point(|x| *x <= hi);
            let count = (b - a) as u64;
            let weight = match w {
                CellWeights::Size => BigRational::from_integer(part.cell_size(k).into()),
                CellWeights::Const(c) => int(*c),
            };
            CellScore {
                cell: k,
                count,
                score: Score::Exact(int(count) / weight),
            }
        })
        .collect()
}

/// `|v_(m)|` for each `m` with a nonempty section.
pub fn sections(ps: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    for (m, _) in ps {
        match out.last_mut() {
            Some((last, c)) if last == m => *c += 1,
            _ => out.push((*m, 1)),
        }
    }
    out
}

fn max_section(ps: &[(u64, u64)]) -> u64 {
    sections(ps).into_iter().map(|(_, c)| c).max().unwrap_or(0)
}

fn fubini_diagnostics(ps: &[(u64, u64)], n: u64) -> FubiniDiagnostics {
    let nonempty = sections(ps);
    let mut all = vec![0u64; n as usize];
    for (m, c) in &nonempty {
        if let Some(slot) = all.get_mut(*m as usize) {
            *slot = *c;
        }
    }
    let sections: Vec<(u64, u64)> = all.iter().enumerate().map(|(m, c)| (m as u64, *c)).collect();
    let mut columns_at_least = Vec::new();
    let mut s = 1u64;
    while s <= n.max(1) {
        columns_at_least.push((s, all.iter().filter(|c| **c >= s).count() as u64));
        s *= 2;
    }
    FubiniDiagnostics {
        sections,
        columns_at_least,
    }
}

/// Largest `k` such that some dyadic interval of level `L - k` has all of
/// its level-`L` children hit, `L = floor(log2 n)`.
pub fn nwd_score(qs: &[(u64, u64)], n: u64) -> u64 {
    if qs.is_empty() {
        return 0;
    }
    let level = 63 - n.max(1).leading_zeros();
    let width = 1u64 << level;
    let mut hit = vec![false; width as usize];
    for &(p, q) in qs {
        let k = ((u128::from(p) << level) / u128::from(q)).min(u128::from(width - 1));
        hit[k as usize] = true;
    }
    let mut best = 0u64;
    let mut full = hit;
    for k in 1..=level {
        full = full.chunks(2).map(|c| c[0] && c[1]).collect();
        if full.iter().any(|f| *f) {
            best = u64::from(k);
        } else {
            break;
        }
    }
    best
}

/// Scalar used for trend classification: the value itself, the largest
/// cell score over the upper half of the cells, the larger component of a
/// pair, or the number of columns with section size at least `floor(sqrt N)`.
pub fn summary(v: &ScoreValue, n: u64) -> Score {
    match v {
        ScoreValue::Scalar { value } => value.clone(),
        ScoreValue::Cells { cells } => {
            let start = cells.len() / 2;
            cells[start..]
                .iter()
                .map(|c| c.score.clone())
                .max_by(|a, b| a.lo().cmp(b.lo()))
                .unwrap_or_else(Score::zero)
        }
        ScoreValue::Pair { left, right } => {
            let (a, b) = (summary(left, n), summary(right, n));
            if a.is_exact() && b.is_exact() {
                if a.lo() >= b.lo() {
                    a
                } else {
                    b
                }
            } else {
                Score::enclosure(a.lo().max(b.lo()).clone(), a.hi().max(b.hi()).clone())
            }
        }
        ScoreValue::Fubini { diagnostics } => {
            let s = num_integer::Roots::sqrt(&n);
            Score::from(diagnostics.sections.iter().filter(|(_, c)| *c >= s.max(1)).count() as u64)
        }
    }
}

/// Summary scores of `e` along a schedule.
pub fn score_series(h: &IdealHandle, e: &SetExpr, schedule: &[u64]) -> Result<ScoreSeries> {
    let samples: Result<Vec<(u64, Score)>> = schedule
        .par_iter()
        .map(|&n| Ok((n, summary(&score_expr(h, e, n)?, n))))
        .collect();
    Ok(ScoreSeries { samples: samples? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::make_ideal;
    use crate::point::Point;
    use crate::score::rat;
    use crate::setexpr::parse_set;

    fn scalar(v: ScoreValue) -> Score {
        match v {
            ScoreValue::Scalar { value } => value,
            other => panic!("not scalar: {other:?}"),
        }
    }

    fn view(points: &[u64]) -> TruncationView {
        TruncationView::new(Universe::Omega, 100, points.iter().map(|p| Point::nat(*p)).collect()).unwrap()
    }

    #[test]
    fn documented_scores() {
        let h = make_ideal("summable(harmonic)").unwrap();
        assert_eq!(scalar(score(&h, &view(&[0, 1, 2, 3])).unwrap()), Score::Exact(rat(25, 12)));
        let w = make_ideal("vdw").unwrap();
        assert_eq!(scalar(score(&w, &view(&[1, 3, 5, 9])).unwrap()), Score::from(3));
        let ed = make_ideal("edminus").unwrap();
        let tri = truncate(&parse_set("tri").unwrap(), 5).unwrap();
        assert_eq!(scalar(score(&ed, &tri).unwrap()), Score::from(5));
        let r = make_ideal("restrict(vdw,evens)").unwrap();
        assert_eq!(scalar(score(&r, &view(&[0, 2, 4, 6])).unwrap()), Score::from(4));
        assert_eq!(scalar(score(&r, &view(&[0, 1, 2, 4, 6, 7])).unwrap()), Score::from(4));
    }

    #[test]
    fn expression_and_view_paths_agree() {
        let cases = [
            ("fin", "(evens|{3})"),
            ("vdw", "blocks(10)"),
            ("summable(harmonic)", "squares"),
            ("density", "ap(1,3)"),
            ("edminus", "grid(range(0,4),odds)"),
            ("fin2", "tri"),
            ("dsum(vdw,fin)", "(tag0(evens)|tag1({1,2}))"),
            ("nwd", "qball(1/2,1/8)"),
            ("restrict(vdw,blocks(10))", "evens"),
        ];
        for (ideal, set) in cases {
            let h = make_ideal(ideal).unwrap();
            let e = parse_set(set).unwrap();
            for n in [10, 64, 300] {
                let v = truncate(&e, n).unwrap();
                assert_eq!(score(&h, &v).unwrap(), score_expr(&h, &e, n).unwrap(), "{ideal} {set} {n}");
            }
        }
    }

    #[test]
    fn density_cells() {
        let h = make_ideal("density").unwrap();
        let ScoreValue::Cells { cells } = score_expr(&h, &parse_set("evens").unwrap(), 64).unwrap() else {
            panic!()
        };
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].score, Score::Exact(rat(0, 1)));
        for c in &cells[1..] {
            assert_eq!(c.score, Score::Exact(rat(1, 2)));
        }
    }

    #[test]
    fn nwd_scores_of_dense_and_sparse_sets() {
        let h = make_ideal("nwd").unwrap();
        let dense = |n| scalar(score_expr(&h, &parse_set("qall").unwrap(), n).unwrap());
        assert!(dense(10_000).lo() > dense(100).lo());
        let sparse = scalar(score_expr(&h, &parse_set("{0/1,1/2,1/1}").unwrap(), 10_000).unwrap());
        assert_eq!(sparse, Score::from(0));
        assert_eq!(nwd_score(&[(0, 1), (1, 4), (1, 2), (3, 4)], 4), 2);
    }
}
