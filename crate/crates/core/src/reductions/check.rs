//! Evidence checks of reduction witnesses along a cutoff schedule.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::{ReductionError, Result, Witness};
use crate::ideals::{certify, score, score_series, summary, IdealError, IdealHandle, ScoreSeries, Verdict};
use crate::point::{qunit_index, Point, Universe};
use crate::score::{int, Score};
use crate::setexpr::{self as sx, FuncExpr, SetExpr, TruncationView};

/// A series grows when its last sample exceeds both twice the midpoint
/// sample and this value.
pub const GROWTH_TARGET: u64 = 10;

/// Points of a violating truncation kept in the report.
const EVIDENCE_POINTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Grows,
    Bounded,
    Unclear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Consistent,
    Violated,
    Inconclusive,
    Skipped,
}

/// Trend of a series, settled by a certificate when one exists.
pub fn trend(series: &ScoreSeries, certificate: Option<&Verdict>) -> Trend {
    match certificate {
        Some(v) if v.is_positive() => return Trend::Grows,
        Some(v) if v.is_in() => return Trend::Bounded,
        _ => {}
    }
    let s = &series.samples;
    let Some((_, last)) = s.last() else {
        return Trend::Unclear;
    };
    let mid = &s[s.len() / 2].1;
    if last.certainly_gt(&(mid.hi() * int(2))) && last.certainly_gt(&int(GROWTH_TARGET)) {
        return Trend::Grows;
    }
    if s.len() >= 3 && s[s.len() - 3..].windows(2).all(|w| w[0].1 == w[1].1) {
        return Trend::Bounded;
    }
    Trend::Unclear
}

/// Whether the last sample is certainly above every earlier one.
fn exceeds_earlier(series: &ScoreSeries) -> bool {
    let s = &series.samples;
    let Some(((_, last), earlier)) = s.split_last() else {
        return false;
    };
    earlier.iter().all(|(_, x)| last.certainly_gt(x.hi()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub cutoffs: Vec<u64>,
    /// Sizes of the truncations whose scores grow.
    pub growing_sizes: Vec<u64>,
    /// Leading points of the growing truncation at the last cutoff.
    pub sample: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessRow {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(rename = "C")]
    pub c: Option<String>,
    pub schedule: Vec<u64>,
    #[serde(rename = "scores_I")]
    pub scores_i: ScoreSeries,
    #[serde(rename = "scores_J")]
    pub scores_j: ScoreSeries,
    #[serde(rename = "certificate_I")]
    pub certificate_i: Option<Verdict>,
    #[serde(rename = "certificate_J")]
    pub certificate_j: Option<Verdict>,
    #[serde(rename = "trend_I")]
    pub trend_i: Trend,
    #[serde(rename = "trend_J")]
    pub trend_j: Trend,
    pub classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Violation>,
}

/// How the B-selector fared: `B ⊆ f[A]` on every truncation, and the
/// target-ideal scores of `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub symbolic: Option<String>,
    pub subset_of_image: bool,
    pub scores: ScoreSeries,
    pub certificate: Option<Verdict>,
    pub trend: Trend,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub consistent: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    pub verdict: Option<Classification>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub version: &'static str,
    pub mode: &'static str,
    pub witness: String,
    pub source: IdealHandle,
    pub target: IdealHandle,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    pub rows: Vec<WitnessRow>,
    pub summary: Summary,
}

impl WitnessReport {
    pub fn verdict(&self) -> Classification {
        self.summary.verdict.unwrap_or(Classification::Inconclusive)
    }
}

fn summarize(rows: &[WitnessRow], selection_failed: bool) -> Summary {
    let mut s = Summary::default();
    for r in rows {
        match r.classification {
            Classification::Consistent => s.consistent += 1,
            Classification::Violated => s.violated += 1,
            Classification::Inconclusive => s.inconclusive += 1,
            Classification::Skipped => s.skipped += 1,
        }
    }
    s.verdict = Some(if selection_failed || s.violated > 0 {
        Classification::Violated
    } else if s.inconclusive > 0 {
        Classification::Inconclusive
    } else {
        Classification::Consistent
    });
    s
}

fn check_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(ReductionError::Parameter(
            "schedule needs at least 3 strictly increasing positive cutoffs".into(),
        ));
    }
    Ok(())
}

/// Least cutoff at least `n` whose window holds every point of `v`.
fn covering(u: Universe, points: &[Point], n: u64) -> Result<u64> {
    let mut top = n;
    for p in points {
        let need = match (u, p) {
            (Universe::Omega, Point::Nat(k)) => k.to_u64(),
            (Universe::OmegaSq, Point::Pair(a, b)) => a.max(b).to_u64(),
            (Universe::OmegaTagged, Point::Pair(a, _)) => a.to_u64(),
            (Universe::QUnit, Point::Frac(q)) => qunit_index(q)?.to_u64(),
            _ => None,
        };
        let need = need.and_then(|k| k.checked_add(1)).ok_or_else(|| {
            ReductionError::Parameter(format!("point {p} is beyond the supported range"))
        })?;
        top = top.max(need);
    }
    Ok(top)
}

/// Summary score of an explicit finite set, with a window wide enough to
/// hold all of it.
fn finite_score(h: &IdealHandle, points: Vec<Point>, n: u64) -> Result<Score> {
    let u = h.universe();
    let cutoff = covering(u, &points, n)?;
    let v = TruncationView::new(u, cutoff, points)?;
    Ok(summary(&score(h, &v)?, cutoff))
}

fn finite_points(e: &SetExpr) -> Vec<Point> {
    match e {
        SetExpr::Finite(_, ps) => ps.clone(),
        _ => unreachable!("selectors return explicit sets"),
    }
}

fn within(points: &[Point], e: &SetExpr) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for p in points {
        if sx::contains(e, p)? {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn evidence(schedule: &[u64], sizes: Vec<u64>, last: &[Point]) -> Violation {
    Violation {
        cutoffs: schedule.to_vec(),
        growing_sizes: sizes,
        sample: last.iter().take(EVIDENCE_POINTS).map(|p| p.to_string()).collect(),
    }
}

/// Checks `w` as a witness for `target ≤_BW source` on the source-positive
/// set `a`: each challenge `C` meeting the selected `B` positively must
/// pull back to a positive `A ∩ f⁻¹[C]`. Unless `assume_positive`, `a`
/// must be certified positive first.
pub fn bw_check(
    w: &Witness,
    a: &SetExpr,
    challenges: &[SetExpr],
    schedule: &[u64],
    assume_positive: bool,
) -> Result<WitnessReport> {
    check_schedule(schedule)?;
    w.source.check_set(a)?;
    for c in challenges {
        w.target.check_set(c)?;
    }
    if !assume_positive {
        let v = crate::ideals::decide(&w.source, a)?;
        if !v.is_positive() {
            return Err(IdealError::NotPositive {
                ideal: w.source.to_string(),
                set: a.to_string(),
                verdict: v.kind().to_string(),
            }
            .into());
        }
    }
    let selector = w.selector.as_ref().ok_or_else(|| ReductionError::MissingSelector(w.name.clone()))?;

    // B at every cutoff, checked against f[A]
    let picked: Vec<(Vec<Point>, bool)> = schedule
        .par_iter()
        .map(|&n| -> Result<(Vec<Point>, bool)> {
            let b = finite_points(&selector.select(a, n)?);
            let img = sx::image(&w.f, &sx::truncate(a, n)?)?;
            let inside = b.iter().all(|p| img.contains(p));
            Ok((b, inside))
        })
        .collect::<Result<_>>()?;
    let symbolic = selector.symbolic(a);
    let b_scores = ScoreSeries {
        samples: schedule
            .iter()
            .zip(&picked)
            .map(|(&n, (b, _))| Ok((n, finite_score(&w.target, b.clone(), n)?)))
            .collect::<Result<_>>()?,
    };
    let b_cert = match &symbolic {
        Some(e) => certify(&w.target, e)?,
        None => None,
    };
    let selection = Selection {
        symbolic: symbolic.as_ref().map(|e| e.to_string()),
        subset_of_image: picked.iter().all(|(_, ok)| *ok),
        trend: trend(&b_scores, b_cert.as_ref()),
        scores: b_scores,
        certificate: b_cert,
    };
    let b_name = selection.symbolic.clone().unwrap_or_else(|| format!("{selector}[{a}]"));

    let rows: Vec<WitnessRow> = challenges
        .par_iter()
        .map(|c| -> Result<WitnessRow> {
            let met: Vec<Vec<Point>> = picked.iter().map(|(b, _)| within(b, c)).collect::<Result<_>>()?;
            let scores_i = ScoreSeries {
                samples: schedule
                    .iter()
                    .zip(&met)
                    .map(|(&n, pts)| Ok((n, finite_score(&w.target, pts.clone(), n)?)))
                    .collect::<Result<_>>()?,
            };
            let certificate_i = match &symbolic {
                Some(b) => certify(&w.target, &SetExpr::inter(c.clone(), b.clone())?)?,
                None => None,
            };
            let pulled = SetExpr::inter(a.clone(), SetExpr::preimage(w.f.clone(), c.clone())?)?;
            let scores_j = score_series(&w.source, &pulled, schedule)?;
            let certificate_j = certify(&w.source, &pulled)?;
            let trend_i = trend(&scores_i, certificate_i.as_ref());
            let trend_j = trend(&scores_j, certificate_j.as_ref());
            let j_positive = match &certificate_j {
                Some(v) => v.is_positive(),
                None => trend_j == Trend::Grows || exceeds_earlier(&scores_j),
            };
            let classification = match (trend_i, trend_j) {
                (Trend::Bounded, _) => Classification::Skipped,
                _ if j_positive => Classification::Consistent,
                (Trend::Grows, Trend::Bounded) => Classification::Violated,
                _ => Classification::Inconclusive,
            };
            let evidence = (classification == Classification::Violated).then(|| {
                let sizes = met.iter().map(|m| m.len() as u64).collect();
                evidence(schedule, sizes, met.last().map_or(&[][..], |v| v))
            });
            Ok(WitnessRow {
                a: a.to_string(),
                b: b_name.clone(),
                c: Some(c.to_string()),
                schedule: schedule.to_vec(),
                scores_i,
                scores_j,
                certificate_i,
                certificate_j,
                trend_i,
                trend_j,
                classification,
                evidence,
            })
        })
        .collect::<Result<_>>()?;

    let failed = selection.trend == Trend::Bounded || !selection.subset_of_image;
    Ok(WitnessReport {
        version: crate::SCHEMA_VERSION,
        mode: "bw",
        witness: w.name.clone(),
        source: w.source.clone(),
        target: w.target.clone(),
        summary: summarize(&rows, failed),
        selection: Some(selection),
        rows,
    })
}

/// Checks `f` as a Katětov map from `(dom, j)` to `(cod, i)`: images of
/// `j`-positive sets should be `i`-positive.
pub fn katetov_check(
    f: &FuncExpr,
    i: &IdealHandle,
    j: &IdealHandle,
    positives: &[SetExpr],
    schedule: &[u64],
) -> Result<WitnessReport> {
    check_schedule(schedule)?;
    j.check_universe(f.domain())?;
    i.check_universe(f.codomain())?;
    for a in positives {
        j.check_set(a)?;
    }
    let rows: Vec<WitnessRow> = positives
        .par_iter()
        .map(|a| -> Result<WitnessRow> {
            let images: Vec<TruncationView> =
                schedule.iter().map(|&n| Ok(sx::image(f, &sx::truncate(a, n)?)?)).collect::<Result<_>>()?;
            let scores_i = ScoreSeries {
                samples: schedule
                    .iter()
                    .zip(&images)
                    .map(|(&n, v)| Ok((n, finite_score(i, v.points.clone(), n)?)))
                    .collect::<Result<_>>()?,
            };
            let image = SetExpr::image(f.clone(), a.clone())?;
            let certificate_i = certify(i, &image)?;
            let scores_j = score_series(j, a, schedule)?;
            let certificate_j = certify(j, a)?;
            let trend_i = trend(&scores_i, certificate_i.as_ref());
            let trend_j = trend(&scores_j, certificate_j.as_ref());
            let a_positive = trend_j == Trend::Grows;
            let classification = match trend_i {
                Trend::Grows => Classification::Consistent,
                Trend::Bounded if a_positive => Classification::Violated,
                Trend::Bounded => Classification::Skipped,
                Trend::Unclear => Classification::Inconclusive,
            };
            let evidence = (classification == Classification::Violated).then(|| {
                let sizes = schedule
                    .iter()
                    .map(|&n| sx::truncate(a, n).map(|v| v.len() as u64).unwrap_or(0))
                    .collect();
                evidence(schedule, sizes, images.last().map_or(&[][..], |v| &v.points))
            });
            Ok(WitnessRow {
                a: a.to_string(),
                b: image.to_string(),
                c: None,
                schedule: schedule.to_vec(),
                scores_i,
                scores_j,
                certificate_i,
                certificate_j,
                trend_i,
                trend_j,
                classification,
                evidence,
            })
        })
        .collect::<Result<_>>()?;
    Ok(WitnessReport {
        version: crate::SCHEMA_VERSION,
        mode: "katetov",
        witness: f.to_string(),
        source: j.clone(),
        target: i.clone(),
        summary: summarize(&rows, false),
        selection: None,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::make_ideal;
    use crate::reductions::builtin_witness;
    use crate::setexpr::{parse_func, parse_set};

    fn series(xs: &[u64]) -> ScoreSeries {
        ScoreSeries {
            samples: xs.iter().enumerate().map(|(i, x)| (10u64.pow(i as u32 + 2), Score::from(*x))).collect(),
        }
    }

    #[test]
    fn trend_thresholds() {
        assert_eq!(trend(&series(&[1, 5, 9, 30, 100]), None), Trend::Grows);
        assert_eq!(trend(&series(&[1, 2, 3, 4, 7]), None), Trend::Unclear);
        assert_eq!(trend(&series(&[1, 2, 2, 2, 2]), None), Trend::Bounded);
        assert!(exceeds_earlier(&series(&[1, 3, 3, 5, 6])));
        assert!(!exceeds_earlier(&series(&[1, 3, 3, 5, 5])));
    }

    #[test]
    fn block_index_witness_on_blocks() {
        let w = builtin_witness("vdw_blockindex").unwrap();
        let a = parse_set("blocks(10)").unwrap();
        let cs = [parse_set("evens").unwrap(), parse_set("{5}").unwrap()];
        let r = bw_check(&w, &a, &cs, &[100, 1000, 10_000], false).unwrap();
        assert_eq!(r.rows[0].classification, Classification::Consistent);
        assert_eq!(r.rows[1].classification, Classification::Skipped);
        assert!(r.selection.as_ref().unwrap().subset_of_image);
        assert_eq!(r.verdict(), Classification::Consistent);
    }

    #[test]
    fn identity_into_harmonic_is_violated() {
        let w = builtin_witness("identity(fin,summable(harmonic))").unwrap();
        let a = parse_set("ap(0,1)").unwrap();
        let r = bw_check(&w, &a, &[parse_set("powers(2)").unwrap()], &[100, 1000, 10_000, 100_000], false).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.classification, Classification::Violated);
        assert!(row.evidence.is_some());
        assert_eq!(r.verdict(), Classification::Violated);
    }

    #[test]
    fn katetov_examples() {
        let fin = make_ideal("fin").unwrap();
        let r = katetov_check(
            &parse_func("proj1").unwrap(),
            &fin,
            &make_ideal("fin2").unwrap(),
            &[parse_set("tri").unwrap()],
            &[10, 32, 100],
        )
        .unwrap();
        assert_eq!(r.rows[0].classification, Classification::Consistent);

        let r = katetov_check(
            &parse_func("table{default->0}").unwrap(),
            &fin,
            &fin,
            &[parse_set("ap(0,1)").unwrap()],
            &[100, 1000, 10_000],
        )
        .unwrap();
        assert_eq!(r.rows[0].classification, Classification::Violated);

        let r = katetov_check(
            &parse_func("blockindex(10)").unwrap(),
            &fin,
            &make_ideal("restrict(vdw,blocks(10))").unwrap(),
            &[parse_set("blocks(10)").unwrap()],
            &[100, 1000, 10_000, 100_000, 1_000_000],
        )
        .unwrap();
        assert_eq!(r.rows[0].classification, Classification::Consistent);
    }
}
