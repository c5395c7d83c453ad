//! Greedy branch selection, extraction and transport along witnesses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Serialize, Serializer};

use super::{distance, dyadic_tree, BwError, Interval, PartitionTree, Result, Sequence};
use crate::ideals::{score, summary, IdealHandle, ScoreMode};
use crate::reductions::{ReductionError, Witness};
use crate::score::{fmt_rat, Score};
use crate::setexpr::{apply, SetExpr, TruncationView};
use crate::SCHEMA_VERSION;

/// Largest supported depth.
pub const MAX_DEPTH: u32 = 62;

fn rat_str<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rat(r))
}

fn display_str<T: std::fmt::Display, S: Serializer>(t: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub level: u32,
    pub chosen: u8,
    pub sizes: [u64; 2],
    pub scores: [Score; 2],
}

/// The outcome of the greedy descent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Branch {
    pub interval: Interval,
    #[serde(rename = "B")]
    pub b: TruncationView,
    pub trace: Vec<TraceStep>,
}

/// `{n ∈ B : |x_n - midpoint| >= eps}` and its score.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    #[serde(serialize_with = "rat_str")]
    pub eps: BigRational,
    pub size: u64,
    pub score: Score,
}

/// Cross-reference to the extraction a result was transported from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transported {
    pub witness: String,
    pub selector: String,
    pub source_ideal: String,
    pub source_size: u64,
    pub source_exclusions: Vec<Exclusion>,
    /// Per `eps`: the source points mapped into the new exclusion set, scored by the source ideal.
    pub pulled_exclusions: Vec<Exclusion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtractionResult {
    pub version: &'static str,
    #[serde(serialize_with = "display_str")]
    pub ideal: IdealHandle,
    /// Greedy descent, not a proof of convergence.
    pub heuristic: bool,
    pub root_size: u64,
    pub limit: Interval,
    #[serde(rename = "B")]
    pub b: TruncationView,
    pub trace: Vec<TraceStep>,
    pub exclusions: Vec<Exclusion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transported: Option<Transported>,
}

impl ExtractionResult {
    pub fn size(&self) -> u64 {
        self.b.len() as u64
    }
}

fn scalar(h: &IdealHandle, v: &TruncationView) -> Result<Score> {
    Ok(summary(&score(h, v)?, v.cutoff))
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(BwError::Parameter(format!("depth must be in 1..={MAX_DEPTH}, got {depth}")));
    }
    Ok(())
}

/// Descends `depth` levels, taking the child with the larger score (ties to the 0-child).
pub fn select_branch(h: &IdealHandle, tree: &PartitionTree, depth: u32) -> Result<Branch> {
    check_depth(depth)?;
    if h.base().mode() == ScoreMode::Structural {
        return Err(BwError::Mode(h.to_string()));
    }
    if tree.root.is_empty() {
        return Err(BwError::EmptyRoot);
    }
    let codes = tree.codes(depth);
    let mut k = 0u64;
    let mut trace = Vec::with_capacity(depth as usize);
    for level in 1..=depth {
        let shift = depth - level;
        let child = |c: u64| tree.select(|i| codes[i] >> shift == 2 * k + c);
        let (v0, v1) = (child(0), child(1));
        let (s0, s1) = (scalar(h, &v0)?, scalar(h, &v1)?);
        let chosen = u8::from(s1.certain_cmp(&s0) == Some(std::cmp::Ordering::Greater));
        k = 2 * k + u64::from(chosen);
        trace.push(TraceStep {
            level,
            chosen,
            sizes: [v0.len() as u64, v1.len() as u64],
            scores: [s0, s1],
        });
    }
    let interval = Interval { level: depth, k };
    let b = tree.select(|i| codes[i] == k);
    Ok(Branch { interval, b, trace })
}

/// Exclusion sets of `b` around the midpoint of `limit` for `eps = 2^-L, ..., 1/2`.
pub(crate) fn exclusions(h: &IdealHandle, b: &TruncationView, values: &[BigRational], limit: &Interval) -> Result<Vec<Exclusion>> {
    let mid = limit.midpoint();
    let dist: Vec<BigRational> = values.iter().map(|v| distance(v, &mid)).collect();
    (1..=limit.level)
        .rev()
        .map(|j| {
            let eps = BigRational::new(BigInt::one(), BigInt::one() << j);
            let points = b.points.iter().zip(&dist).filter(|(_, d)| **d >= eps).map(|(p, _)| p.clone()).collect();
            let view = TruncationView { points, ..b.clone() };
            Ok(Exclusion { eps, size: view.len() as u64, score: scalar(h, &view)? })
        })
        .collect()
}

fn values_on(seq: &Sequence, b: &TruncationView) -> Result<Vec<BigRational>> {
    b.points
        .iter()
        .map(|p| seq.get(p).cloned().ok_or_else(|| BwError::Parameter(format!("the sequence has no value at {p}"))))
        .collect()
}

/// Extraction over all indices of `seq`.
pub fn extract(h: &IdealHandle, seq: &Sequence, depth: u32) -> Result<ExtractionResult> {
    extract_on(h, seq, &seq.domain(), depth)
}

/// Extraction over the index set `root`.
pub fn extract_on(h: &IdealHandle, seq: &Sequence, root: &TruncationView, depth: u32) -> Result<ExtractionResult> {
    h.check_universe(root.universe)?;
    let tree = dyadic_tree(seq, root)?;
    let branch = select_branch(h, &tree, depth)?;
    let values = values_on(seq, &branch.b)?;
    Ok(ExtractionResult {
        version: SCHEMA_VERSION,
        ideal: h.clone(),
        heuristic: true,
        root_size: root.len() as u64,
        exclusions: exclusions(h, &branch.b, &values, &branch.interval)?,
        limit: branch.interval,
        b: branch.b,
        trace: branch.trace,
        transported: None,
    })
}

/// Moves an extraction under the source ideal of `w`, made for `seq ∘ f`,
/// to one under the target ideal for `seq`, using the witness's B-selector.
pub fn transport(w: &Witness, result: &ExtractionResult, seq: &Sequence) -> Result<ExtractionResult> {
    if w.source != result.ideal {
        return Err(BwError::Parameter(format!(
            "witness {} starts from {}, the extraction is under {}",
            w.name, w.source, result.ideal
        )));
    }
    if seq.universe != w.f.codomain() {
        return Err(BwError::Parameter(format!(
            "the sequence lives on {}, the witness maps into {}",
            seq.universe.name(),
            w.f.codomain().name()
        )));
    }
    let selector = w.selector.as_ref().ok_or_else(|| ReductionError::MissingSelector(w.name.clone()))?;
    let a = SetExpr::finite(result.b.universe, result.b.points.clone())?;
    let picked = match selector.select(&a, result.b.cutoff)? {
        SetExpr::Finite(_, points) => points,
        other => unreachable!("selectors return finite sets, got {other}"),
    };
    let points: Vec<_> = picked.into_iter().filter(|p| seq.get(p).is_some()).collect();
    let b = TruncationView::new(seq.universe, seq.cutoff, points)?;
    let values = values_on(seq, &b)?;
    if let Some((p, v)) = b.points.iter().zip(&values).find(|(_, v)| !(**v >= BigRational::default() && **v <= BigRational::one())) {
        return Err(BwError::Range { index: p.to_string(), value: fmt_rat(v) });
    }
    let excl = exclusions(&w.target, &b, &values, &result.limit)?;

    let mut pulled = Vec::with_capacity(excl.len());
    let mid = result.limit.midpoint();
    for e in &excl {
        let mut points = Vec::new();
        for p in &result.b.points {
            if let Some(q) = apply(&w.f, p)? {
                if seq.get(&q).is_some_and(|v| distance(v, &mid) >= e.eps) && b.contains(&q) {
                    points.push(p.clone());
                }
            }
        }
        let view = TruncationView { points, ..result.b.clone() };
        pulled.push(Exclusion { eps: e.eps.clone(), size: view.len() as u64, score: scalar(&w.source, &view)? });
    }

    Ok(ExtractionResult {
        version: SCHEMA_VERSION,
        ideal: w.target.clone(),
        heuristic: result.heuristic,
        root_size: seq.len() as u64,
        limit: result.limit.clone(),
        b,
        trace: Vec::new(),
        exclusions: excl,
        transported: Some(Transported {
            witness: w.name.clone(),
            selector: selector.to_string(),
            source_ideal: result.ideal.to_string(),
            source_size: result.size(),
            source_exclusions: result.exclusions.clone(),
            pulled_exclusions: pulled,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bw::generate;
    use crate::ideals::make_ideal;
    use crate::point::Point;
    use crate::reductions::builtin_witness;
    use crate::score::{int, rat};
    use crate::setexpr::{parse_set, truncate};

    fn tree_of(seq: &Sequence) -> PartitionTree {
        dyadic_tree(seq, &seq.domain()).unwrap()
    }

    #[test]
    fn fin_halves_an_alternating_sequence() {
        let s = Sequence::from_values((0..11).map(|n| rat(n % 2, 1)).collect());
        let b = select_branch(&IdealHandle::fin(), &tree_of(&s), 3).unwrap();
        assert_eq!(b.interval.prefix(), "000");
        assert_eq!(b.b.nats().unwrap(), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(b.trace[0].sizes, [6, 5]);
        assert_eq!(b.trace[1].sizes, [6, 0]);
    }

    #[test]
    fn harmonic_mass_avoids_the_powers() {
        let s = generate("indicator:powers(2)", 1 << 20, 0).unwrap();
        let b = select_branch(&IdealHandle::harmonic(), &tree_of(&s), 4).unwrap();
        assert_eq!(b.interval.prefix(), "1111");
        assert!(b.trace[0].scores[0].certainly_le(&int(2)));
        assert!(b.trace[0].scores[1].certainly_gt(&int(10)));
    }

    #[test]
    fn vdw_prefers_the_complement_of_the_blocks() {
        let s = generate("indicator:blocks(10)", 1_000_000, 0).unwrap();
        let b = select_branch(&IdealHandle::vdw(), &tree_of(&s), 1).unwrap();
        assert_eq!(b.interval.prefix(), "1");
        assert_eq!(b.trace[0].scores[0], Score::from(6));
    }

    #[test]
    fn structural_ideals_are_rejected() {
        let s = Sequence::from_values(vec![rat(0, 1), rat(1, 1)]);
        let fin2 = make_ideal("fin2").unwrap();
        assert_eq!(select_branch(&fin2, &tree_of(&s), 2).unwrap_err().code(), "bw::mode");
        assert_eq!(select_branch(&IdealHandle::fin(), &tree_of(&s), 0).unwrap_err().code(), "bw::parameter");
        let empty = Sequence::from_values(Vec::new());
        assert_eq!(select_branch(&IdealHandle::fin(), &tree_of(&empty), 2).unwrap_err().code(), "bw::empty_root");
    }

    #[test]
    fn classical_extractions() {
        let alt = generate("alt", 1000, 0).unwrap();
        let r = extract(&IdealHandle::fin(), &alt, 10).unwrap();
        assert!(r.limit.contains(&rat(0, 1)) || r.limit.contains(&rat(1, 1)));
        assert!(r.size() >= 500);
        assert_eq!(r.exclusions[0].eps, rat(1, 1024));
        assert_eq!(r.exclusions[0].size, 0);

        let h = generate("harmonic", 4096, 0).unwrap();
        let r = extract(&IdealHandle::fin(), &h, 10).unwrap();
        assert_eq!(r.limit.prefix(), "0".repeat(10));
        assert_eq!(r.b.nats().unwrap(), (1024..4096).collect::<Vec<_>>());
        assert!(r.exclusions.iter().all(|e| e.size == 0));
    }

    #[test]
    fn powers_indicator_under_harmonic_mass() {
        let s = generate("indicator:powers(2)", 1 << 20, 0).unwrap();
        let r = extract(&IdealHandle::harmonic(), &s, 6).unwrap();
        assert!(r.limit.contains(&rat(1, 1)));
        assert_eq!(r.exclusions.len(), 6);
        assert!(r.exclusions.iter().all(|e| e.score.certainly_le(&int(2))));
    }

    #[test]
    fn identity_transport_changes_nothing() {
        let s = generate("random:6", 300, 11).unwrap();
        let r = extract(&IdealHandle::fin(), &s, 5).unwrap();
        let t = transport(&builtin_witness("identity(fin)").unwrap(), &r, &s).unwrap();
        assert_eq!(t.b, r.b);
        assert_eq!(t.exclusions, r.exclusions);
        assert_eq!(t.limit, r.limit);
    }

    #[test]
    fn left_summand_transport_reindexes() {
        let w = builtin_witness("oplus_left(fin,summable(harmonic))").unwrap();
        let s = generate("random:4", 200, 5).unwrap();
        let tagged = Sequence::new(
            crate::point::Universe::OmegaTagged,
            200,
            s.iter().map(|(p, v)| (Point::pair(p.as_u64().unwrap(), 0), v.clone())).collect(),
        )
        .unwrap();
        let pulled = tagged.pullback(&w.f, &s.domain()).unwrap();
        assert_eq!(pulled, s);
        let r = extract(&IdealHandle::fin(), &pulled, 4).unwrap();
        let t = transport(&w, &r, &tagged).unwrap();
        let expected: Vec<Point> = r.b.nats().unwrap().into_iter().map(|n| Point::pair(n, 0)).collect();
        assert_eq!(t.b.points, expected);
        assert!(t.exclusions.iter().zip(&r.exclusions).all(|(a, b)| a.size == b.size));
    }

    #[test]
    fn block_index_transport() {
        let w = builtin_witness("vdw_blockindex").unwrap();
        let per_block = generate("alt", 8, 0).unwrap();
        let e = parse_set("blocks(10)").unwrap();
        let window = truncate(&e, 10_000_000).unwrap();
        let seq = per_block.pullback(&w.f, &window).unwrap();
        let r = extract_on(&w.source, &seq, &seq.domain(), 3).unwrap();
        let blocks: std::collections::BTreeSet<u64> =
            r.b.nats().unwrap().iter().map(|&x| (x as f64).log10().floor() as u64).collect();
        for &k in &blocks {
            let first = 10u64.pow(k as u32);
            assert!((first..=first + k).all(|x| r.b.contains(&Point::nat(x))));
        }
        let t = transport(&w, &r, &per_block).unwrap();
        assert!(t.b.nats().unwrap().iter().all(|k| blocks.contains(k) && *k >= 2));
        assert!(!t.b.is_empty());
        assert!(t.exclusions.iter().all(|x| x.size == 0));
    }

    #[test]
    fn transport_checks_its_inputs() {
        let s = generate("alt", 10, 0).unwrap();
        let r = extract(&IdealHandle::fin(), &s, 2).unwrap();
        let w = builtin_witness("vdw_blockindex").unwrap();
        assert_eq!(transport(&w, &r, &s).unwrap_err().code(), "bw::parameter");
    }
}
