//! Witnesses for Katětov and Bolzano-Weierstrass reductions, evidence
//! checks along a schedule, and refuting constructions.

mod check;
mod refute;

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ideals::{
    self, cell_scores, certify, dsum, fubini, longest_ap, restrict, summary, CellWeights, Ideal, IdealError,
    IdealHandle, ScoreValue,
};
use crate::point::{Nat, Point, Universe};
use crate::setexpr::simplify::normalize;
use crate::setexpr::{self as sx, block_of, truncate_nats, truncate_pairs, FuncExpr, Parser, Partition, SetExpr, SetExprError, TokenKind};

pub use check::{
    bw_check, katetov_check, trend, Classification, Selection, Summary, Trend, Violation, WitnessReport, WitnessRow,
    GROWTH_TARGET,
};
pub use refute::{
    refute_edminus, refute_nwd, refute_summable, Bundle, Case1, Case2, Case2Row, CaseTag, EdminusEvidence, Evidence,
    FiberChoice, NwdEvidence, NwdPick, RefuterOutput, SummableEvidence, NWD_INTERVALS, POSITIVITY_TARGET,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("unknown witness '{0}'")]
    Unknown(String),

    #[error("cannot chain {first} after {second}: {second} reduces to {found}, {first} starts from {expected}")]
    Chain {
        first: String,
        second: String,
        expected: String,
        found: String,
    },

    #[error("witness {0} has no B-selector")]
    MissingSelector(String),

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Ideal(#[from] IdealError),

    #[error(transparent)]
    SetExpr(#[from] SetExprError),
}

impl ReductionError {
    pub fn code(&self) -> &'static str {
        match self {
            ReductionError::Unknown(_) => "reductions::unknown",
            ReductionError::Chain { .. } => "reductions::chain",
            ReductionError::MissingSelector(_) => "reductions::missing_selector",
            ReductionError::Parameter(_) => "reductions::parameter",
            ReductionError::Ideal(e) => e.code(),
            ReductionError::SetExpr(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ReductionError>;

/// How a witness picks a positive `B ⊆ f[A]` from a positive `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    /// `B = f[A]`.
    Image(FuncExpr),
    /// `B = {m : A_(m)` positive for the inner ideal`}`.
    Sections(IdealHandle),
    /// `B = {k_n : n >= 3}` with `k_n` the least block holding an `n`-term progression of `A`.
    BlockAps(Nat),
    /// `B = {n : μ_n(A) > 1/k}` with `k = floor(1/s) + 1`, `s` the largest tail cell score.
    Cells(Partition),
    /// Run the first selector, then the second on its output.
    Then(Box<Selector>, Box<Selector>),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Image(g) => write!(f, "image({g})"),
            Selector::Sections(j) => write!(f, "sections({j})"),
            Selector::BlockAps(b) => write!(f, "block_aps({b})"),
            Selector::Cells(p) => write!(f, "cells({p})"),
            Selector::Then(a, b) => write!(f, "then({a},{b})"),
        }
    }
}

impl Selector {
    /// `B` as an expression, when it can be written down exactly.
    pub fn symbolic(&self, a: &SetExpr) -> Option<SetExpr> {
        let a = normalize(a);
        match self {
            Selector::Image(f) => SetExpr::image(f.clone(), a).ok().map(|e| normalize(&e)),
            Selector::Sections(j) => match &a {
                SetExpr::Tri => Some(SetExpr::empty(Universe::Omega)),
                SetExpr::Grid(x, y) => match certify(j, y).ok()?? {
                    v if v.is_positive() => Some((**x).clone()),
                    _ => Some(SetExpr::empty(Universe::Omega)),
                },
                SetExpr::Row(m, y) => match certify(j, y).ok()?? {
                    v if v.is_positive() => SetExpr::finite(Universe::Omega, vec![Point::Nat(m.clone())]).ok(),
                    _ => Some(SetExpr::empty(Universe::Omega)),
                },
                SetExpr::Preimage(f, x) => match f.as_ref() {
                    FuncExpr::Proj1 => Some((**x).clone()),
                    FuncExpr::Proj2 => match certify(j, x).ok()?? {
                        v if v.is_positive() => SetExpr::ap(0u8, 1u8).ok(),
                        _ => Some(SetExpr::empty(Universe::Omega)),
                    },
                    _ => None,
                },
                _ => None,
            },
            Selector::BlockAps(b) => {
                let tail = SetExpr::ap(2u8, 1u8).ok()?;
                match &a {
                    SetExpr::Blocks(c) if c == b => Some(tail),
                    SetExpr::Preimage(f, x) if **f == FuncExpr::BlockIndex(b.clone()) => {
                        Some(normalize(&SetExpr::inter((**x).clone(), tail).ok()?))
                    }
                    _ => None,
                }
            }
            Selector::Cells(_) => None,
            Selector::Then(first, second) => second.symbolic(&first.symbolic(&a)?),
        }
    }

    /// `B` as observed in the cutoff-`n` truncation of `A`; always finite.
    pub fn select(&self, a: &SetExpr, n: u64) -> Result<SetExpr> {
        Ok(match self {
            Selector::Image(f) => {
                let v = sx::image(f, &sx::truncate(a, n)?)?;
                SetExpr::finite(f.codomain(), v.points)?
            }
            Selector::Sections(_) => {
                let mut rows: Vec<u64> = truncate_pairs(a, n)?.into_iter().map(|(m, _)| m).collect();
                rows.dedup();
                nat_set(rows)?
            }
            Selector::BlockAps(b) => {
                let xs = truncate_nats(a, n)?;
                nat_set(block_ap_indices(b, &xs))?
            }
            Selector::Cells(part) => {
                let xs = truncate_nats(a, n)?;
                nat_set(heavy_cells(part, &xs, n))?
            }
            Selector::Then(first, second) => second.select(&first.select(a, n)?, n)?,
        })
    }
}

fn nat_set(xs: Vec<u64>) -> Result<SetExpr> {
    Ok(SetExpr::finite(Universe::Omega, xs.into_iter().map(Point::nat).collect())?)
}

/// `{k_n : n >= 3}` where `k_n` is the least block of base `b` in which
/// the points `xs` contain an `n`-term progression.
pub fn block_ap_indices(b: &Nat, xs: &[u64]) -> Vec<u64> {
    let mut by_block: Vec<(u64, Vec<u64>)> = Vec::new();
    for &x in xs {
        let Some(k) = block_of(b, &Nat::from(x)).and_then(|k| k.to_u64()) else {
            continue;
        };
        match by_block.last_mut() {
            Some((j, v)) if *j == k => v.push(x),
            _ => by_block.push((k, vec![x])),
        }
    }
    let mut out = Vec::new();
    let mut reached = 2u64;
    for (k, v) in by_block {
        let len = longest_ap(&v).map_or(0, |p| p.length);
        if len > reached {
            out.push(k);
            reached = len;
        }
    }
    out
}

/// Cells with score above `1/k`, `k = floor(1/s) + 1`, `s` the largest
/// score over the upper half of the cells.
pub fn heavy_cells(part: &Partition, xs: &[u64], n: u64) -> Vec<u64> {
    let cells = cell_scores(part, &CellWeights::Size, xs, n);
    let s = summary(&ScoreValue::Cells { cells: cells.clone() }, n);
    let s = s.lo().clone();
    if s.is_zero() {
        return Vec::new();
    }
    let k = (BigRational::from_integer(1.into()) / s).floor() + BigRational::from_integer(1.into());
    let threshold = k.recip();
    cells.into_iter().filter(|c| c.score.lo() > &threshold).map(|c| c.cell).collect()
}

/// A function `f` from the source ideal's universe to the target's,
/// proposed as a witness for `target ≤ source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub name: String,
    pub f: FuncExpr,
    /// `J`: the ideal on the domain of `f`.
    pub source: IdealHandle,
    /// `I`: the ideal on the codomain of `f`.
    pub target: IdealHandle,
    pub selector: Option<Selector>,
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Witness", 5)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("f", &self.f.to_string())?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("selector", &self.selector.as_ref().map(|x| x.to_string()))?;
        st.end()
    }
}

impl Witness {
    pub fn new(
        name: impl Into<String>,
        f: FuncExpr,
        source: IdealHandle,
        target: IdealHandle,
        selector: Option<Selector>,
    ) -> Result<Witness> {
        source.check_universe(f.domain())?;
        target.check_universe(f.codomain())?;
        Ok(Witness { name: name.into(), f, source, target, selector })
    }
}

fn witness_args(p: &mut Parser) -> Result<Vec<IdealHandle>> {
    let mut out = Vec::new();
    if !p.eat(&TokenKind::LParen) {
        return Ok(out);
    }
    loop {
        out.push(ideals::ideal(p)?);
        if !p.eat(&TokenKind::Comma) {
            break;
        }
    }
    p.expect(TokenKind::RParen)?;
    Ok(out)
}

fn arity(name: &str, args: &[IdealHandle], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(SetExprError::Arity {
            name: name.into(),
            expected: allowed[allowed.len() - 1],
            found: args.len(),
        }
        .into())
    }
}

fn fin_pair(i: IdealHandle, j: IdealHandle) -> Result<IdealHandle> {
    if i.ideal == Ideal::Fin && j.ideal == Ideal::Fin {
        Ok(IdealHandle::new(Ideal::Fin2))
    } else {
        Ok(fubini(i, j)?)
    }
}

/// A named witness: `oplus_left(I,J)`, `fubini_proj(I,J)`,
/// `oplus_join(K,I,J,f,g)`, `identity`, `identity(I)`, `identity(I,J)`,
/// `vdw_blockindex`, `vdw_blockindex(b)` or `gden_cellindex(partition)`.
pub fn builtin_witness(text: &str) -> Result<Witness> {
    let mut p = Parser::new(text)?;
    let name = p.ident()?;
    let w = match name.as_str() {
        "oplus_left" => {
            let args = witness_args(&mut p)?;
            arity(&name, &args, &[2])?;
            let (i, j) = (args[0].clone(), args[1].clone());
            let target = dsum(i.clone(), j)?;
            Witness::new(text.trim(), FuncExpr::PairC0, i, target, Some(Selector::Image(FuncExpr::PairC0)))?
        }
        "fubini_proj" => {
            let args = witness_args(&mut p)?;
            arity(&name, &args, &[2])?;
            let (i, j) = (args[0].clone(), args[1].clone());
            let source = fin_pair(i.clone(), j.clone())?;
            Witness::new(text.trim(), FuncExpr::Proj1, source, i, Some(Selector::Sections(j)))?
        }
        "oplus_join" => {
            p.expect(TokenKind::LParen)?;
            let k = ideals::ideal(&mut p)?;
            p.expect(TokenKind::Comma)?;
            let i = ideals::ideal(&mut p)?;
            p.expect(TokenKind::Comma)?;
            let j = ideals::ideal(&mut p)?;
            p.expect(TokenKind::Comma)?;
            let f = p.func()?;
            p.expect(TokenKind::Comma)?;
            let g = p.func()?;
            p.expect(TokenKind::RParen)?;
            let h = FuncExpr::tag_join(f, g)?;
            Witness::new(text.trim(), h.clone(), dsum(i, j)?, k, Some(Selector::Image(h)))?
        }
        "identity" => {
            let args = witness_args(&mut p)?;
            arity(&name, &args, &[0, 1, 2])?;
            let (target, source) = match args.len() {
                0 => (IdealHandle::fin(), IdealHandle::fin()),
                1 => (args[0].clone(), args[0].clone()),
                _ => (args[0].clone(), args[1].clone()),
            };
            let f = FuncExpr::Id(source.universe());
            Witness::new(text.trim(), f.clone(), source, target, Some(Selector::Image(f)))?
        }
        "vdw_blockindex" => {
            let b = if p.eat(&TokenKind::LParen) {
                let b = p.nat()?;
                p.expect(TokenKind::RParen)?;
                b
            } else {
                Nat::from(10u8)
            };
            let f = FuncExpr::block_index(b.clone())?;
            let source = restrict(IdealHandle::vdw(), SetExpr::blocks(b.clone())?)?;
            Witness::new(text.trim(), f, source, IdealHandle::fin(), Some(Selector::BlockAps(b)))?
        }
        "gden_cellindex" => {
            p.expect(TokenKind::LParen)?;
            let part = p.partition()?;
            p.expect(TokenKind::RParen)?;
            let source = IdealHandle::new(Ideal::Density(part.clone(), CellWeights::Size));
            Witness::new(text.trim(), FuncExpr::CellIndex(part.clone()), source, IdealHandle::fin(), Some(Selector::Cells(part)))?
        }
        other => return Err(ReductionError::Unknown(other.to_string())),
    };
    p.finish()?;
    Ok(w)
}

/// Chains `w1: I ≤ J` after `w2: J ≤ K` into a witness for `I ≤ K`
/// with function `w1.f ∘ w2.f`.
pub fn compose(w1: &Witness, w2: &Witness) -> Result<Witness> {
    if w1.source != w2.target {
        return Err(ReductionError::Chain {
            first: w1.name.clone(),
            second: w2.name.clone(),
            expected: w1.source.to_string(),
            found: w2.target.to_string(),
        });
    }
    let f = FuncExpr::compose(w1.f.clone(), w2.f.clone())?.simplified();
    let selector = match (&w2.selector, &w1.selector) {
        (Some(s2), Some(s1)) => Some(Selector::Then(Box::new(s2.clone()), Box::new(s1.clone()))),
        _ => None,
    };
    Ok(Witness {
        name: format!("compose({},{})", w1.name, w2.name),
        f,
        source: w2.source.clone(),
        target: w1.target.clone(),
        selector,
    })
}
