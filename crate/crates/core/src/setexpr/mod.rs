//! A small language of finitely describable sets and functions.
//!
//! Sets live in one of the [`Universe`]s; functions map between them.
//! [`parse_set`] and [`parse_func`] accept the surface syntax, `Display`
//! prints it back canonically, and the `eval`/`truncate` submodules decide
//! membership and enumerate finite windows exactly.

mod eval;
mod lexer;
mod parser;
pub mod simplify;
mod truncate;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::point::{Frac, Nat, Point, Universe};

pub use eval::{apply, contains, preimage_points};
pub use lexer::{Lexer, Token, TokenKind};
pub use parser::{parse_func, parse_point, parse_set, Parser};
pub use truncate::{image, preimage, truncate, TruncationView};
pub(crate) use truncate::{truncate_nats, truncate_pairs};
pub(crate) use eval::block_of;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetExprError {
    #[error("syntax error at {pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("{name} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("universe mismatch in {context}: expected {expected}, found {found}")]
    UniverseMismatch {
        context: String,
        expected: Universe,
        found: Universe,
    },

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("not decidable by bounded search: {0}")]
    Undecidable(String),

    #[error("outside the supported evaluation range: {0}")]
    Budget(String),
}

impl SetExprError {
    pub fn code(&self) -> &'static str {
        match self {
            SetExprError::Syntax { .. } => "setexpr::syntax",
            SetExprError::Arity { .. } => "setexpr::arity",
            SetExprError::UniverseMismatch { .. } => "setexpr::universe",
            SetExprError::Parameter(_) => "setexpr::parameter",
            SetExprError::Undecidable(_) => "setexpr::undecidable",
            SetExprError::Budget(_) => "setexpr::budget",
        }
    }
}

pub type Result<T> = std::result::Result<T, SetExprError>;

/// How a partition of ω into finite cells is described.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Partition {
    /// `I_n = [2^n, 2^(n+1))`.
    Dyadic,
    /// `I_n = {b^n, ..., b^n + n}`.
    Blocks(u64),
}

impl Partition {
    /// First and last element of cell `n`, or `None` past `u64`.
    pub fn cell_bounds(&self, n: u64) -> Option<(u64, u64)> {
        match self {
            Partition::Dyadic => {
                let lo = 1u64.checked_shl(n as u32).filter(|_| n < 64)?;
                Some((lo, lo.checked_mul(2).map(|v| v - 1).unwrap_or(u64::MAX)))
            }
            Partition::Blocks(b) => {
                let lo = b.checked_pow(u32::try_from(n).ok()?)?;
                Some((lo, lo.checked_add(n)?))
            }
        }
    }

    /// Number of elements in cell `n`, as an arbitrary precision natural.
    pub fn cell_size(&self, n: u64) -> Nat {
        match self {
            Partition::Dyadic => Nat::from(1u8) << n,
            Partition::Blocks(_) => Nat::from(n + 1),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Dyadic => f.write_str("dyadic"),
            Partition::Blocks(b) => write!(f, "blocks({b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetExpr {
    /// Explicit finite set, sorted and deduplicated.
    Finite(Universe, Vec<Point>),
    /// `[a, b)`.
    Range(Nat, Nat),
    /// `{a + kd : k >= 0}`, `d >= 1`.
    Ap(Nat, Nat),
    Evens,
    Odds,
    Squares,
    /// `{b^k : k >= 0}`.
    Powers(Nat),
    /// Union of the blocks `{b^n, ..., b^n + n}` over all `n`.
    Blocks(Nat),
    /// The single block `{b^n, ..., b^n + n}`.
    Block(Nat, Nat),
    /// `{(m, n) : n <= m}`.
    Tri,
    Grid(Box<SetExpr>, Box<SetExpr>),
    Row(Nat, Box<SetExpr>),
    Union(Box<SetExpr>, Box<SetExpr>),
    Inter(Box<SetExpr>, Box<SetExpr>),
    Diff(Box<SetExpr>, Box<SetExpr>),
    Image(Box<FuncExpr>, Box<SetExpr>),
    Preimage(Box<FuncExpr>, Box<SetExpr>),
    Tag0(Box<SetExpr>),
    Tag1(Box<SetExpr>),
    QAll,
    /// Rationals `q` in `[0,1]` with `|q - center| < radius`.
    QBall(Frac, Frac),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FuncExpr {
    Id(Universe),
    /// `(m, n) -> m`
    Proj1,
    /// `(m, n) -> n`
    Proj2,
    /// `i -> (i, 0)`
    PairC0,
    /// `(n, 0) -> f(n)`, `(n, 1) -> g(n)`.
    TagJoin(Box<FuncExpr>, Box<FuncExpr>),
    /// Index of the block containing the argument; undefined off `Blocks(b)`.
    BlockIndex(Nat),
    /// Index of the partition cell containing the argument.
    CellIndex(Partition),
    Table(BTreeMap<Nat, Point>, Point),
    /// `Compose(f, g) = f . g`.
    Compose(Box<FuncExpr>, Box<FuncExpr>),
    /// Enumeration index of a rational.
    QIndex,
    /// `n -> n mod k`.
    Mod(Nat),
    /// Cantor pairing `(m, n) -> (m+n)(m+n+1)/2 + n`.
    Cantor,
}

fn mismatch(context: &str, expected: Universe, found: Universe) -> SetExprError {
    SetExprError::UniverseMismatch {
        context: context.to_string(),
        expected,
        found,
    }
}

fn expect_universe(context: &str, e: &SetExpr, u: Universe) -> Result<()> {
    let found = e.universe();
    if found == u {
        Ok(())
    } else {
        Err(mismatch(context, u, found))
    }
}

impl SetExpr {
    pub fn universe(&self) -> Universe {
        match self {
            SetExpr::Finite(u, _) => *u,
            SetExpr::Range(..)
            | SetExpr::Ap(..)
            | SetExpr::Evens
            | SetExpr::Odds
            | SetExpr::Squares
            | SetExpr::Powers(_)
            | SetExpr::Blocks(_)
            | SetExpr::Block(..) => Universe::Omega,
            SetExpr::Tri | SetExpr::Grid(..) | SetExpr::Row(..) => Universe::OmegaSq,
            SetExpr::Union(a, _) | SetExpr::Inter(a, _) | SetExpr::Diff(a, _) => a.universe(),
            SetExpr::Image(f, _) => f.codomain(),
            SetExpr::Preimage(f, _) => f.domain(),
            SetExpr::Tag0(_) | SetExpr::Tag1(_) => Universe::OmegaTagged,
            SetExpr::QAll | SetExpr::QBall(..) => Universe::QUnit,
        }
    }

    pub fn finite(universe: Universe, points: Vec<Point>) -> Result<SetExpr> {
        let mut points = points;
        for p in &points {
            p.check(universe)?;
        }
        points.sort();
        points.dedup();
        Ok(SetExpr::Finite(universe, points))
    }

    pub fn empty(universe: Universe) -> SetExpr {
        SetExpr::Finite(universe, Vec::new())
    }

    pub fn ap(a: impl Into<Nat>, d: impl Into<Nat>) -> Result<SetExpr> {
        let d = d.into();
        if d.is_zero() {
            return Err(SetExprError::Parameter("ap difference must be at least 1".into()));
        }
        Ok(SetExpr::Ap(a.into(), d))
    }

    pub fn powers(b: impl Into<Nat>) -> Result<SetExpr> {
        let b = b.into();
        check_base("powers", &b)?;
        Ok(SetExpr::Powers(b))
    }

    pub fn blocks(b: impl Into<Nat>) -> Result<SetExpr> {
        let b = b.into();
        check_base("blocks", &b)?;
        Ok(SetExpr::Blocks(b))
    }

    pub fn block(b: impl Into<Nat>, n: impl Into<Nat>) -> Result<SetExpr> {
        let b = b.into();
        check_base("block", &b)?;
        Ok(SetExpr::Block(b, n.into()))
    }

    pub fn grid(a: SetExpr, b: SetExpr) -> Result<SetExpr> {
        expect_universe("grid", &a, Universe::Omega)?;
        expect_universe("grid", &b, Universe::Omega)?;
        Ok(SetExpr::Grid(Box::new(a), Box::new(b)))
    }

    pub fn row(m: impl Into<Nat>, e: SetExpr) -> Result<SetExpr> {
        expect_universe("row", &e, Universe::Omega)?;
        Ok(SetExpr::Row(m.into(), Box::new(e)))
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Result<SetExpr> {
        expect_universe("union", &b, a.universe())?;
        Ok(SetExpr::Union(Box::new(a), Box::new(b)))
    }

    pub fn inter(a: SetExpr, b: SetExpr) -> Result<SetExpr> {
        expect_universe("intersection", &b, a.universe())?;
        Ok(SetExpr::Inter(Box::new(a), Box::new(b)))
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> Result<SetExpr> {
        expect_universe("difference", &b, a.universe())?;
        Ok(SetExpr::Diff(Box::new(a), Box::new(b)))
    }

    pub fn image(f: FuncExpr, e: SetExpr) -> Result<SetExpr> {
        let f = f.adapt_identity(e.universe());
        expect_universe("img", &e, f.domain())?;
        Ok(SetExpr::Image(Box::new(f), Box::new(e)))
    }

    pub fn preimage(f: FuncExpr, e: SetExpr) -> Result<SetExpr> {
        let f = f.adapt_identity(e.universe());
        expect_universe("pre", &e, f.codomain())?;
        Ok(SetExpr::Preimage(Box::new(f), Box::new(e)))
    }

    pub fn tag0(e: SetExpr) -> Result<SetExpr> {
        expect_universe("tag0", &e, Universe::Omega)?;
        Ok(SetExpr::Tag0(Box::new(e)))
    }

    pub fn tag1(e: SetExpr) -> Result<SetExpr> {
        expect_universe("tag1", &e, Universe::Omega)?;
        Ok(SetExpr::Tag1(Box::new(e)))
    }

    /// Number of nodes, used to bound generated test expressions.
    pub fn depth(&self) -> usize {
        match self {
            SetExpr::Grid(a, b)
            | SetExpr::Union(a, b)
            | SetExpr::Inter(a, b)
            | SetExpr::Diff(a, b) => 1 + a.depth().max(b.depth()),
            SetExpr::Row(_, e)
            | SetExpr::Image(_, e)
            | SetExpr::Preimage(_, e)
            | SetExpr::Tag0(e)
            | SetExpr::Tag1(e) => 1 + e.depth(),
            _ => 1,
        }
    }
}

fn check_base(name: &str, b: &Nat) -> Result<()> {
    if *b < Nat::from(2u8) {
        Err(SetExprError::Parameter(format!("{name} base must be at least 2, got {b}")))
    } else {
        Ok(())
    }
}

impl FuncExpr {
    pub fn domain(&self) -> Universe {
        match self {
            FuncExpr::Id(u) => *u,
            FuncExpr::Proj1 | FuncExpr::Proj2 | FuncExpr::Cantor => Universe::OmegaSq,
            FuncExpr::PairC0
            | FuncExpr::BlockIndex(_)
            | FuncExpr::CellIndex(_)
            | FuncExpr::Table(..)
            | FuncExpr::Mod(_) => Universe::Omega,
            FuncExpr::TagJoin(..) => Universe::OmegaTagged,
            FuncExpr::Compose(_, g) => g.domain(),
            FuncExpr::QIndex => Universe::QUnit,
        }
    }

    pub fn codomain(&self) -> Universe {
        match self {
            FuncExpr::Id(u) => *u,
            FuncExpr::Proj1
            | FuncExpr::Proj2
            | FuncExpr::Cantor
            | FuncExpr::BlockIndex(_)
            | FuncExpr::CellIndex(_)
            | FuncExpr::Mod(_)
            | FuncExpr::QIndex => Universe::Omega,
            FuncExpr::PairC0 => Universe::OmegaTagged,
            FuncExpr::TagJoin(f, _) => f.codomain(),
            FuncExpr::Table(_, default) => default.natural_universe(),
            FuncExpr::Compose(f, _) => f.codomain(),
        }
    }

    pub fn compose(f: FuncExpr, g: FuncExpr) -> Result<FuncExpr> {
        if g.codomain() != f.domain() {
            return Err(mismatch("comp", f.domain(), g.codomain()));
        }
        Ok(FuncExpr::Compose(Box::new(f), Box::new(g)))
    }

    pub fn tag_join(f: FuncExpr, g: FuncExpr) -> Result<FuncExpr> {
        if f.domain() != Universe::Omega {
            return Err(mismatch("tagjoin", Universe::Omega, f.domain()));
        }
        if g.domain() != Universe::Omega {
            return Err(mismatch("tagjoin", Universe::Omega, g.domain()));
        }
        if f.codomain() != g.codomain() {
            return Err(mismatch("tagjoin", f.codomain(), g.codomain()));
        }
        Ok(FuncExpr::TagJoin(Box::new(f), Box::new(g)))
    }

    pub fn block_index(b: impl Into<Nat>) -> Result<FuncExpr> {
        let b = b.into();
        check_base("blockindex", &b)?;
        Ok(FuncExpr::BlockIndex(b))
    }

    pub fn table(entries: BTreeMap<Nat, Point>, default: Point) -> Result<FuncExpr> {
        let u = default.natural_universe();
        for v in entries.values() {
            v.check(u)?;
        }
        Ok(FuncExpr::Table(entries, default))
    }

    pub fn modulo(k: impl Into<Nat>) -> Result<FuncExpr> {
        let k = k.into();
        if k.is_zero() {
            return Err(SetExprError::Parameter("mod needs a positive modulus".into()));
        }
        Ok(FuncExpr::Mod(k))
    }

    /// A bare `id` is parsed on Omega; inside `img`/`pre` it takes the
    /// universe of the set it is applied to.
    fn adapt_identity(self, u: Universe) -> FuncExpr {
        match self {
            FuncExpr::Id(_) => FuncExpr::Id(u),
            other => other,
        }
    }

    /// Drops identity factors from compositions.
    pub fn simplified(&self) -> FuncExpr {
        match self {
            FuncExpr::Compose(f, g) => match (f.simplified(), g.simplified()) {
                (FuncExpr::Id(_), g) => g,
                (f, FuncExpr::Id(_)) => f,
                (f, g) => FuncExpr::Compose(Box::new(f), Box::new(g)),
            },
            FuncExpr::TagJoin(f, g) => {
                FuncExpr::TagJoin(Box::new(f.simplified()), Box::new(g.simplified()))
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Finite(_, points) => {
                f.write_str("{")?;
                for (i, p) in points.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
            SetExpr::Range(a, b) => write!(f, "range({a},{b})"),
            SetExpr::Ap(a, d) => write!(f, "ap({a},{d})"),
            SetExpr::Evens => f.write_str("evens"),
            SetExpr::Odds => f.write_str("odds"),
            SetExpr::Squares => f.write_str("squares"),
            SetExpr::Powers(b) => write!(f, "powers({b})"),
            SetExpr::Blocks(b) => write!(f, "blocks({b})"),
            SetExpr::Block(b, n) => write!(f, "block({b},{n})"),
            SetExpr::Tri => f.write_str("tri"),
            SetExpr::Grid(a, b) => write!(f, "grid({a},{b})"),
            SetExpr::Row(m, e) => write!(f, "row({m},{e})"),
            SetExpr::Union(a, b) => write!(f, "({a}|{b})"),
            SetExpr::Inter(a, b) => write!(f, "({a}&{b})"),
            SetExpr::Diff(a, b) => write!(f, "({a}\\{b})"),
            SetExpr::Image(g, e) => write!(f, "img({g},{e})"),
            SetExpr::Preimage(g, e) => write!(f, "pre({g},{e})"),
            SetExpr::Tag0(e) => write!(f, "tag0({e})"),
            SetExpr::Tag1(e) => write!(f, "tag1({e})"),
            SetExpr::QAll => f.write_str("qall"),
            SetExpr::QBall(c, r) => write!(f, "qball({c},{r})"),
        }
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncExpr::Id(_) => f.write_str("id"),
            FuncExpr::Proj1 => f.write_str("proj1"),
            FuncExpr::Proj2 => f.write_str("proj2"),
            FuncExpr::PairC0 => f.write_str("pairc0"),
            FuncExpr::TagJoin(a, b) => write!(f, "tagjoin({a},{b})"),
            FuncExpr::BlockIndex(b) => write!(f, "blockindex({b})"),
            FuncExpr::CellIndex(p) => write!(f, "cellindex({p})"),
            FuncExpr::Table(entries, default) => {
                f.write_str("table{")?;
                for (k, v) in entries {
                    write!(f, "{k}->{v},")?;
                }
                write!(f, "default->{default}}}")
            }
            FuncExpr::Compose(a, b) => write!(f, "comp({a},{b})"),
            FuncExpr::QIndex => f.write_str("qindex"),
            FuncExpr::Mod(k) => write!(f, "mod({k})"),
            FuncExpr::Cantor => f.write_str("cantor"),
        }
    }
}
