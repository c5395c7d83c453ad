//! A catalog of ideals on countable sets: handles, truncation scores and
//! rule-based membership verdicts.

pub mod ap;
mod decide;
mod scores;
pub mod weights;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::point::Universe;
use crate::setexpr::{Parser, Partition, SetExpr, SetExprError, TokenKind};

pub use ap::{longest_ap, Progression};
pub use decide::{certify, decide, decide_at, split_tagged, Certificate, Diagnostics, Verdict};
pub use scores::{
    cell_scores, cells_below, default_schedule, nwd_score, score, score_expr, score_series, sections, summary,
    CellScore, FubiniDiagnostics, ScoreSeries, ScoreValue,
};
pub use weights::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("unknown ideal '{0}'")]
    Unknown(String),

    #[error("bad ideal parameter: {0}")]
    Parameter(String),

    #[error("ideal {ideal} lives on {expected}, not {found}")]
    UniverseMismatch {
        ideal: String,
        expected: Universe,
        found: Universe,
    },

    #[error("restriction of {ideal} to {set} needs a set certified positive, got {verdict}")]
    NotPositive {
        ideal: String,
        set: String,
        verdict: String,
    },

    #[error("empty view")]
    EmptyView,

    #[error(transparent)]
    SetExpr(#[from] SetExprError),
}

impl IdealError {
    pub fn code(&self) -> &'static str {
        match self {
            IdealError::Unknown(_) => "ideals::unknown",
            IdealError::Parameter(_) => "ideals::parameter",
            IdealError::UniverseMismatch { .. } => "ideals::universe",
            IdealError::NotPositive { .. } => "ideals::not_positive",
            IdealError::EmptyView => "ideals::empty_view",
            IdealError::SetExpr(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, IdealError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScoreMode {
    UnboundedMeansPositive,
    VanishingMeansSmall,
    Structural,
}

/// Per-cell normalizer `w_n` of a generalized density.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CellWeights {
    /// `w_n = |I_n|`.
    Size,
    /// `w_n = c`.
    Const(u64),
}

impl fmt::Display for CellWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellWeights::Size => f.write_str("size"),
            CellWeights::Const(c) => write!(f, "const({c})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ideal {
    Fin,
    Summable(Weight),
    /// Generalized density `lim μ_n(A ∩ I_n) = 0` with `μ_n(F) = |F|/w_n`.
    /// Asymptotic density is the dyadic partition with size weights.
    Density(Partition, CellWeights),
    Vdw,
    EdMinus,
    Nwd,
    Fin2,
    Dsum(Box<IdealHandle>, Box<IdealHandle>),
    Fubini(Box<IdealHandle>, Box<IdealHandle>),
    Restrict(Box<IdealHandle>, SetExpr),
}

/// An immutable catalog ideal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealHandle {
    pub ideal: Ideal,
}

impl IdealHandle {
    pub fn new(ideal: Ideal) -> IdealHandle {
        IdealHandle { ideal }
    }

    pub fn fin() -> IdealHandle {
        IdealHandle::new(Ideal::Fin)
    }

    pub fn harmonic() -> IdealHandle {
        IdealHandle::new(Ideal::Summable(Weight::Harmonic))
    }

    pub fn vdw() -> IdealHandle {
        IdealHandle::new(Ideal::Vdw)
    }

    pub fn density() -> IdealHandle {
        IdealHandle::new(Ideal::Density(Partition::Dyadic, CellWeights::Size))
    }

    pub fn universe(&self) -> Universe {
        match &self.ideal {
            Ideal::Fin | Ideal::Summable(_) | Ideal::Density(..) | Ideal::Vdw => Universe::Omega,
            Ideal::EdMinus | Ideal::Fin2 | Ideal::Fubini(..) => Universe::OmegaSq,
            Ideal::Nwd => Universe::QUnit,
            Ideal::Dsum(..) => Universe::OmegaTagged,
            Ideal::Restrict(inner, _) => inner.universe(),
        }
    }

    pub fn mode(&self) -> ScoreMode {
        match &self.ideal {
            Ideal::Fin | Ideal::Summable(_) | Ideal::Vdw | Ideal::EdMinus | Ideal::Nwd => {
                ScoreMode::UnboundedMeansPositive
            }
            Ideal::Density(..) => ScoreMode::VanishingMeansSmall,
            Ideal::Fin2 | Ideal::Dsum(..) | Ideal::Fubini(..) | Ideal::Restrict(..) => ScoreMode::Structural,
        }
    }

    pub fn check_set(&self, e: &SetExpr) -> Result<()> {
        if e.universe() != self.universe() {
            return Err(IdealError::UniverseMismatch {
                ideal: self.to_string(),
                expected: self.universe(),
                found: e.universe(),
            });
        }
        Ok(())
    }

    pub fn check_universe(&self, u: Universe) -> Result<()> {
        if u != self.universe() {
            return Err(IdealError::UniverseMismatch {
                ideal: self.to_string(),
                expected: self.universe(),
                found: u,
            });
        }
        Ok(())
    }

    /// The ideal underneath any restrictions.
    pub fn base(&self) -> &IdealHandle {
        match &self.ideal {
            Ideal::Restrict(inner, _) => inner.base(),
            _ => self,
        }
    }
}

impl fmt::Display for IdealHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.ideal {
            Ideal::Fin => f.write_str("fin"),
            Ideal::Summable(w) => write!(f, "summable({w})"),
            Ideal::Density(Partition::Dyadic, CellWeights::Size) => f.write_str("density"),
            Ideal::Density(p, w) => write!(f, "gdensity({p},{w})"),
            Ideal::Vdw => f.write_str("vdw"),
            Ideal::EdMinus => f.write_str("edminus"),
            Ideal::Nwd => f.write_str("nwd"),
            Ideal::Fin2 => f.write_str("fin2"),
            Ideal::Dsum(a, b) => write!(f, "dsum({a},{b})"),
            Ideal::Fubini(a, b) => write!(f, "fubini({a},{b})"),
            Ideal::Restrict(a, e) => write!(f, "restrict({a},{e})"),
        }
    }
}

impl Serialize for IdealHandle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `I ⊕ J` on `ω × {0,1}`.
pub fn dsum(i: IdealHandle, j: IdealHandle) -> Result<IdealHandle> {
    for h in [&i, &j] {
        h.check_universe(Universe::Omega)?;
    }
    Ok(IdealHandle::new(Ideal::Dsum(Box::new(i), Box::new(j))))
}

/// `I ⊗ J` on `ω²`: `A` is small when `{m : A_(m) ∉ J} ∈ I`.
pub fn fubini(i: IdealHandle, j: IdealHandle) -> Result<IdealHandle> {
    for h in [&i, &j] {
        h.check_universe(Universe::Omega)?;
    }
    Ok(IdealHandle::new(Ideal::Fubini(Box::new(i), Box::new(j))))
}

/// `I|A`; `A` must be certified `I`-positive.
pub fn restrict(i: IdealHandle, a: SetExpr) -> Result<IdealHandle> {
    i.check_set(&a)?;
    let v = decide(&i, &a)?;
    if !v.is_positive() {
        return Err(IdealError::NotPositive {
            ideal: i.to_string(),
            set: a.to_string(),
            verdict: v.kind().to_string(),
        });
    }
    Ok(IdealHandle::new(Ideal::Restrict(Box::new(i), a)))
}

/// Parses a catalog descriptor such as `summable(pow,3/2)` or
/// `restrict(vdw, blocks(10))`.
pub fn make_ideal(text: &str) -> Result<IdealHandle> {
    let mut p = Parser::new(text)?;
    let h = ideal(&mut p)?;
    p.finish()?;
    Ok(h)
}

fn rational(p: &mut Parser) -> Result<BigRational> {
    let num = p.nat()?;
    let den = if p.eat(&TokenKind::Slash) { p.nat()? } else { One::one() };
    if den.is_zero() {
        return Err(IdealError::Parameter("zero denominator".into()));
    }
    Ok(BigRational::new(num.into(), den.into()))
}

fn open(p: &mut Parser) -> Result<()> {
    Ok(p.expect(TokenKind::LParen)?)
}

fn comma(p: &mut Parser) -> Result<()> {
    Ok(p.expect(TokenKind::Comma)?)
}

fn close(p: &mut Parser) -> Result<()> {
    Ok(p.expect(TokenKind::RParen)?)
}

pub fn ideal(p: &mut Parser) -> Result<IdealHandle> {
    let name = p.ident()?;
    let ideal = match name.as_str() {
        "fin" => Ideal::Fin,
        "density" => Ideal::Density(Partition::Dyadic, CellWeights::Size),
        "vdw" => Ideal::Vdw,
        "edminus" => Ideal::EdMinus,
        "nwd" => Ideal::Nwd,
        "fin2" => Ideal::Fin2,
        "summable" => {
            open(p)?;
            let family = p.ident()?;
            let w = match family.as_str() {
                "harmonic" => Weight::Harmonic,
                "pow" => {
                    comma(p)?;
                    let e = rational(p)?;
                    if e < BigRational::one() {
                        return Err(IdealError::Parameter(format!("pow exponent must be at least 1, got {e}")));
                    }
                    if e.numer() > &1024.into() || e.denom() > &64.into() {
                        return Err(IdealError::Parameter(format!("pow exponent {e} is too large")));
                    }
                    if e.is_one() {
                        Weight::Harmonic
                    } else {
                        Weight::Pow(e)
                    }
                }
                "geom" => {
                    comma(p)?;
                    let r = rational(p)?;
                    if r.is_zero() || r >= BigRational::one() {
                        return Err(IdealError::Parameter(format!("geom ratio must lie in (0,1), got {r}")));
                    }
                    Weight::Geom(r)
                }
                other => return Err(IdealError::Unknown(format!("summable({other})"))),
            };
            close(p)?;
            Ideal::Summable(w)
        }
        "gdensity" => {
            open(p)?;
            let part = p.partition()?;
            comma(p)?;
            let w = match p.ident()?.as_str() {
                "size" => CellWeights::Size,
                "const" => {
                    open(p)?;
                    let c = p.nat_u64()?;
                    close(p)?;
                    if c == 0 {
                        return Err(IdealError::Parameter("const weight must be positive".into()));
                    }
                    CellWeights::Const(c)
                }
                other => return Err(IdealError::Unknown(format!("cell weights '{other}'"))),
            };
            close(p)?;
            Ideal::Density(part, w)
        }
        "dsum" | "fubini" => {
            open(p)?;
            let a = ideal(p)?;
            comma(p)?;
            let b = ideal(p)?;
            close(p)?;
            return if name == "dsum" { dsum(a, b) } else { fubini(a, b) };
        }
        "restrict" => {
            open(p)?;
            let a = ideal(p)?;
            comma(p)?;
            let e = p.set()?;
            close(p)?;
            return restrict(a, e);
        }
        other => return Err(IdealError::Unknown(other.to_string())),
    };
    Ok(IdealHandle::new(ideal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_and_universes() {
        let h = make_ideal("summable(harmonic)").unwrap();
        assert_eq!(h.universe(), Universe::Omega);
        assert_eq!(h.mode(), ScoreMode::UnboundedMeansPositive);
        assert_eq!(make_ideal("fubini(fin,fin)").unwrap().universe(), Universe::OmegaSq);
        assert_eq!(make_ideal("edminus").unwrap().universe(), Universe::OmegaSq);
        assert_eq!(make_ideal("nwd").unwrap().universe(), Universe::QUnit);
        assert_eq!(make_ideal("dsum(vdw,fin)").unwrap().universe(), Universe::OmegaTagged);
        let r = make_ideal("restrict(vdw, blocks(10))").unwrap();
        assert_eq!(r.to_string(), "restrict(vdw,blocks(10))");
        assert_eq!(make_ideal("density").unwrap().mode(), ScoreMode::VanishingMeansSmall);
    }

    #[test]
    fn descriptor_round_trip() {
        for d in [
            "fin",
            "summable(pow,3/2)",
            "summable(geom,1/2)",
            "gdensity(blocks(10),size)",
            "gdensity(dyadic,const(3))",
            "dsum(vdw,fin)",
            "fubini(fin,summable(harmonic))",
        ] {
            assert_eq!(make_ideal(d).unwrap().to_string(), d);
        }
        assert_eq!(make_ideal("summable(pow,1)").unwrap().to_string(), "summable(harmonic)");
    }

    #[test]
    fn descriptor_errors() {
        assert_eq!(make_ideal("tall").unwrap_err().code(), "ideals::unknown");
        assert_eq!(make_ideal("summable(geom,3/2)").unwrap_err().code(), "ideals::parameter");
        assert_eq!(make_ideal("summable(pow,1/2)").unwrap_err().code(), "ideals::parameter");
        assert_eq!(make_ideal("dsum(edminus,fin)").unwrap_err().code(), "ideals::universe");
        assert_eq!(make_ideal("restrict(vdw,tri)").unwrap_err().code(), "ideals::universe");
        assert_eq!(make_ideal("restrict(vdw,powers(2))").unwrap_err().code(), "ideals::not_positive");
        assert_eq!(make_ideal("fin(").unwrap_err().code(), "setexpr::syntax");
    }
}
