//! Ideal-convergent subsequence extraction for `[0,1]`-valued sequences.

mod extract;
mod fin2;
mod sequence;
mod tree;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::ideals::IdealError;
use crate::reductions::ReductionError;
use crate::score::fmt_rat;
use crate::setexpr::SetExprError;

pub use extract::{extract, extract_on, select_branch, transport, Branch, Exclusion, ExtractionResult, TraceStep, Transported, MAX_DEPTH};
pub use fin2::{fin2_extract, proof_cover, Cover, Fin2Exclusion, Fin2ExtractionResult, RowExtraction, RowSection};
pub use sequence::{generate, generate_rows, read_csv, write_csv, Sequence};
pub use tree::{dyadic_tree, PartitionTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BwError {
    #[error("value {value} at {index} is outside [0,1]")]
    Range { index: String, value: String },

    #[error("the root set is empty")]
    EmptyRoot,

    #[error("ideal {0} has no score to descend by")]
    Mode(String),

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("bad sequence input: {0}")]
    Input(String),

    #[error(transparent)]
    Ideal(#[from] IdealError),

    #[error(transparent)]
    SetExpr(#[from] SetExprError),

    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

impl BwError {
    pub fn code(&self) -> &'static str {
        match self {
            BwError::Range { .. } => "bw::range",
            BwError::EmptyRoot => "bw::empty_root",
            BwError::Mode(_) => "bw::mode",
            BwError::Parameter(_) => "bw::parameter",
            BwError::Input(_) => "bw::input",
            BwError::Ideal(e) => e.code(),
            BwError::SetExpr(e) => e.code(),
            BwError::Reduction(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, BwError>;

/// A dyadic interval `[k 2^-L, (k+1) 2^-L)`, closed on the right when it is the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub level: u32,
    pub k: u64,
}

impl Interval {
    /// The interval coded by a binary string, most significant bit first.
    pub fn from_prefix(s: &str) -> Result<Interval> {
        if s.len() > 63 || !s.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(BwError::Parameter(format!("'{s}' is not a binary string of length <= 63")));
        }
        let k = if s.is_empty() { 0 } else { u64::from_str_radix(s, 2).expect("checked digits") };
        Ok(Interval { level: s.len() as u32, k })
    }

    pub fn prefix(&self) -> String {
        if self.level == 0 {
            String::new()
        } else {
            format!("{:0width$b}", self.k, width = self.level as usize)
        }
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(BigInt::from(self.k), BigInt::one() << self.level)
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(BigInt::from(self.k + 1), BigInt::one() << self.level)
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.level)
    }

    pub fn midpoint(&self) -> BigRational {
        BigRational::new(BigInt::from(2 * self.k + 1), BigInt::one() << (self.level + 1))
    }

    pub fn is_last(&self) -> bool {
        self.k + 1 == 1u64 << self.level
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        code(v, self.level) == self.k
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.is_last() { ']' } else { ')' };
        write!(f, "[{},{}{close}", fmt_rat(&self.lo()), fmt_rat(&self.hi()))
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 4)?;
        st.serialize_field("prefix", &self.prefix())?;
        st.serialize_field("lo", &fmt_rat(&self.lo()))?;
        st.serialize_field("hi", &fmt_rat(&self.hi()))?;
        st.serialize_field("closed", &self.is_last())?;
        st.end()
    }
}

/// Index of the depth-`level` dyadic interval holding `v ∈ [0,1]`.
pub(crate) fn code(v: &BigRational, level: u32) -> u64 {
    let top = (1u64 << level) - 1;
    let q: BigInt = (v.numer() << level) / v.denom();
    u64::try_from(q).map_or(top, |q| q.min(top))
}

/// `|a - b|`.
pub(crate) fn distance(a: &BigRational, b: &BigRational) -> BigRational {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::rat;

    #[test]
    fn intervals_and_codes() {
        let i = Interval::from_prefix("011").unwrap();
        assert_eq!((i.lo(), i.hi(), i.midpoint()), (rat(3, 8), rat(1, 2), rat(7, 16)));
        assert_eq!(i.to_string(), "[3/8,1/2)");
        assert_eq!(Interval::from_prefix("11").unwrap().to_string(), "[3/4,1]");
        assert_eq!(code(&rat(1, 1), 3), 7);
        assert_eq!(code(&rat(1, 2), 1), 1);
        assert_eq!(code(&rat(0, 1), 5), 0);
        assert!(Interval::from_prefix("").unwrap().contains(&rat(1, 1)));
        assert!(!Interval::from_prefix("0").unwrap().contains(&rat(1, 2)));
        assert!(Interval::from_prefix("01x").is_err());
    }
}
