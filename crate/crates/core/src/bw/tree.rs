//! The binary partition tree `A_s` cut out by dyadic intervals.

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{code, BwError, Interval, Result, Sequence};
use crate::score::fmt_rat;
use crate::setexpr::TruncationView;

/// `A_s = {n ∈ A : x_n ∈ interval(s)}` for every binary string `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTree {
    pub root: TruncationView,
    /// `x_n` for the points of the root, in the same order.
    pub values: Vec<BigRational>,
}

/// The tree of `seq` over the index set `a`.
pub fn dyadic_tree(seq: &Sequence, a: &TruncationView) -> Result<PartitionTree> {
    if a.universe != seq.universe {
        return Err(BwError::Parameter(format!(
            "index set lives on {}, the sequence on {}",
            a.universe.name(),
            seq.universe.name()
        )));
    }
    let one = BigRational::one();
    let mut values = Vec::with_capacity(a.len());
    for p in &a.points {
        let v = seq
            .get(p)
            .ok_or_else(|| BwError::Parameter(format!("the sequence has no value at {p}")))?;
        if v.is_negative() || *v > one {
            return Err(BwError::Range { index: p.to_string(), value: fmt_rat(v) });
        }
        values.push(v.clone());
    }
    Ok(PartitionTree { root: a.clone(), values })
}

impl PartitionTree {
    /// Interval index of every root point at depth `level`.
    pub fn codes(&self, level: u32) -> Vec<u64> {
        self.values.iter().map(|v| code(v, level)).collect()
    }

    pub(crate) fn select(&self, keep: impl Fn(usize) -> bool) -> TruncationView {
        let points = self.root.points.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, p)| p.clone()).collect();
        TruncationView { points, ..self.root.clone() }
    }

    pub fn node(&self, s: &str) -> Result<TruncationView> {
        let iv = Interval::from_prefix(s)?;
        Ok(self.select(|i| iv.contains(&self.values[i])))
    }

    pub fn children(&self, s: &str) -> Result<(TruncationView, TruncationView)> {
        Ok((self.node(&format!("{s}0"))?, self.node(&format!("{s}1"))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{Point, Universe};
    use crate::score::rat;

    fn nats(v: &TruncationView) -> Vec<u64> {
        v.nats().unwrap()
    }

    #[test]
    fn documented_nodes() {
        let alt = Sequence::from_values((0..10).map(|n| rat(n % 2, 1)).collect());
        let t = dyadic_tree(&alt, &alt.domain()).unwrap();
        assert_eq!(nats(&t.node("0").unwrap()), vec![0, 2, 4, 6, 8]);
        assert_eq!(nats(&t.node("").unwrap()).len(), 10);

        let h = Sequence::from_values((0..12).map(|n| rat(1, n + 1)).collect());
        let t = dyadic_tree(&h, &h.domain()).unwrap();
        assert_eq!(nats(&t.node("00").unwrap()), (4..12).collect::<Vec<_>>());
        assert_eq!(nats(&t.node("11").unwrap()), vec![0]);
        assert_eq!(nats(&t.node("01").unwrap()), vec![2, 3]);
    }

    #[test]
    fn out_of_range_and_missing_values() {
        let s = Sequence::from_values(vec![rat(1, 2), rat(-1, 2)]);
        assert_eq!(dyadic_tree(&s, &s.domain()).unwrap_err().code(), "bw::range");
        let s = Sequence::from_values(vec![rat(1, 2)]);
        let a = TruncationView::new(Universe::Omega, 5, vec![Point::nat(3)]).unwrap();
        assert_eq!(dyadic_tree(&s, &a).unwrap_err().code(), "bw::parameter");
    }
}
