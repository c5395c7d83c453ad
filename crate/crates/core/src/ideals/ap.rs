//! Longest arithmetic progression inside a finite set of naturals.

use rayon::prelude::*;
use serde::Serialize;

/// Above this many points the pair table is replaced by a scan over
/// differences.
pub const DP_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Progression {
    pub length: u64,
    pub first: u64,
    pub difference: u64,
}

impl Progression {
    pub fn terms(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.length).map(move |k| self.first + k * self.difference)
    }
}

fn pick(a: Progression, b: Progression) -> Progression {
    let key = |p: &Progression| (std::cmp::Reverse(p.length), p.difference, p.first);
    if key(&b) < key(&a) {
        b
    } else {
        a
    }
}

/// Longest progression in the sorted, duplicate-free `xs`; ties go to the
/// smaller difference, then the smaller first term. A single point is
/// reported with difference 1.
pub fn longest_ap(xs: &[u64]) -> Option<Progression> {
    match xs.len() {
        0 => None,
        1 => Some(Progression { length: 1, first: xs[0], difference: 1 }),
        n if n <= DP_LIMIT => Some(longest_ap_dp(xs)),
        _ => Some(longest_ap_scan(xs)),
    }
}

/// `table[i][j]`: length of the longest progression starting `xs[i], xs[j]`.
pub fn longest_ap_dp(xs: &[u64]) -> Progression {
    let n = xs.len();
    debug_assert!(n >= 2);
    let mut table = vec![2u16; n * n];
    let mut best = Progression { length: 2, first: xs[0], difference: u64::MAX };
    for j in (1..n - 1).rev() {
        let (mut i, mut k) = (j as isize - 1, j + 1);
        let twice = 2 * u128::from(xs[j]);
        while i >= 0 && k < n {
            let s = u128::from(xs[i as usize]) + u128::from(xs[k]);
            if s < twice {
                k += 1;
            } else if s > twice {
                i -= 1;
            } else {
                table[i as usize * n + j] = table[j * n + k] + 1;
                i -= 1;
                k += 1;
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let cand = Progression {
                length: u64::from(table[i * n + j]),
                first: xs[i],
                difference: xs[j] - xs[i],
            };
            best = pick(best, cand);
        }
    }
    best
}

/// Scan over differences `d = 1, 2, ...`, stopping once `d * best`
/// exceeds the span (no longer progression can fit).
pub fn longest_ap_scan(xs: &[u64]) -> Progression {
    let lo = xs[0];
    let span = xs[xs.len() - 1] - lo;
    let mut bits = vec![false; span as usize + 1];
    for &x in xs {
        bits[(x - lo) as usize] = true;
    }
    let member = |v: u64| v >= lo && v - lo <= span && bits[(v - lo) as usize];
    let run_for = |d: u64| -> Progression {
        let mut best = Progression { length: 1, first: xs[0], difference: d };
        for &x in xs {
            if x >= lo + d && member(x - d) {
                continue;
            }
            let mut len = 1u64;
            let mut y = x;
            while let Some(next) = y.checked_add(d) {
                if !member(next) {
                    break;
                }
                len += 1;
                y = next;
            }
            if len > best.length {
                best = Progression { length: len, first: x, difference: d };
            }
        }
        best
    };
    let mut best = Progression { length: 1, first: xs[0], difference: 1 };
    let mut d = 1u64;
    const BATCH: u64 = 64;
    while d <= span && d.saturating_mul(best.length) <= span {
        let limit = (span / best.length).min(d + BATCH - 1);
        let found = (d..=limit)
            .into_par_iter()
            .map(run_for)
            .reduce(|| Progression { length: 0, first: 0, difference: u64::MAX }, pick);
        best = pick(best, found);
        d = limit + 1;
    }
    if best.length == 1 {
        best.difference = 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_cases() {
        assert_eq!(longest_ap(&[1, 3, 5, 9]), Some(Progression { length: 3, first: 1, difference: 2 }));
        assert_eq!(longest_ap(&[100, 101, 102]), Some(Progression { length: 3, first: 100, difference: 1 }));
        assert_eq!(longest_ap(&[7]), Some(Progression { length: 1, first: 7, difference: 1 }));
        assert_eq!(longest_ap(&[]), None);
        assert_eq!(longest_ap(&[2, 9]), Some(Progression { length: 2, first: 2, difference: 7 }));
    }

    #[test]
    fn scan_agrees_with_table() {
        let sets: Vec<Vec<u64>> = vec![
            (0..300).filter(|x| x % 3 != 1).collect(),
            (0..500).filter(|x| (x * x) % 7 < 3).collect(),
            vec![1, 10, 11, 100, 101, 102, 1000, 1001, 1002, 1003],
            (0..40).map(|x| x * x).collect(),
        ];
        for xs in sets {
            assert_eq!(longest_ap_dp(&xs), longest_ap_scan(&xs), "{xs:?}");
        }
    }

    #[test]
    fn large_sets_use_the_scan() {
        let evens: Vec<u64> = (0..1_000_000).step_by(2).collect();
        assert_eq!(longest_ap(&evens).unwrap(), Progression { length: 500_000, first: 0, difference: 2 });
    }
}
