#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Longest progression length in `xs` by enumerating every first term and difference.
pub fn brute_force_ap(xs: &[u64]) -> u64 {
    let set: BTreeSet<u64> = xs.iter().copied().collect();
    let Some(&top) = set.iter().next_back() else {
        return 0;
    };
    let mut best = 1;
    for &a in &set {
        for d in 1..=top.saturating_sub(a).max(1) {
            let mut len = 1;
            while set.contains(&(a + len * d)) {
                len += 1;
            }
            best = best.max(len);
        }
    }
    best
}

pub fn bits_subset(mask: u64, width: u64) -> Vec<u64> {
    (0..width).filter(|i| mask >> i & 1 == 1).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random subset of `[0, n)` with at most `max_len` points.
pub fn random_subset(rng: &mut ChaCha8Rng, n: u64, max_len: usize) -> Vec<u64> {
    let len = rng.gen_range(0..=max_len);
    let mut xs: Vec<u64> = (0..len).map(|_| rng.gen_range(0..n)).collect();
    xs.sort_unstable();
    xs.dedup();
    xs
}
