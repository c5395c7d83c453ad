//! Exhaustive search for colorings without monochromatic progressions.

use serde::Serialize;
use thiserror::Error;

/// `VDW_TWO_COLORS[k]` is the two-color van der Waerden number W(k; 2).
pub const VDW_TWO_COLORS: [u64; 7] = [0, 1, 3, 9, 35, 178, 1132];

/// Search nodes allowed before giving up.
pub const NODE_BUDGET: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VdwError {
    #[error("need progression length >= 1 and colors >= 1, got length {length}, colors {colors}")]
    Parameter { length: u32, colors: u32 },
    #[error("search for n = {n} exceeded {nodes} nodes")]
    Budget { n: u64, nodes: u64 },
}

impl VdwError {
    pub fn code(&self) -> &'static str {
        match self {
            VdwError::Parameter { .. } => "vdw::parameter",
            VdwError::Budget { .. } => "vdw::budget",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VdwSearch {
    pub length: u32,
    pub colors: u32,
    pub n: u64,
    /// Color of `1..=n`, when a good coloring exists.
    pub coloring: Option<Vec<u8>>,
    pub nodes: u64,
}

impl VdwSearch {
    pub fn found(&self) -> bool {
        self.coloring.is_some()
    }

    /// The color classes as subsets of `1..=n`.
    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.colors as usize];
        if let Some(c) = &self.coloring {
            for (i, &k) in c.iter().enumerate() {
                out[k as usize].push(i as u64 + 1);
            }
        }
        out
    }
}

struct Search {
    length: usize,
    colors: u8,
    n: usize,
    color: Vec<u8>,
    nodes: u64,
}

impl Search {
    /// Whether giving position `i` (0-based) color `c` completes a
    /// monochromatic progression ending at `i`.
    fn closes(&self, i: usize, c: u8) -> bool {
        let k = self.length;
        if k <= 1 {
            return true;
        }
        let mut d = 1;
        while d * (k - 1) <= i {
            if (1..k).all(|t| self.color[i - t * d] == c) {
                return true;
            }
            d += 1;
        }
        false
    }

    fn run(&mut self, i: usize, used: u8) -> Result<bool, VdwError> {
        if i == self.n {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(VdwError::Budget { n: self.n as u64, nodes: NODE_BUDGET });
        }
        // colors are interchangeable: never open more than one new color
        let top = (used + 1).min(self.colors);
        for c in 0..top {
            if self.closes(i, c) {
                continue;
            }
            self.color[i] = c;
            if self.run(i + 1, used.max(c + 1))? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Looks for a coloring of `1..=n` with `colors` colors and no
/// monochromatic progression of `length` terms.
pub fn vdw_search(length: u32, colors: u32, n: u64) -> Result<VdwSearch, VdwError> {
    if length == 0 || colors == 0 || colors > 255 {
        return Err(VdwError::Parameter { length, colors });
    }
    let mut s = Search {
        length: length as usize,
        colors: colors as u8,
        n: n as usize,
        color: vec![0; n as usize],
        nodes: 0,
    };
    let ok = s.run(0, 0)?;
    Ok(VdwSearch {
        length,
        colors,
        n,
        coloring: ok.then(|| s.color.clone()),
        nodes: s.nodes,
    })
}

/// Least `n <= max` such that every coloring of `1..=n` has a monochromatic
/// progression of `length` terms, with the last good coloring found.
pub fn vdw_number(length: u32, colors: u32, max: u64) -> Result<(Option<u64>, Option<VdwSearch>), VdwError> {
    let mut last = None;
    for n in 0..=max {
        let s = vdw_search(length, colors, n)?;
        if !s.found() {
            return Ok((Some(n), last));
        }
        last = Some(s);
    }
    Ok((None, last))
}

/// Whether `coloring` of `1..=n` has a monochromatic `length`-term progression.
pub fn has_monochromatic_ap(coloring: &[u8], length: usize) -> bool {
    let n = coloring.len();
    if length <= 1 {
        return n > 0;
    }
    (1..n).any(|d| {
        (0..n).any(|a| a + d * (length - 1) < n && (1..length).all(|t| coloring[a + t * d] == coloring[a]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_term_two_colors() {
        let s = vdw_search(3, 2, 8).unwrap();
        let c = s.coloring.clone().unwrap();
        assert!(!has_monochromatic_ap(&c, 3));
        assert!(!vdw_search(3, 2, 9).unwrap().found());
        assert_eq!(vdw_number(3, 2, 20).unwrap().0, Some(9));
    }

    #[test]
    fn small_numbers_match_the_table() {
        assert_eq!(vdw_number(1, 2, 5).unwrap().0, Some(VDW_TWO_COLORS[1]));
        assert_eq!(vdw_number(2, 2, 5).unwrap().0, Some(VDW_TWO_COLORS[2]));
        assert_eq!(vdw_number(3, 3, 40).unwrap().0, Some(27));
    }

    #[test]
    fn the_documented_coloring_is_good() {
        let mut c = vec![0u8; 8];
        for x in [3usize, 4, 7, 8] {
            c[x - 1] = 1;
        }
        assert!(!has_monochromatic_ap(&c, 3));
    }

    #[test]
    fn parameters_are_checked() {
        assert_eq!(vdw_search(0, 2, 4).unwrap_err().code(), "vdw::parameter");
    }
}
