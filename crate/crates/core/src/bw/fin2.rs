//! Diagonal extraction for double sequences under `Fin ⊗ Fin`.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::extract::{exclusions, ExtractionResult};
use super::{distance, extract, BwError, Interval, Result, Sequence};
use crate::ideals::{Ideal, IdealHandle};
use crate::point::{Point, Universe};
use crate::score::fmt_rat;
use crate::setexpr::TruncationView;
use crate::SCHEMA_VERSION;

fn rat_str<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rat(r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowExtraction {
    pub n: u64,
    #[serde(rename = "M_n")]
    pub m: Vec<u64>,
    pub limit: Interval,
}

/// The section `{i : (n,i) ∈ E}`, contained in `[0, bound)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowSection {
    pub n: u64,
    pub size: u64,
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fin2Exclusion {
    #[serde(serialize_with = "rat_str")]
    pub eps: BigRational,
    pub size: u64,
    /// Nonempty sections only.
    pub sections: Vec<RowSection>,
    /// Least `K` such that every section of a row `n >= K` lies in `[0, K)`.
    pub cutoff_row: u64,
    /// Rows at or past `cutoff_row` with a nonempty section.
    pub beyond_cutoff: u64,
    pub points: Vec<(u64, u64)>,
    /// The cover `(K × ω) ∪ ⋃_{n ∉ K} {n} × F_n` at the reported limits.
    pub cover: Cover,
}

/// `K = {n : |x_n - x| >= eps}` and `F_n = {i : |d[n][i] - x_n| >= eps}` for `n ∉ K`, on the whole array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover {
    #[serde(rename = "K")]
    pub k: Vec<u64>,
    /// `(n, F_n)` for the rows outside `K` with `F_n` nonempty.
    #[serde(rename = "F")]
    pub f: Vec<(u64, Vec<u64>)>,
}

impl Cover {
    pub fn contains(&self, n: u64, i: u64) -> bool {
        self.k.binary_search(&n).is_ok()
            || self.f.binary_search_by_key(&n, |(m, _)| *m).is_ok_and(|j| self.f[j].1.binary_search(&i).is_ok())
    }
}

pub fn proof_cover(dseq: &[Vec<BigRational>], row_limits: &[BigRational], x: &BigRational, eps: &BigRational) -> Cover {
    let mut k = Vec::new();
    let mut f = Vec::new();
    for (n, (row, xn)) in dseq.iter().zip(row_limits).enumerate() {
        if distance(xn, x) >= *eps {
            k.push(n as u64);
            continue;
        }
        let fs: Vec<u64> = (0..row.len() as u64).filter(|&i| distance(&row[i as usize], xn) >= *eps).collect();
        if !fs.is_empty() {
            f.push((n as u64, fs));
        }
    }
    Cover { k, f }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fin2ExtractionResult {
    pub version: &'static str,
    pub rows_count: u64,
    pub cols: u64,
    pub depth: u32,
    pub rows: Vec<RowExtraction>,
    pub outer: ExtractionResult,
    #[serde(rename = "M")]
    pub m: Vec<u64>,
    pub limit: Interval,
    #[serde(rename = "A")]
    pub a: Vec<(u64, u64)>,
    pub exclusions: Vec<Fin2Exclusion>,
}

fn cutoff_row(sections: &[RowSection], rows: u64) -> u64 {
    (0..=rows)
        .find(|&k| sections.iter().all(|s| s.n < k || s.bound <= k))
        .unwrap_or(rows)
}

/// Row limits under `Fin`, then an outer `Fin` extraction of the row limits.
pub fn fin2_extract(dseq: &[Vec<BigRational>], depth: u32, radii: &[BigRational]) -> Result<Fin2ExtractionResult> {
    let r = dseq.len();
    let cols = dseq.first().map_or(0, Vec::len);
    if r < 2 || cols < 2 || dseq.iter().any(|row| row.len() != cols) {
        return Err(BwError::Parameter(format!(
            "need a rectangular array with at least 2 rows and 2 columns, got {r} rows"
        )));
    }
    let fin = IdealHandle::fin();
    let rows: Vec<RowExtraction> = dseq
        .par_iter()
        .enumerate()
        .map(|(n, row)| -> Result<RowExtraction> {
            let e = extract(&fin, &Sequence::from_values(row.clone()), depth)?;
            Ok(RowExtraction { n: n as u64, m: e.b.nats()?, limit: e.limit })
        })
        .collect::<Result<_>>()?;
    let outer_seq = Sequence::from_values(rows.iter().map(|row| row.limit.midpoint()).collect());
    let outer = extract(&fin, &outer_seq, depth)?;
    let m = outer.b.nats()?;
    let a: Vec<(u64, u64)> = m.iter().flat_map(|&n| rows[n as usize].m.iter().map(move |&i| (n, i))).collect();

    let x = outer.limit.midpoint();
    let row_limits: Vec<BigRational> = rows.iter().map(|row| row.limit.midpoint()).collect();
    let exclusions = radii
        .iter()
        .map(|eps| {
            let points: Vec<(u64, u64)> = a
                .iter()
                .copied()
                .filter(|&(n, i)| distance(&dseq[n as usize][i as usize], &x) >= *eps)
                .collect();
            let mut sections: Vec<RowSection> = Vec::new();
            for &(n, i) in &points {
                match sections.last_mut() {
                    Some(s) if s.n == n => {
                        s.size += 1;
                        s.bound = s.bound.max(i + 1);
                    }
                    _ => sections.push(RowSection { n, size: 1, bound: i + 1 }),
                }
            }
            let k = cutoff_row(&sections, r as u64);
            Fin2Exclusion {
                eps: eps.clone(),
                size: points.len() as u64,
                beyond_cutoff: sections.iter().filter(|s| s.n >= k).count() as u64,
                cutoff_row: k,
                sections,
                points,
                cover: proof_cover(dseq, &row_limits, &x, eps),
            }
        })
        .collect();

    Ok(Fin2ExtractionResult {
        version: SCHEMA_VERSION,
        rows_count: r as u64,
        cols: cols as u64,
        depth,
        rows,
        limit: outer.limit.clone(),
        outer,
        m,
        a,
        exclusions,
    })
}

impl Fin2ExtractionResult {
    /// The result as an extraction under `Fin²` with index set `A`.
    pub fn as_extraction(&self, dseq: &[Vec<BigRational>]) -> Result<ExtractionResult> {
        let h = IdealHandle::new(Ideal::Fin2);
        let cutoff = self.rows_count.max(self.cols);
        let b = TruncationView::new(
            Universe::OmegaSq,
            cutoff,
            self.a.iter().map(|&(n, i)| Point::pair(n, i)).collect(),
        )?;
        let values: Vec<BigRational> = self.a.iter().map(|&(n, i)| dseq[n as usize][i as usize].clone()).collect();
        Ok(ExtractionResult {
            version: SCHEMA_VERSION,
            exclusions: exclusions(&h, &b, &values, &self.limit)?,
            ideal: h,
            heuristic: true,
            root_size: self.rows_count * self.cols,
            limit: self.limit.clone(),
            b,
            trace: Vec::new(),
            transported: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bw::generate_rows;
    use crate::score::rat;

    fn harmonic_grid() -> Vec<Vec<BigRational>> {
        generate_rows("rowcol:1/(n+1)+1/(i+1)", 64, 64, 0).unwrap()
    }

    #[test]
    fn harmonic_grid_extraction() {
        let d = harmonic_grid();
        let r = fin2_extract(&d, 4, &[rat(1, 8), rat(1, 16)]).unwrap();
        assert!(r.limit.contains(&rat(0, 1)));
        for (n, row) in r.rows.iter().enumerate().skip(16) {
            assert!(row.limit.lo() <= rat(1, n as i64 + 1) + rat(1, 8));
        }
        let mut sections = std::collections::BTreeMap::new();
        for &(n, i) in &r.a {
            assert!(r.m.binary_search(&n).is_ok());
            *sections.entry(n).or_insert(0) += 1;
            assert!(r.rows[n as usize].m.binary_search(&i).is_ok());
        }
        for &n in &r.m {
            assert_eq!(sections.get(&n), Some(&r.rows[n as usize].m.len()));
        }
        let e = &r.exclusions[0];
        assert!(e.points.iter().all(|&(n, i)| n <= 7 || i <= 7));
        assert!(e.sections.iter().filter(|s| s.n >= e.cutoff_row).all(|s| s.bound <= e.cutoff_row));
    }

    #[test]
    fn cover_at_the_analytic_limits() {
        let d = harmonic_grid();
        let limits: Vec<BigRational> = (0..64).map(|n| rat(1, n + 1)).collect();
        let c = proof_cover(&d, &limits, &rat(0, 1), &rat(1, 8));
        assert_eq!(c.k, (0..8).collect::<Vec<_>>());
        assert_eq!(c.f.len(), 56);
        assert!(c.f.iter().all(|(n, f)| *n >= 8 && *f == (0..8).collect::<Vec<_>>()));
        assert!(c.contains(3, 50) && c.contains(40, 7) && !c.contains(40, 8));
    }

    #[test]
    fn constant_array() {
        let d = generate_rows("rowcol:1/2", 8, 8, 0).unwrap();
        let r = fin2_extract(&d, 5, &[rat(1, 32), rat(1, 4)]).unwrap();
        assert!(r.rows.iter().all(|row| row.m.len() == 8));
        assert!(r.limit.contains(&rat(1, 2)));
        assert_eq!(r.a.len(), 64);
        assert!(r.exclusions.iter().all(|e| e.size == 0 && e.cover.k.is_empty() && e.cover.f.is_empty()));
    }

    #[test]
    fn parity_columns() {
        let d = generate_rows("rowcol:i mod 2", 6, 10, 0).unwrap();
        let r = fin2_extract(&d, 3, &[rat(1, 8)]).unwrap();
        assert!(r.rows.iter().all(|row| row.m == vec![0, 2, 4, 6, 8] && row.limit.contains(&rat(0, 1))));
        assert!(r.limit.contains(&rat(0, 1)));
        assert_eq!(r.exclusions[0].size, 0);
    }

    #[test]
    fn degenerate_arrays() {
        assert_eq!(fin2_extract(&[vec![rat(0, 1); 3]], 2, &[]).unwrap_err().code(), "bw::parameter");
        let ragged = vec![vec![rat(0, 1); 3], vec![rat(0, 1); 2]];
        assert_eq!(fin2_extract(&ragged, 2, &[]).unwrap_err().code(), "bw::parameter");
    }

    #[test]
    fn as_an_extraction_under_fin_squared() {
        let d = harmonic_grid();
        let r = fin2_extract(&d, 4, &[rat(1, 8)]).unwrap();
        let e = r.as_extraction(&d).unwrap();
        assert_eq!(e.size(), r.a.len() as u64);
        assert_eq!(e.ideal.to_string(), "fin2");
    }

    #[test]
    fn fubini_projection_transport() {
        let d = generate_rows("rowcol:1/3", 6, 6, 0).unwrap();
        let r = fin2_extract(&d, 3, &[]).unwrap().as_extraction(&d).unwrap();
        let w = crate::reductions::builtin_witness("fubini_proj(fin,fin)").unwrap();
        let seq = Sequence::from_values(vec![rat(1, 3); 6]);
        let t = super::super::transport(&w, &r, &seq).unwrap();
        assert_eq!(t.b.nats().unwrap(), (0..6).collect::<Vec<_>>());
        assert!(t.exclusions.iter().all(|e| e.size == 0));
        assert!(t.transported.unwrap().pulled_exclusions.iter().all(|e| e.size == 0));
    }
}
