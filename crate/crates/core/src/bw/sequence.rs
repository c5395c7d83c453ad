//! Exact `[0,1]`-valued sequences: named generators and CSV exchange.

use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BwError, Result};
use crate::point::{Point, Universe};
use crate::score::{fmt_rat, int};
use crate::setexpr::{apply, parse_set, truncate_nats, FuncExpr, TruncationView};

/// Values indexed by the points of one universe, sorted by point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    pub universe: Universe,
    pub cutoff: u64,
    points: Vec<Point>,
    values: Vec<BigRational>,
}

impl Sequence {
    pub fn new(universe: Universe, cutoff: u64, mut entries: Vec<(Point, BigRational)>) -> Result<Sequence> {
        for (p, _) in &entries {
            p.check(universe)?;
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(BwError::Input(format!("index {} given twice", w[0].0)));
        }
        let (points, values) = entries.into_iter().unzip();
        Ok(Sequence { universe, cutoff, points, values })
    }

    /// `x_0, x_1, ...` on ω with cutoff `len`.
    pub fn from_values(values: Vec<BigRational>) -> Sequence {
        let n = values.len() as u64;
        Sequence {
            universe: Universe::Omega,
            cutoff: n,
            points: (0..n).map(Point::nat).collect(),
            values,
        }
    }

    /// `x_(n,i) = rows[n][i]` on ω×ω.
    pub fn from_rows(rows: &[Vec<BigRational>]) -> Sequence {
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (n, row) in rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                points.push(Point::pair(n as u64, i as u64));
                values.push(v.clone());
            }
        }
        Sequence {
            universe: Universe::OmegaSq,
            cutoff: rows.len().max(cols) as u64,
            points,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn get(&self, p: &Point) -> Option<&BigRational> {
        self.points.binary_search(p).ok().map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, &BigRational)> {
        self.points.iter().zip(&self.values)
    }

    /// All indices, as a truncation view.
    pub fn domain(&self) -> TruncationView {
        TruncationView {
            universe: self.universe,
            cutoff: self.cutoff,
            points: self.points.clone(),
            exact: true,
        }
    }

    pub fn check_unit(&self) -> Result<()> {
        let one = BigRational::one();
        match self.iter().find(|(_, v)| v.is_negative() || **v > one) {
            Some((p, v)) => Err(BwError::Range { index: p.to_string(), value: fmt_rat(v) }),
            None => Ok(()),
        }
    }

    /// `x ∘ f` on the points of `domain` where both are defined.
    pub fn pullback(&self, f: &FuncExpr, domain: &TruncationView) -> Result<Sequence> {
        if f.codomain() != self.universe {
            return Err(BwError::Parameter(format!(
                "{f} maps into {}, the sequence lives on {}",
                f.codomain().name(),
                self.universe.name()
            )));
        }
        let mut entries = Vec::new();
        for p in &domain.points {
            if let Some(q) = apply(f, p)? {
                if let Some(v) = self.get(&q) {
                    entries.push((p.clone(), v.clone()));
                }
            }
        }
        Sequence::new(f.domain(), domain.cutoff, entries)
    }
}

fn parse_rat(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| BwError::Input(format!("'{s}' is not a rational p/q")))
}

fn random_values(len: usize, bits: u32, seed: u64) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = BigInt::one() << bits;
    (0..len)
        .map(|_| BigRational::new(BigInt::from(rng.gen_range(0..=(1u64 << bits))), den.clone()))
        .collect()
}

fn random_bits(arg: Option<&str>) -> Result<u32> {
    match arg {
        None => Ok(16),
        Some(b) => match b.parse::<u32>() {
            Ok(b) if (1..=62).contains(&b) => Ok(b),
            _ => Err(BwError::Parameter(format!("random needs 1..62 bits, got '{b}'"))),
        },
    }
}

/// A named sequence on `[0, len)`:
/// `alt`, `harmonic`, `const:p/q`, `indicator:<set>` (0 on the set, 1 off it)
/// and `random[:bits]` (multiples of `2^-bits`, seeded).
pub fn generate(desc: &str, len: u64, seed: u64) -> Result<Sequence> {
    let (name, arg) = match desc.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (desc, None),
    };
    let n = len as usize;
    let values = match (name, arg) {
        ("alt", None) => (0..n).map(|i| int(u64::from(i % 2 == 0))).collect(),
        ("harmonic", None) => (0..len).map(|i| BigRational::new(BigInt::one(), BigInt::from(i + 1))).collect(),
        ("const", Some(v)) => vec![parse_rat(v)?; n],
        ("indicator", Some(set)) => {
            let e = parse_set(set)?;
            let inside = truncate_nats(&e, len)?;
            let mut vals = vec![BigRational::one(); n];
            for x in inside {
                vals[x as usize] = BigRational::zero();
            }
            vals
        }
        ("random", bits) => random_values(n, random_bits(bits)?, seed),
        _ => return Err(BwError::Parameter(format!("unknown generator '{desc}'"))),
    };
    let s = Sequence::from_values(values);
    s.check_unit()?;
    Ok(s)
}

/// A named `rows × cols` array, clamped into `[0,1]`:
/// `rowcol:<expr in n and i>` or `random[:bits]`.
pub fn generate_rows(desc: &str, rows: u64, cols: u64, seed: u64) -> Result<Vec<Vec<BigRational>>> {
    if rows < 2 || cols < 2 {
        return Err(BwError::Parameter(format!("need at least 2 rows and 2 columns, got {rows}x{cols}")));
    }
    let (name, arg) = match desc.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (desc, None),
    };
    let clamp = |v: BigRational| v.clamp(BigRational::zero(), BigRational::one());
    match (name, arg) {
        ("rowcol", Some(text)) => {
            let expr = Arith::parse(text)?;
            (0..rows)
                .map(|n| (0..cols).map(|i| expr.eval(n, i).map(clamp)).collect())
                .collect()
        }
        ("random", bits) => {
            let flat = random_values((rows * cols) as usize, random_bits(bits)?, seed);
            Ok(flat.chunks(cols as usize).map(<[_]>::to_vec).collect())
        }
        _ => Err(BwError::Parameter(format!("unknown array generator '{desc}'"))),
    }
}

/// Arithmetic in the row `n` and column `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Arith {
    Num(BigRational),
    Row,
    Col,
    Neg(Box<Arith>),
    Bin(char, Box<Arith>, Box<Arith>),
}

struct ArithParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ArithParser<'_> {
    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn error(&self, what: &str) -> BwError {
        BwError::Parameter(format!("{what} at offset {} of '{}'", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn sum(&mut self) -> Result<Arith> {
        let mut left = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            left = Arith::Bin(c as char, Box::new(left), Box::new(self.product()?));
        }
        Ok(left)
    }

    fn product(&mut self) -> Result<Arith> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(c @ (b'*' | b'/')) => {
                    self.pos += 1;
                    c as char
                }
                Some(b'm') if self.s[self.pos..].starts_with(b"mod") => {
                    self.pos += 3;
                    '%'
                }
                _ => return Ok(left),
            };
            left = Arith::Bin(op, Box::new(left), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Arith> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Arith::Neg(Box::new(self.unary()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'n') => {
                self.pos += 1;
                Ok(Arith::Row)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Arith::Col)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
                Ok(Arith::Num(BigRational::from_integer(digits.parse().expect("digits"))))
            }
            _ => Err(self.error("expected a number, n, i or '('")),
        }
    }
}

impl Arith {
    fn parse(text: &str) -> Result<Arith> {
        let mut p = ArithParser { s: text.as_bytes(), pos: 0 };
        let e = p.sum()?;
        if p.peek().is_some() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }

    fn eval(&self, n: u64, i: u64) -> Result<BigRational> {
        Ok(match self {
            Arith::Num(v) => v.clone(),
            Arith::Row => int(n),
            Arith::Col => int(i),
            Arith::Neg(a) => -a.eval(n, i)?,
            Arith::Bin(op, a, b) => {
                let (x, y) = (a.eval(n, i)?, b.eval(n, i)?);
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    _ if y.is_zero() => {
                        return Err(BwError::Parameter(format!("division by zero at n = {n}, i = {i}")));
                    }
                    '/' => x / y,
                    _ => {
                        if !x.is_integer() || !y.is_integer() {
                            return Err(BwError::Parameter("mod needs integers".into()));
                        }
                        BigRational::from_integer(x.to_integer().mod_floor(&y.to_integer()))
                    }
                }
            }
        })
    }
}

/// Reads `index,value_pq` rows (header optional) into a sequence on ω.
pub fn read_csv<R: Read>(input: R) -> Result<Sequence> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut entries = Vec::new();
    let mut cutoff = 0;
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| BwError::Input(e.to_string()))?;
        if rec.len() != 2 {
            return Err(BwError::Input(format!("line {}: expected 2 fields, got {}", line + 1, rec.len())));
        }
        if line == 0 && rec[0].parse::<u64>().is_err() {
            continue;
        }
        let n: u64 = rec[0]
            .parse()
            .map_err(|_| BwError::Input(format!("line {}: bad index '{}'", line + 1, &rec[0])))?;
        entries.push((Point::nat(n), parse_rat(&rec[1])?));
        cutoff = cutoff.max(n + 1);
    }
    let s = Sequence::new(Universe::Omega, cutoff, entries)?;
    s.check_unit()?;
    Ok(s)
}

pub fn write_csv<W: Write>(s: &Sequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| BwError::Input(e.to_string());
    w.write_record(["index", "value_pq"]).map_err(io)?;
    for (p, v) in s.iter() {
        w.write_record([p.to_string(), fmt_rat(v)]).map_err(io)?;
    }
    w.flush().map_err(|e| BwError::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::rat;

    #[test]
    fn generators() {
        let alt = generate("alt", 4, 0).unwrap();
        assert_eq!(alt.values(), &[rat(1, 1), rat(0, 1), rat(1, 1), rat(0, 1)]);
        let h = generate("harmonic", 3, 0).unwrap();
        assert_eq!(h.values()[2], rat(1, 3));
        let ind = generate("indicator:powers(2)", 6, 0).unwrap();
        assert_eq!(ind.values(), &[rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(generate("random:8", 50, 7).unwrap(), generate("random:8", 50, 7).unwrap());
        assert_ne!(generate("random:8", 50, 7).unwrap(), generate("random:8", 50, 8).unwrap());
        assert_eq!(generate("const:3/2", 2, 0).unwrap_err().code(), "bw::range");
        assert_eq!(generate("nope", 2, 0).unwrap_err().code(), "bw::parameter");
    }

    #[test]
    fn row_column_arrays() {
        let a = generate_rows("rowcol:1/(n+1)+1/(i+1)", 4, 4, 0).unwrap();
        assert_eq!(a[0][0], rat(1, 1));
        assert_eq!(a[1][2], rat(5, 6));
        assert_eq!(a[3][3], rat(1, 2));
        let m = generate_rows("rowcol:i mod 2", 2, 3, 0).unwrap();
        assert_eq!(m[1], vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
        assert_eq!(generate_rows("rowcol:-n*2", 2, 2, 0).unwrap()[1][0], rat(0, 1));
        assert!(generate_rows("rowcol:1/(n", 2, 2, 0).is_err());
        assert!(generate_rows("rowcol:1/n", 2, 2, 0).is_err());
        assert!(generate_rows("rowcol:n", 1, 2, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = generate("random:5", 20, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert!(buf.starts_with(b"index,value_pq\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), s);
        assert_eq!(read_csv("0,1/2\n0,1/3\n".as_bytes()).unwrap_err().code(), "bw::input");
        assert_eq!(read_csv("0,3/2\n".as_bytes()).unwrap_err().code(), "bw::range");
    }

    #[test]
    fn pullback_through_a_projection() {
        let s = Sequence::from_values(vec![rat(1, 2), rat(1, 3)]);
        let dom = TruncationView::new(Universe::OmegaSq, 3, crate::point::window(Universe::OmegaSq, 3)).unwrap();
        let p = s.pullback(&FuncExpr::Proj1, &dom).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.get(&Point::pair(1, 2)), Some(&rat(1, 3)));
    }
}
