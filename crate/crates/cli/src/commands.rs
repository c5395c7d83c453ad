use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, OnFlag};
use crate::output::{Report, Table};
use crate::Common;
use idealab::bw::{self, ExtractionResult, Sequence};
use idealab::ideals::{self, default_schedule, make_ideal, summary, Ideal, Verdict};
use idealab::point::{window, Universe};
use idealab::reductions::{self as red, Classification, RefuterOutput, WitnessReport, NWD_INTERVALS};
use idealab::score::{fmt_rat, to_f64, Score};
use idealab::setexpr::{parse_func, parse_set, truncate, TruncationView};
use idealab::vdw;

type Result<T> = std::result::Result<T, CliError>;

/// Largest number of points listed in a table cell.
const LIST_LIMIT: usize = 32;

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn approx(s: &Score) -> String {
    format!("{:.6}", s.approx())
}

fn approx_rat(r: &BigRational) -> String {
    format!("{:.6}", to_f64(r))
}

fn list<T: ToString>(xs: &[T]) -> String {
    let shown: Vec<String> = xs.iter().take(LIST_LIMIT).map(T::to_string).collect();
    let more = if xs.len() > LIST_LIMIT { format!(",... ({} total)", xs.len()) } else { String::new() };
    format!("{{{}{more}}}", shown.join(","))
}

fn row(cells: &[&dyn ToString]) -> Vec<String> {
    cells.iter().map(|c| c.to_string()).collect()
}

fn schedule(given: &[u64], universe: Universe) -> Result<Vec<u64>> {
    if given.is_empty() {
        return Ok(default_schedule(universe));
    }
    if given[0] == 0 || given.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage("schedule", "cutoffs must be positive and strictly increasing"));
    }
    Ok(given.to_vec())
}

fn verdict_rows(t: &mut Table, v: &Verdict) {
    t.push(row(&[&"verdict", &v.kind(), &""]));
    match v {
        Verdict::In { certificate } | Verdict::Positive { certificate } => {
            t.push(row(&[&"rule", &certificate.rule, &""]));
            t.push(row(&[&"reason", &certificate.reason, &""]));
            if let Some(b) = &certificate.bound {
                t.push(row(&[&"bound", b, &approx(b)]));
            }
        }
        Verdict::Unknown { diagnostics } => {
            t.push(row(&[&"note", &diagnostics.note, &""]));
            for (n, s) in &diagnostics.series.samples {
                t.push(row(&[&format!("score at N={n}"), s, &approx(s)]));
            }
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DecideArgs {
    /// Ideal descriptor, e.g. `vdw` or `summable(harmonic)`.
    #[arg(long)]
    pub ideal: String,
    /// Set expression.
    #[arg(long)]
    pub set: String,
    /// Cutoffs for the fallback score series.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn decide(a: &DecideArgs) -> Result<Report> {
    let h = make_ideal(&a.ideal).on("ideal")?;
    let e = parse_set(&a.set).on("set")?;
    h.check_set(&e).on("set")?;
    let v = if a.schedule.is_empty() {
        ideals::decide(&h, &e).on("set")?
    } else {
        ideals::decide_at(&h, &e, &schedule(&a.schedule, h.universe())?).on("schedule")?
    };
    let mut t = Table::new(&["field", "value", "approx"]);
    verdict_rows(&mut t, &v);
    let status = v.kind().to_lowercase();
    Ok(Report::new("decide", config(a), &status, json!(v), t))
}

#[derive(Args, Debug, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub ideal: String,
    #[arg(long)]
    pub set: String,
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<u64>,
    /// A single cutoff instead of a schedule.
    #[arg(long = "N", conflicts_with = "schedule")]
    pub n: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn score(a: &ScoreArgs) -> Result<Report> {
    let h = make_ideal(&a.ideal).on("ideal")?;
    let e = parse_set(&a.set).on("set")?;
    h.check_set(&e).on("set")?;
    let cutoffs = match a.n {
        Some(0) => return Err(CliError::usage("N", "cutoff must be positive")),
        Some(n) => vec![n],
        None => schedule(&a.schedule, h.universe())?,
    };
    let mut t = Table::new(&["N", "score_pq", "approx"]);
    let mut samples = Vec::new();
    for n in cutoffs {
        let v = ideals::score_expr(&h, &e, n).on("set")?;
        let s = summary(&v, n);
        t.push(row(&[&n, &s, &approx(&s)]));
        samples.push(json!({ "N": n, "summary": s, "value": v }));
    }
    Ok(Report::new("score", config(a), "ok", json!({ "ideal": h.to_string(), "samples": samples }), t))
}

#[derive(Args, Debug, Serialize)]
pub struct ApArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long = "N")]
    pub n: u64,
    #[command(flatten)]
    pub common: Common,
}

pub fn ap(a: &ApArgs) -> Result<Report> {
    let e = parse_set(&a.set).on("set")?;
    let xs = truncate(&e, a.n).on("set")?.nats().on("set")?;
    let p = ideals::longest_ap(&xs);
    let mut t = Table::new(&["field", "value"]);
    t.push(row(&[&"points", &xs.len()]));
    if let Some(p) = &p {
        t.push(row(&[&"length", &p.length]));
        t.push(row(&[&"first", &p.first]));
        t.push(row(&[&"difference", &p.difference]));
        t.push(row(&[&"terms", &list(&p.terms().collect::<Vec<_>>())]));
    }
    Ok(Report::new("ap", config(a), "ok", json!({ "points": xs.len(), "progression": p }), t))
}

#[derive(Args, Debug, Serialize)]
pub struct VdwArgs {
    /// Progression length k.
    #[arg(long)]
    pub length: u32,
    #[arg(long, default_value_t = 2)]
    pub colors: u32,
    /// Find the least n up to this bound with no good coloring.
    #[arg(long, conflicts_with = "n")]
    pub max: Option<u64>,
    /// Search colorings of 1..=N only.
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

fn coloring_rows(t: &mut Table, s: &vdw::VdwSearch) {
    t.push(row(&[&"n", &s.n]));
    t.push(row(&[&"good coloring", &s.found()]));
    t.push(row(&[&"nodes", &s.nodes]));
    for (c, class) in s.classes().iter().enumerate() {
        if s.found() {
            t.push(row(&[&format!("color {c}"), &list(class)]));
        }
    }
}

pub fn vdw_search(a: &VdwArgs) -> Result<Report> {
    let mut t = Table::new(&["field", "value"]);
    let result = match (a.n, a.max) {
        (Some(n), _) => {
            let s = vdw::vdw_search(a.length, a.colors, n).on("length")?;
            coloring_rows(&mut t, &s);
            json!({ "search": s })
        }
        (None, Some(max)) => {
            let (w, last) = vdw::vdw_number(a.length, a.colors, max).on("length")?;
            t.push(row(&[&"W", &w.map_or_else(|| format!("> {max}"), |w| w.to_string())]));
            if let Some(s) = &last {
                coloring_rows(&mut t, s);
            }
            json!({ "number": w, "last_good": last })
        }
        (None, None) => return Err(CliError::usage("max", "give --max or --N")),
    };
    Ok(Report::new("vdw-search", config(a), "ok", result, t))
}

fn witness_table(r: &WitnessReport) -> Table {
    let mut t = Table::new(&["A", "B", "C", "last I score", "last J score", "trend I", "trend J", "classification"]);
    let last = |s: &ideals::ScoreSeries| s.last().map(|x| format!("{x} ({})", approx(x))).unwrap_or_default();
    for w in &r.rows {
        t.push(vec![
            w.a.clone(),
            w.b.clone(),
            w.c.clone().unwrap_or_default(),
            last(&w.scores_i),
            last(&w.scores_j),
            json!(w.trend_i).as_str().unwrap_or_default().into(),
            json!(w.trend_j).as_str().unwrap_or_default().into(),
            json!(w.classification).as_str().unwrap_or_default().into(),
        ]);
    }
    t
}

fn witness_report(command: &str, cfg: Value, r: WitnessReport) -> Report {
    let status = match r.verdict() {
        Classification::Consistent => "consistent",
        Classification::Violated => "violated",
        Classification::Inconclusive => "inconclusive",
        Classification::Skipped => "skipped",
    };
    let t = witness_table(&r);
    Report::new(command, cfg, status, json!(r), t)
}

#[derive(Args, Debug, Serialize)]
pub struct KatetovArgs {
    /// The map, from the source ideal's universe to the target's.
    #[arg(long)]
    pub func: String,
    /// Target ideal I on the codomain.
    #[arg(long)]
    pub ideal: String,
    /// Source ideal J on the domain.
    #[arg(long)]
    pub source: String,
    /// J-positive sets to test; repeatable.
    #[arg(long = "set", required = true)]
    pub sets: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn katetov(a: &KatetovArgs) -> Result<Report> {
    let f = parse_func(&a.func).on("func")?;
    let i = make_ideal(&a.ideal).on("ideal")?;
    let j = make_ideal(&a.source).on("source")?;
    let sets = a.sets.iter().map(|s| parse_set(s)).collect::<std::result::Result<Vec<_>, _>>().on("set")?;
    let sched = schedule(&a.schedule, f.domain())?;
    let r = red::katetov_check(&f, &i, &j, &sets, &sched).on("func")?;
    Ok(witness_report("katetov-check", config(a), r))
}

#[derive(Args, Debug, Serialize)]
pub struct BwArgs {
    /// Named witness, e.g. `vdw_blockindex` or `fubini_proj(fin,fin)`.
    #[arg(long)]
    pub witness: String,
    /// A set positive for the witness's source ideal.
    #[arg(long = "A")]
    pub a: String,
    /// Challenge sets; repeatable.
    #[arg(long = "C", required = true)]
    pub c: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub schedule: Vec<u64>,
    /// Skip the positivity certificate for A.
    #[arg(long)]
    pub assume_positive: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn bw(a: &BwArgs) -> Result<Report> {
    let w = red::builtin_witness(&a.witness).on("witness")?;
    let set = parse_set(&a.a).on("A")?;
    let cs = a.c.iter().map(|s| parse_set(s)).collect::<std::result::Result<Vec<_>, _>>().on("C")?;
    let sched = schedule(&a.schedule, w.f.domain())?;
    let r = red::bw_check(&w, &set, &cs, &sched, a.assume_positive).on("A")?;
    Ok(witness_report("bw-check", config(a), r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Summable,
    Edminus,
    Nwd,
}

#[derive(Args, Debug, Serialize)]
pub struct RefuteArgs {
    #[arg(long, value_enum)]
    pub construction: Construction,
    #[arg(long)]
    pub func: String,
    #[arg(long = "N")]
    pub n: u64,
    /// Dyadic intervals visited by the nwd construction.
    #[arg(long, default_value_t = NWD_INTERVALS)]
    pub intervals: usize,
    /// A challenge set to answer, truncated at N.
    #[arg(long = "B")]
    pub b: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

pub fn refute(a: &RefuteArgs) -> Result<Report> {
    let f = parse_func(&a.func).on("func")?;
    let out: RefuterOutput = match a.construction {
        Construction::Summable => red::refute_summable(&f, a.n),
        Construction::Edminus => red::refute_edminus(&f, a.n),
        Construction::Nwd => red::refute_nwd(&f, a.n, a.intervals),
    }
    .on("func")?;
    let mut t = Table::new(&["field", "value"]);
    t.push(row(&[&"case", &json!(out.case).as_str().unwrap_or_default()]));
    t.push(row(&[&"A", &out.a]));
    t.push(row(&[&"B", &list(&out.b)]));
    t.push(row(&[&"C", &list(&out.c)]));
    if let red::Evidence::Summable(ev) = &out.evidence {
        if let Some(c1) = &ev.case1 {
            t.push(row(&[&"mass of preimage of C", &c1.total]));
        }
        if let Some(c2) = &ev.case2 {
            t.push(row(&[&"mass of A", &c2.a_mass]));
        }
    }
    let mut result = json!(out);
    if let Some(b) = &a.b {
        let e = parse_set(b).on("B")?;
        let xs = truncate(&e, a.n).on("B")?.nats().on("B")?;
        let c = out.respond(&xs);
        t.push(row(&[&"response", &list(&c)]));
        result["response"] = json!({ "B": b, "C": c });
    }
    Ok(Report::new("refute", config(a), "ok", result, t))
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    #[arg(long, default_value = "fin")]
    pub ideal: String,
    /// Generator: alt, harmonic, const:p/q, indicator:<set>, random[:bits].
    #[arg(long, conflicts_with = "csv")]
    pub seq: Option<String>,
    /// CSV file of `index,value_pq` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Sequence length, and the source window for --via.
    #[arg(long = "N", default_value_t = 1024)]
    pub n: u64,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    /// Extract under the witness's source ideal for seq ∘ f, then transport.
    #[arg(long)]
    pub via: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

fn extraction_table(t: &mut Table, r: &ExtractionResult) {
    t.push(row(&[&"ideal", &r.ideal, &""]));
    t.push(row(&[&"limit", &r.limit, &approx_rat(&r.limit.midpoint())]));
    t.push(row(&[&"root size", &r.root_size, &""]));
    t.push(row(&[&"|B|", &r.b.len(), &""]));
    for s in &r.trace {
        t.push(row(&[
            &format!("level {}", s.level),
            &format!("child {} of sizes {:?}, scores {} / {}", s.chosen, s.sizes, s.scores[0], s.scores[1]),
            &format!("{} / {}", approx(&s.scores[0]), approx(&s.scores[1])),
        ]));
    }
    for e in &r.exclusions {
        t.push(row(&[&format!("exclusion eps={}", fmt_rat(&e.eps)), &format!("{} points, score {}", e.size, e.score), &approx(&e.score)]));
    }
}

fn load_sequence(a: &ExtractArgs) -> Result<Sequence> {
    match (&a.seq, &a.csv) {
        (_, Some(path)) => {
            let f = std::fs::File::open(path).map_err(|e| CliError::usage("csv", format!("{}: {e}", path.display())))?;
            Ok(bw::read_csv(f).on("csv")?)
        }
        (Some(g), None) => Ok(bw::generate(g, a.n, a.common.seed).on("seq")?),
        (None, None) => Err(CliError::usage("seq", "give --seq or --csv")),
    }
}

pub fn extract(a: &ExtractArgs) -> Result<Report> {
    let seq = load_sequence(a)?;
    let mut t = Table::new(&["field", "value", "approx"]);
    let result = match &a.via {
        None => {
            let h = make_ideal(&a.ideal).on("ideal")?;
            let r = bw::extract(&h, &seq, a.depth).on("depth")?;
            extraction_table(&mut t, &r);
            json!(r)
        }
        Some(name) => {
            let w = red::builtin_witness(name).on("via")?;
            let root = match &w.source.ideal {
                Ideal::Restrict(_, set) => truncate(set, a.n).on("via")?,
                _ => TruncationView::new(w.f.domain(), a.n, window(w.f.domain(), a.n)).on("via")?,
            };
            let pulled = seq.pullback(&w.f, &root).on("via")?;
            let source = bw::extract_on(&w.source, &pulled, &pulled.domain(), a.depth).on("depth")?;
            let r = bw::transport(&w, &source, &seq).on("via")?;
            extraction_table(&mut t, &r);
            json!({ "source": source, "transported": r })
        }
    };
    Ok(Report::new("extract", config(a), "ok", result, t))
}

#[derive(Args, Debug, Serialize)]
pub struct Fin2Args {
    /// Array generator: rowcol:<expr in n, i> or random[:bits].
    #[arg(long, default_value = "rowcol:1/(n+1)+1/(i+1)")]
    pub seq: String,
    #[arg(long, default_value_t = 64)]
    pub rows: u64,
    #[arg(long, default_value_t = 64)]
    pub cols: u64,
    #[arg(long, default_value_t = 4)]
    pub depth: u32,
    /// Neighborhood radii as p/q; repeatable.
    #[arg(long = "eps", default_value = "1/8")]
    pub eps: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

pub fn fin2(a: &Fin2Args) -> Result<Report> {
    let d = bw::generate_rows(&a.seq, a.rows, a.cols, a.common.seed).on("seq")?;
    let radii = a
        .eps
        .iter()
        .map(|s| match s.parse::<BigRational>() {
            Ok(r) if r > BigRational::default() => Ok(r),
            _ => Err(CliError::usage("eps", format!("'{s}' is not a positive rational p/q"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let r = bw::fin2_extract(&d, a.depth, &radii).on("depth")?;
    let mut t = Table::new(&["field", "value", "approx"]);
    t.push(row(&[&"outer limit", &r.limit, &approx_rat(&r.limit.midpoint())]));
    t.push(row(&[&"M", &list(&r.m), &""]));
    t.push(row(&[&"|A|", &r.a.len(), &""]));
    for e in &r.exclusions {
        let secs: Vec<String> = e.sections.iter().map(|s| format!("{}:{}", s.n, s.size)).collect();
        t.push(row(&[&format!("eps={} exclusion", fmt_rat(&e.eps)), &format!("{} points, sections {}", e.size, list(&secs)), &""]));
        t.push(row(&[&format!("eps={} cutoff row", fmt_rat(&e.eps)), &format!("{} ({} rows beyond)", e.cutoff_row, e.beyond_cutoff), &""]));
        t.push(row(&[&format!("eps={} cover K", fmt_rat(&e.eps)), &list(&e.cover.k), &""]));
    }
    Ok(Report::new("fin2-extract", config(a), "ok", json!(r), t))
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// A JSON report written with --out.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

pub fn report(a: &ReportArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| CliError::usage("input", format!("{}: {e}", a.input.display())))?;
    let r: Report = serde_json::from_str(&text).map_err(|e| CliError::usage("input", e.to_string()))?;
    if r.version != idealab::SCHEMA_VERSION {
        return Err(CliError::usage("input", format!("schema {} is not {}", r.version, idealab::SCHEMA_VERSION)));
    }
    Ok(r)
}
