mod common;

use std::collections::BTreeSet;

use common::{brute_force_ap, rng};
use idealab::point::Point;
use idealab::reductions::{
    block_ap_indices, bw_check, builtin_witness, katetov_check, refute_edminus, refute_summable, CaseTag,
    Classification, Evidence,
};
use idealab::score::rat;
use idealab::setexpr::{apply, image, parse_func, parse_set, truncate, SetExpr};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn set(s: &str) -> SetExpr {
    parse_set(s).unwrap()
}

/// Elements of `blocks(b)` below `n`, listed block by block.
fn block_elements(b: u64, n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = 1u64;
    for k in 0.. {
        if start >= n {
            break;
        }
        for j in 0..=k {
            if start + j < n {
                out.push((k, start + j));
            }
        }
        match start.checked_mul(b) {
            Some(s) => start = s,
            None => break,
        }
    }
    out
}

#[test]
fn selectors_pick_inside_the_image() {
    let cases: &[(&str, &[&str], &[u64])] = &[
        ("identity(fin)", &["evens", "squares", "ap(1,3)"], &[100, 1_000, 10_000]),
        ("vdw_blockindex", &["blocks(10)", "pre(blockindex(10),evens)"], &[1_000, 10_000, 100_000]),
        ("oplus_left(fin,fin)", &["evens", "powers(2)"], &[100, 1_000, 10_000]),
        ("fubini_proj(fin,fin)", &["grid(evens,odds)", "pre(proj1,squares)", "tri"], &[8, 16, 32]),
        ("gden_cellindex(dyadic)", &["evens", "odds", "ap(0,3)"], &[256, 4_096, 65_536]),
    ];
    for (name, sets, schedule) in cases {
        let w = builtin_witness(name).unwrap();
        let selector = w.selector.clone().unwrap();
        for a in *sets {
            let a = set(a);
            let mut sizes = Vec::new();
            for &n in *schedule {
                let b = match selector.select(&a, n).unwrap() {
                    SetExpr::Finite(_, ps) => ps,
                    other => panic!("{other}"),
                };
                let fa = image(&w.f, &truncate(&a, n).unwrap()).unwrap();
                for p in &b {
                    assert!(fa.contains(p), "{name} on {a} at {n}: {p} outside f[A]");
                }
                sizes.push(b.len());
            }
            assert!(sizes.windows(2).all(|s| s[0] <= s[1]) && sizes[0] < sizes[sizes.len() - 1], "{name} on {a}: {sizes:?}");
        }
    }
}

#[test]
fn block_aps_oracle() {
    let mut r = rng(7);
    let elements = block_elements(3, 3u64.pow(7));
    for _ in 0..300 {
        let xs: Vec<u64> = elements.iter().map(|e| e.1).filter(|_| r.gen_bool(0.7)).collect();
        let got = block_ap_indices(&3u64.into(), &xs);
        let mut reached = 2;
        let mut want = Vec::new();
        for k in 0..8 {
            let in_block: Vec<u64> = elements.iter().filter(|e| e.0 == k && xs.contains(&e.1)).map(|e| e.1).collect();
            let len = brute_force_ap(&in_block);
            if len > reached {
                want.push(k);
                reached = len;
            }
        }
        assert_eq!(got, want, "{xs:?}");
    }
}

#[test]
fn katetov_violations_are_bw_violations() {
    let schedule = [100, 1_000, 10_000, 100_000];
    let cases: &[(&str, &str, &[&str])] = &[
        ("identity(summable(harmonic),fin)", "powers(2)", &["evens"]),
        ("identity(summable(harmonic),fin)", "ap(0,1)", &["evens", "odds"]),
        ("identity(fin)", "evens", &["ap(0,4)", "squares"]),
        ("identity(vdw,fin)", "squares", &["evens"]),
        ("identity(vdw,fin)", "blocks(10)", &["ap(0,1)"]),
        ("vdw_blockindex", "blocks(10)", &["evens", "odds"]),
        ("gden_cellindex(dyadic)", "evens", &["evens", "ap(0,3)"]),
    ];
    let mut violations = 0;
    for (name, a, challenges) in cases {
        let w = builtin_witness(name).unwrap();
        let a = set(a);
        let k = katetov_check(&w.f, &w.target, &w.source, std::slice::from_ref(&a), &schedule).unwrap();
        let cs: Vec<SetExpr> = challenges.iter().map(|c| set(c)).collect();
        let bw = bw_check(&w, &a, &cs, &schedule, true).unwrap();
        if k.verdict() == Classification::Violated {
            violations += 1;
            assert_eq!(bw.verdict(), Classification::Violated, "{name} on {a}");
        }
    }
    assert!(violations >= 2, "only {violations} katetov violations in the catalog");
}

#[test]
fn block_lemma_to_a_million() {
    let elements = block_elements(10, 1_000_000);
    let members: BTreeSet<u64> = elements.iter().map(|e| e.1).collect();
    let block = |x: u64| elements.iter().find(|e| e.1 == x).unwrap().0;
    let mut crossing = 0;
    for &(kx, x) in &elements {
        for &(_, y) in elements.iter().filter(|e| e.1 > x) {
            let z = 2 * y - x;
            if members.contains(&z) && (block(y) != kx || block(z) != kx) {
                crossing += 1;
            }
        }
    }
    assert_eq!(crossing, 0);
}

/// Harmonic mass `Σ 1/(i+1)` of `{i < n : f(i) ∈ c}`.
fn fibre_mass(f: &str, c: &[u64], n: u64) -> BigRational {
    let f = parse_func(f).unwrap();
    let mut total = BigRational::zero();
    for i in 0..n {
        if let Some(v) = apply(&f, &Point::nat(i)).unwrap() {
            if c.contains(&v.as_u64().unwrap()) {
                total += rat(1, i as i64 + 1);
            }
        }
    }
    total
}

#[test]
fn summable_case_one_levels() {
    for f in ["id", "cellindex(blocks(2))", "comp(mod(7),id)", "blockindex(2)"] {
        let n = 1 << 12;
        let func = parse_func(f).unwrap();
        let out = refute_summable(&func, n).unwrap();
        assert_eq!(out, refute_summable(&func, n).unwrap(), "{f}");
        let Evidence::Summable(ev) = &out.evidence else { panic!() };
        if out.case != CaseTag::Case1 {
            continue;
        }
        let case1 = ev.case1.as_ref().unwrap();
        let mut sum = BigRational::zero();
        for (j, c) in case1.c.iter().enumerate() {
            let m = fibre_mass(f, &[*c], n);
            assert!(m <= BigRational::new(BigInt::one(), BigInt::one() << j), "{f}: c_{j} = {c}");
            assert_eq!(case1.masses[j].exact(), Some(&m));
            sum += m;
        }
        assert_eq!(case1.total.exact(), Some(&sum));
        assert!(sum < rat(2, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn edminus_bundles_and_responses(
        f in prop_oneof![Just("cantor"), Just("proj2"), Just("comp(mod(97),cantor)"), Just("comp(blockindex(2),cantor)")],
        n in 8u64..=40,
        challenge in prop::collection::btree_set(0u64..2_000, 0..200),
    ) {
        let out = refute_edminus(&parse_func(f).unwrap(), n).unwrap();
        let Evidence::Edminus(ev) = &out.evidence else { panic!() };
        if out.case == CaseTag::Fiber {
            return Ok(());
        }
        let mut seen = BTreeSet::new();
        for b in &ev.bundles {
            prop_assert_eq!(b.columns.len(), b.values.len());
            for v in &b.values {
                prop_assert!(seen.insert(*v), "{} repeats {}", f, v);
            }
        }
        prop_assert!(ev.distinct);
        prop_assert!(ev.response_sections.iter().all(|(_, s)| *s <= 1));
        let b: Vec<u64> = challenge.into_iter().collect();
        let c = out.respond(&b);
        for x in &c {
            prop_assert!(b.contains(x));
        }
        for bundle in &ev.bundles {
            prop_assert!(bundle.values.iter().filter(|v| c.contains(v)).count() <= 1);
        }
    }
}
