use idealab::point::{window, Point, Universe};
use idealab::setexpr::{apply, contains, parse_func, parse_set, preimage, truncate, SetExprError, TruncationView};
use proptest::prelude::*;

fn finite_list(max: u64) -> impl Strategy<Value = String> {
    prop::collection::vec(0..max, 0..8).prop_map(|xs| {
        let items: Vec<String> = xs.iter().map(u64::to_string).collect();
        format!("{{{}}}", items.join(","))
    })
}

fn omega_func() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("id".to_string()),
        (1u64..6).prop_map(|k| format!("mod({k})")),
        (2u64..5).prop_map(|b| format!("blockindex({b})")),
        Just("cellindex(dyadic)".to_string()),
        (2u64..4).prop_map(|b| format!("cellindex(blocks({b}))")),
        (0u64..20, 0u64..20, 0u64..5).prop_map(|(k, v, d)| format!("table{{{k}->{v}, default->{d}}}")),
        (1u64..5).prop_map(|k| format!("comp(mod({k}),cellindex(dyadic))")),
    ]
}

fn omega_leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("evens".to_string()),
        Just("odds".to_string()),
        Just("squares".to_string()),
        (2u64..6).prop_map(|b| format!("powers({b})")),
        (2u64..5).prop_map(|b| format!("blocks({b})")),
        (2u64..5, 0u64..5).prop_map(|(b, n)| format!("block({b},{n})")),
        (0u64..20, 1u64..10).prop_map(|(a, d)| format!("ap({a},{d})")),
        (0u64..60, 0u64..300).prop_map(|(a, b)| format!("range({a},{b})")),
        finite_list(300),
    ]
}

fn pair_leaf(omega: BoxedStrategy<String>) -> impl Strategy<Value = String> {
    prop_oneof![
        Just("tri".to_string()),
        (omega.clone(), omega.clone()).prop_map(|(a, b)| format!("grid({a},{b})")),
        (0u64..20, omega.clone()).prop_map(|(m, a)| format!("row({m},{a})")),
        omega.clone().prop_map(|a| format!("pre(proj1,{a})")),
        omega.clone().prop_map(|a| format!("pre(proj2,{a})")),
        omega.prop_map(|a| format!("pre(cantor,{a})")),
    ]
}

/// Sets on ω of bounded depth.
fn omega_set() -> BoxedStrategy<String> {
    omega_leaf()
        .prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}|{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}&{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}\\{b})")),
                (omega_func(), inner.clone()).prop_map(|(f, a)| format!("pre({f},{a})")),
                (omega_func(), inner.clone()).prop_map(|(f, a)| format!("img({f},{a})")),
                pair_leaf(inner.clone()).prop_map(|s| format!("img(proj1,{s})")),
                pair_leaf(inner).prop_map(|s| format!("img(cantor,{s})")),
            ]
        })
        .boxed()
}

fn pair_set() -> BoxedStrategy<String> {
    pair_leaf(omega_set())
        .prop_recursive(2, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}|{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}&{b})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("({a}\\{b})")),
            ]
        })
        .boxed()
}

fn tagged_set() -> BoxedStrategy<String> {
    prop_oneof![
        omega_set().prop_map(|a| format!("tag0({a})")),
        omega_set().prop_map(|a| format!("tag1({a})")),
        (omega_set(), omega_set()).prop_map(|(a, b)| format!("(tag0({a})|tag1({b}))")),
        (omega_func(), omega_func(), omega_set()).prop_map(|(f, g, a)| format!("pre(tagjoin({f},{g}),{a})")),
    ]
    .boxed()
}

fn q_set() -> BoxedStrategy<String> {
    prop_oneof![
        Just("qall".to_string()),
        (0u64..8, 1u64..8, 1u64..6).prop_map(|(p, q, r)| format!("qball({}/{},1/{})", p.min(q), q, r + 1)),
        omega_set().prop_map(|a| format!("pre(qindex,{a})")),
    ]
    .boxed()
}

/// Checks `contains` against the truncation on the whole window; skips
/// expressions the evaluator reports as undecidable or over budget.
fn agree(text: &str, n: u64) -> Result<(), TestCaseError> {
    let e = parse_set(text).unwrap_or_else(|err| panic!("{text}: {err}"));
    let v = match truncate(&e, n) {
        Ok(v) => v,
        Err(SetExprError::Undecidable(_) | SetExprError::Budget(_)) => return Ok(()),
        Err(err) => panic!("{text}: {err}"),
    };
    if !v.exact {
        return Ok(());
    }
    for p in window(e.universe(), n) {
        match contains(&e, &p) {
            Ok(inside) => prop_assert_eq!(inside, v.contains(&p), "{} at {} cutoff {}", text, p, n),
            Err(SetExprError::Undecidable(_) | SetExprError::Budget(_)) => {}
            Err(err) => panic!("{text} at {p}: {err}"),
        }
    }
    Ok(())
}

fn monotone(text: &str, n: u64, m: u64) -> Result<(), TestCaseError> {
    let e = parse_set(text).unwrap();
    if let (Ok(a), Ok(b)) = (truncate(&e, n.min(m)), truncate(&e, n.max(m))) {
        if a.exact && b.exact {
            prop_assert!(a.is_subset(&b), "{}", text);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn omega_truncation_matches_membership(text in omega_set(), n in 1u64..=256) {
        agree(&text, n)?;
    }

    #[test]
    fn pair_truncation_matches_membership(text in pair_set(), n in 1u64..=24) {
        agree(&text, n)?;
    }

    #[test]
    fn tagged_truncation_matches_membership(text in tagged_set(), n in 1u64..=128) {
        agree(&text, n)?;
    }

    #[test]
    fn rational_truncation_matches_membership(text in q_set(), n in 1u64..=128) {
        agree(&text, n)?;
    }

    #[test]
    fn printing_is_idempotent(text in prop_oneof![omega_set(), pair_set(), tagged_set(), q_set()]) {
        let once = parse_set(&text).unwrap().to_string();
        let twice = parse_set(&once).unwrap().to_string();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn truncations_grow_with_the_cutoff(text in omega_set(), n in 1u64..=256, m in 1u64..=256) {
        monotone(&text, n, m)?;
    }

    #[test]
    fn pair_truncations_grow_with_the_cutoff(text in pair_set(), n in 1u64..=20, m in 1u64..=20) {
        monotone(&text, n, m)?;
    }

    #[test]
    fn preimage_lands_in_the_set(f in omega_func(), text in omega_set(), n in 1u64..=200) {
        let f = parse_func(&f).unwrap();
        let e = parse_set(&text).unwrap();
        let v = TruncationView::new(Universe::Omega, n, window(Universe::Omega, n)).unwrap();
        let pre = match preimage(&f, &e, &v) {
            Ok(pre) => pre,
            Err(SetExprError::Undecidable(_) | SetExprError::Budget(_)) => return Ok(()),
            Err(err) => panic!("{err}"),
        };
        let values: Vec<u64> = pre.points.iter().map(|p| apply(&f, p).unwrap().unwrap().as_u64().unwrap()).collect();
        if let Some(&top) = values.iter().max() {
            if let Ok(t) = truncate(&e, top + 1) {
                prop_assert!(values.iter().all(|x| t.contains(&Point::nat(*x))));
            }
        }
    }
}
