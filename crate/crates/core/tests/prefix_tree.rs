use dowry_core::prefix_tree::{
    build_annotated_tree, child, export_tree, extract_strike_set, verify_compression, Prefix,
};
use dowry_core::rational::ratio;
use dowry_core::{compute_q_tables, Error};
use num_bigint::BigInt;
use proptest::prelude::*;

fn p(values: &[u8]) -> Prefix {
    Prefix::new(values.to_vec()).unwrap()
}

fn names(prefixes: Vec<&Prefix>) -> Vec<String> {
    prefixes.iter().map(|p| p.to_string()).collect()
}

#[test]
fn child_examples() {
    assert_eq!(child(&p(&[1, 2, 3]), 4).unwrap(), p(&[1, 2, 3, 4]));
    assert_eq!(child(&p(&[1, 2, 3]), 1).unwrap(), p(&[2, 3, 4, 1]));
    assert_eq!(child(&p(&[1]), 1).unwrap(), p(&[2, 1]));
    assert_eq!(child(&p(&[1, 2, 3]), 5).unwrap_err(), Error::ChildOutOfRange { j: 5, len: 3 });
}

#[test]
fn printed_strike_sets() {
    let tree = build_annotated_tree(4, 2).unwrap();
    let one = extract_strike_set(&tree, 1).unwrap();
    assert_eq!(names(one.prefixes()), ["[12]", "[213]", "[3124]", "[3214]"]);
    assert_eq!(one.value_numerator(&tree), BigInt::from(11));
    assert_eq!(one.value(&tree), ratio(11, 24));

    let two = extract_strike_set(&tree, 2).unwrap();
    assert_eq!(names(two.prefixes()), ["[1]", "[12]", "[213]", "[3124]", "[3214]"]);
    assert_eq!(names(two.layer(2)), ["[1]"]);
    assert_eq!(names(two.layer(1)), ["[12]", "[213]", "[3124]", "[3214]"]);
    assert_eq!(two.value(&tree), ratio(17, 24));

    let tree = build_annotated_tree(2, 1).unwrap();
    assert_eq!(names(extract_strike_set(&tree, 1).unwrap().prefixes()), ["[1]"]);
}

#[test]
fn conservation_laws() {
    for n in 1..=6 {
        let tree = build_annotated_tree(n, 3).unwrap();
        for node in tree.nodes() {
            if node.children.is_empty() {
                continue;
            }
            let kids = &tree.nodes()[node.children.clone()];
            let sd: BigInt = kids.iter().map(|c| c.sd.clone()).sum();
            assert_eq!(sd, node.sd);
            for i in 0..3 {
                let qo: BigInt = kids.iter().map(|c| c.qbarnum[i].clone()).sum();
                assert_eq!(qo, node.qonum[i]);
                if node.parent.is_some() {
                    let prev = if i == 0 { BigInt::from(0) } else { node.qonum[i - 1].clone() };
                    assert_eq!(node.qnum[i], &node.win + prev);
                }
            }
        }
    }
}

#[test]
fn compression_and_strike_sets_up_to_eight() {
    for n in 1..=8 {
        let tree = build_annotated_tree(n, 3).unwrap();
        let report = verify_compression(&tree);
        assert!(report.passed, "n = {n}: {:?}", report.counterexample);
        for s in 1..=3 {
            let table = compute_q_tables(n, s).unwrap();
            let st = extract_strike_set(&tree, s).unwrap();
            st.validate(&tree).unwrap_or_else(|e| panic!("n = {n}, s = {s}: {e}"));
            assert_eq!(st.value(&tree), table.optimal_value(), "n = {n}, s = {s}");
            assert_eq!(tree.optimal_value(s), table.optimal_value());
        }
    }
}

#[test]
fn export_shapes() {
    let tree = build_annotated_tree(4, 2).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&export_tree(&tree, "json").unwrap()).unwrap();
    assert_eq!(doc["optimal"], "17/24");
    let mut flagged: Vec<&str> = doc["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|n| n["strike"] == true)
        .map(|n| n["prefix"].as_str().unwrap())
        .collect();
    flagged.sort_by_key(|s| (s.len(), s.to_string()));
    assert_eq!(flagged, ["[1]", "[12]", "[213]", "[3124]", "[3214]"]);

    let dot = String::from_utf8(export_tree(&tree, "dot").unwrap()).unwrap();
    assert_eq!(dot.matches("shape=box").count(), 5);
    assert_eq!(export_tree(&tree, "png").unwrap_err(), Error::UnknownFormat("png".into()));
    assert_eq!(export_tree(&tree, "json").unwrap(), export_tree(&tree, "json").unwrap());
}

fn prefix_strategy() -> impl Strategy<Value = Prefix> {
    (1usize..9).prop_flat_map(|len| {
        Just((1..=len as u8).collect::<Vec<u8>>())
            .prop_shuffle()
            .prop_map(|v| Prefix::new(v).unwrap())
    })
}

proptest! {
    #[test]
    fn child_extends_and_relabels(prefix in prefix_strategy(), j_frac in 0.0f64..1.0) {
        let len = prefix.len() + 1;
        let j = 1 + ((j_frac * len as f64) as usize).min(len - 1);
        let c = child(&prefix, j).unwrap();
        prop_assert_eq!(c.len(), len);
        prop_assert_eq!(*c.values().last().unwrap() as usize, j);
        prop_assert!(prefix.is_prefix_of(&c));
        prop_assert_eq!(c.ends_in_maximum(), j == len);
        prop_assert!(Prefix::new(c.values().to_vec()).is_ok());
    }
}
