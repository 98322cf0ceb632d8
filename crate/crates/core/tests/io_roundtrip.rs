use proptest::prelude::*;
use symdesign::io::{
    parse_group, parse_matrix_bytes, parse_matrix_text, parse_orbit_matrix, serialize_bundle, serialize_group,
    serialize_orbit_matrix, serialize_structure, MatrixBundle,
};
use symdesign::{Error, IncidenceStructure, PermGroup, Permutation};

fn structure() -> impl Strategy<Value = IncidenceStructure> {
    (1usize..=64, 1usize..=64).prop_flat_map(|(v, b)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), v), b)
            .prop_map(|rows| IncidenceStructure::from_rows(&rows).unwrap())
    })
}

fn bundle() -> impl Strategy<Value = MatrixBundle> {
    proptest::collection::vec((structure(), proptest::option::of("[a-z][a-z0-9_]{0,8}")), 1..4).prop_map(|items| {
        let mut seen = std::collections::HashSet::new();
        let (structures, labels): (Vec<_>, Vec<_>) = items
            .into_iter()
            .map(|(s, l)| (s, l.filter(|l| seen.insert(l.clone()))))
            .unzip();
        MatrixBundle::new(structures, labels).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_matrix_round_trips(s in structure()) {
        let parsed = parse_matrix_text(&serialize_structure(&s)).unwrap();
        prop_assert_eq!(parsed.structures, vec![s]);
    }

    #[test]
    fn bundles_round_trip(b in bundle()) {
        let text = serialize_bundle(&b);
        let parsed = parse_matrix_text(&text).unwrap();
        prop_assert_eq!(&parsed.structures, &b.structures);
        prop_assert_eq!(&parsed.labels, &b.labels);
        prop_assert_eq!(serialize_bundle(&parsed), text);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        if let Err(e) = parse_matrix_bytes(&bytes) {
            prop_assert!(matches!(e, Error::Parse { .. }), "{e:?}");
        }
    }

    #[test]
    fn near_valid_text_never_panics(text in "[01 \\n#a]{0,300}") {
        let _ = parse_matrix_text(&text);
        let _ = parse_orbit_matrix(&text);
        let _ = parse_group(&text);
    }

    #[test]
    fn groups_round_trip(images in proptest::collection::vec(Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(), 1..4)) {
        let gens: Vec<Permutation> = images.into_iter().map(|i| Permutation::from_images(i).unwrap()).collect();
        let g = PermGroup::new(9, gens).unwrap();
        let back = parse_group(&serialize_group(&g)).unwrap();
        prop_assert_eq!(back.generators(), g.generators());
        prop_assert_eq!(back.order(), g.order());
    }
}

#[test]
fn errors_carry_line_numbers() {
    let cases: [(&str, usize); 4] = [("101\n10\n", 2), ("101\n1x1\n", 2), ("\n\n", 2), ("a\n110\n\na\n011\n", 5)];
    for (text, line) in cases {
        match parse_matrix_text(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn orbit_matrix_fixtures_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for name in ["m1.om", "m2.om", "fano.om", "biplane.om"] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let om = parse_orbit_matrix(&text).unwrap();
        assert_eq!(parse_orbit_matrix(&serialize_orbit_matrix(&om)).unwrap(), om, "{name}");
    }
}
