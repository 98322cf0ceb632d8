use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use symdesign::canon::{are_isomorphic, canonical_form};
use symdesign::expand::{expand, BlockAction, ExpansionProblem};
use symdesign::io::{parse_group, parse_matrix_text, parse_orbit_matrix};
use symdesign::orbmat::{equivalent_up_to_ordering, tactical_decomposition};
use symdesign::reconstruct::Reconstruction;
use symdesign::report::compute_report;
use symdesign::{IncidenceStructure, Permutation, SearchLimits};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

fn random_perm(n: usize, rng: &mut StdRng) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Permutation::from_images(images).unwrap()
}

#[test]
fn canonical_form_is_idempotent_and_witnessed() {
    let mut rng = StdRng::seed_from_u64(11);
    for name in ["fano.dmat", "biplane.dmat", "janko.dmat"] {
        let s = parse_matrix_text(&read(name)).unwrap().structures.remove(0);
        let cf = canonical_form(&s).unwrap();
        assert_eq!(canonical_form(&cf.canonical_matrix).unwrap().canonical_matrix, cf.canonical_matrix);
        let t = s.permuted(&random_perm(s.v(), &mut rng), &random_perm(s.b(), &mut rng)).unwrap();
        let witness = are_isomorphic(&s, &t).unwrap().expect("relabeling is an isomorphism");
        assert_eq!(witness.apply(&s).unwrap(), t);
    }
}

#[test]
fn expansion_output_is_sound() {
    for (om, group) in [("fano.om", "z7.perms"), ("biplane.om", "z11.perms")] {
        let om = parse_orbit_matrix(&read(om)).unwrap();
        let group = parse_group(&read(group)).unwrap();
        for action in [BlockAction::Unrestricted, BlockAction::AnyStabilizer] {
            let mut problem = ExpansionProblem::new(om.clone(), group.clone());
            problem.block_action = action;
            let result = expand(&problem).unwrap();
            assert!(result.exhausted);
            assert!(!result.designs.is_empty());
            for d in &result.designs {
                assert!(d.as_2design().is_some());
                let back = tactical_decomposition(d, &group).unwrap().matrix;
                assert!(equivalent_up_to_ordering(&back, &om).is_some());
            }
        }
    }
}

#[test]
fn report_is_deterministic() {
    let bundle = parse_matrix_text(&read("designs176.dmat")).unwrap();
    let a = compute_report(&bundle, SearchLimits::default()).unwrap();
    let b = compute_report(&bundle, SearchLimits::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.classes_with_duals, 7);
}

#[test]
fn reconstruction_reproduces_fixtures() {
    let mut rng = StdRng::seed_from_u64(1);
    let r = Reconstruction::compute(&mut rng).unwrap();
    for (name, design) in r.labeled() {
        let fixture: IncidenceStructure = parse_matrix_text(&read(&format!("{name}.dmat"))).unwrap().structures.remove(0);
        assert_eq!(&fixture, design, "{name}");
    }
}
