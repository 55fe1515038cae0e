use bundle_degrees::cohomology::{admissible_degree, Space};
use bundle_degrees::degree::{mc_degree, preimage_degree, EngineConfig};
use bundle_degrees::manifold::Seed;
use bundle_degrees::maps::resolve_map;

fn cfg(starts: usize) -> EngineConfig {
    EngineConfig {
        num_targets: 3,
        num_starts: starts,
        ..EngineConfig::default()
    }
}

fn degree(name: &str, starts: usize, seed: u64) -> i64 {
    let r = preimage_degree(&resolve_map(name).unwrap(), &cfg(starts), Seed(seed))
        .unwrap()
        .require_agreement()
        .unwrap();
    r.degree
}

#[test]
fn composition_multiplies_degrees() {
    assert_eq!(degree("compose(susp5:3,f)", 1500, 1), 6);
    assert_eq!(degree("compose(su2pow:-1,su2pow:2)", 500, 2), -2);
}

#[test]
fn products_multiply_degrees() {
    assert_eq!(degree("product(su2pow:2,susp5:-2)", 1500, 3), -4);
    assert_eq!(degree("product(susp3:0,f)", 300, 4), 0);
}

#[test]
fn orientation_reversal_and_inverse() {
    assert_eq!(degree("susp5:-1", 200, 5), -1);
    assert_eq!(degree("su3pow:-1", 500, 6), 1);
}

#[test]
fn engines_agree_on_self_maps() {
    for (name, samples) in [("su2pow:3", 100_000), ("compose(susp5:-1,f)", 100_000)] {
        let phi = resolve_map(name).unwrap();
        let pre = degree(name, 1000, 7);
        let mc = mc_degree(&phi, samples, Seed(8), 1).unwrap();
        assert!(mc.agreement, "{name}: {mc:?}");
        assert_eq!(mc.degree, pre, "{name}");
    }
}

#[test]
fn engine_degrees_are_admissible() {
    for (name, source, target) in [
        ("g", Space::SU3, Space::SU3),
        ("su3pow:2", Space::SU3, Space::SU3),
        ("ftilde:3", Space::SU3, Space::SU3),
        ("product(su2pow:3,susp5:1)", Space::S3xS5, Space::S3xS5),
    ] {
        let d = degree(name, 2000, 9);
        assert!(admissible_degree(source, target, d), "{name}: {d}");
    }
}
