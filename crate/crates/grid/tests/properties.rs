//! Property checks for the grid layer.

use opflab_grid::{edge_weight, parse_matpower, transform_graph, GridCase};
use proptest::prelude::*;

proptest! {
    // Eq-style identity: the exponent acts multiplicatively.
    #[test]
    fn edge_weight_multiplicative_in_exponent(
        z in 1e-4f64..1e3,
        k1 in -3.0f64..3.0,
        k2 in -3.0f64..3.0,
    ) {
        let lhs = edge_weight(z, k1 + k2).unwrap();
        let rhs = edge_weight(z, k1).unwrap() * edge_weight(z, k2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    // Canonical serialization round-trips field-for-field.
    #[test]
    fn canonical_round_trip(case in arbitrary_case()) {
        let back = GridCase::from_canonical(&case.to_canonical()).unwrap();
        prop_assert_eq!(case, back);
    }
}

/// Random small-but-valid ring grids.
fn arbitrary_case() -> impl Strategy<Value = GridCase> {
    (3usize..8, 0u64..1000).prop_map(|(n, salt)| {
        let mut bus = String::new();
        let mut gen = String::new();
        let mut cost = String::new();
        let mut branch = String::new();
        for i in 1..=n {
            let t = if i == 1 { 3 } else if i % 2 == 0 { 2 } else { 1 };
            let pd = if i % 2 == 1 { 10.0 + (salt % 17) as f64 + i as f64 } else { 0.0 };
            bus.push_str(&format!("{i} {t} {pd} {} 0 0 1 1 0 135 1 1.1 0.9;", pd * 0.2));
            if i % 2 == 0 || i == 1 {
                gen.push_str(&format!("{i} 0 0 50 -50 1 100 1 {} 0;", 40.0 + (salt % 7) as f64));
                cost.push_str(&format!("2 0 0 3 0.0{} {} 0;", 1 + salt % 9, 20 + salt % 15));
            }
            let j = i % n + 1;
            branch.push_str(&format!("{i} {j} 0.01 0.{} 0.02 90 0 0 0 0 1 -360 360;", 1 + (i + salt as usize) % 8));
        }
        let text = format!(
            "mpc.baseMVA = 100;\nmpc.bus = [{bus}];\nmpc.gen = [{gen}];\nmpc.branch = [{branch}];\nmpc.gencost = [{cost}];"
        );
        parse_matpower(&text).expect("generated case parses")
    })
}

#[test]
fn transform_node_count_matches_gen_plus_load_on_bundled_cases() {
    let dir = format!("{}/../../cases", env!("CARGO_MANIFEST_DIR"));
    let mut checked = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "m").unwrap_or(false) {
            let case = parse_matpower(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let g = transform_graph(&case).unwrap();
            assert_eq!(
                g.n_nodes(),
                case.n_gens() + case.n_loads(),
                "node count mismatch for {}",
                path.display()
            );
            // Same-bus nodes are pairwise connected.
            for (i, a) in g.nodes.iter().enumerate() {
                for (j, b) in g.nodes.iter().enumerate().skip(i + 1) {
                    if a.bus == b.bus {
                        assert!(g.adjacency[(i, j)] > 0.0);
                    }
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 1, "no bundled cases found in {dir}");
}
