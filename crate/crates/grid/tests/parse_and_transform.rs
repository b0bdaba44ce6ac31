//! Parser, transform and Laplacian behaviour on hand-written fixtures.

use approx::assert_relative_eq;
use opflab_grid::{
    edge_weight, parse_matpower, scaled_laplacian, transform_graph, transform_graph_weighted,
    BusType, GridCase, GridError, Mat, NodeKind,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../cases/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"))
}

/// bus1 hosts two generators, bus2 one load, single branch between them.
fn two_bus_two_gen() -> GridCase {
    parse_matpower(
        "mpc.baseMVA = 100;
         mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.06 0.94; 2 1 40 5 0 0 1 1 0 135 1 1.06 0.94];
         mpc.gen = [1 0 0 50 -50 1 100 1 100 0; 1 0 0 50 -50 1 100 1 80 0];
         mpc.branch = [1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360];
         mpc.gencost = [2 0 0 3 0.02 30 0; 2 0 0 3 0.01 25 0];",
    )
    .unwrap()
}

#[test]
fn parses_two_bus_fixture_to_per_unit() {
    let case = parse_matpower(&fixture("case2.m")).unwrap();
    assert_eq!(case.name, "case2");
    assert_eq!(case.n_buses(), 2);
    assert_eq!(case.n_gens(), 1);
    assert_eq!(case.n_loads(), 1);
    assert_eq!(case.buses[0].bus_type, BusType::Slack);
    assert_relative_eq!(case.loads[0].pd, 0.5);
    assert_relative_eq!(case.loads[0].qd, 0.1);
    assert_relative_eq!(case.gens[0].p_max, 2.0);
    assert_relative_eq!(case.gens[0].q_min, -1.0);
    // $/MWh cost re-expressed over per-unit power.
    assert_relative_eq!(case.gens[0].cost.c2, 100.0);
    assert_relative_eq!(case.gens[0].cost.c1, 2000.0);
    assert_relative_eq!(case.branches[0].rate_a.unwrap(), 1.5);
}

#[test]
fn missing_gencost_is_reported() {
    let text = "mpc.baseMVA = 100;
        mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.1 0.9];
        mpc.gen = [1 0 0 10 -10 1 100 1 20 0];
        mpc.branch = [];";
    match parse_matpower(text) {
        Err(GridError::MissingMatrix("gencost")) => {}
        other => panic!("expected missing gencost, got {other:?}"),
    }
}

#[test]
fn duplicate_bus_and_missing_slack_are_reported() {
    let dup = "mpc.baseMVA = 100;
        mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.1 0.9; 1 1 0 0 0 0 1 1 0 135 1 1.1 0.9];
        mpc.gen = []; mpc.branch = []; mpc.gencost = [];";
    assert!(matches!(parse_matpower(dup), Err(GridError::DuplicateBusId(1))));

    let no_slack = "mpc.baseMVA = 100;
        mpc.bus = [1 1 0 0 0 0 1 1 0 135 1 1.1 0.9];
        mpc.gen = []; mpc.branch = []; mpc.gencost = [];";
    assert!(matches!(parse_matpower(no_slack), Err(GridError::NoSlackBus)));
}

#[test]
fn non_numeric_entry_reports_position() {
    let text = "mpc.baseMVA = 100;\nmpc.bus = [1 3 zap 0 0 0 1 1 0 135 1 1.1 0.9];";
    match parse_matpower(text) {
        Err(GridError::NonNumeric { line, token, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(token, "zap");
        }
        other => panic!("expected non-numeric error, got {other:?}"),
    }
}

#[test]
fn canonical_round_trip_is_identity() {
    let case = parse_matpower(&fixture("case2.m")).unwrap();
    let text = case.to_canonical();
    let back = GridCase::from_canonical(&text).unwrap();
    assert_eq!(case, back);
}

#[test]
fn edge_weight_examples() {
    assert_relative_eq!(edge_weight(0.5, 1.0).unwrap(), 2.0, max_relative = 1e-12);
    assert_relative_eq!(edge_weight(7.3, 0.0).unwrap(), 1.0);
    assert_relative_eq!(edge_weight(1.0, 3.7).unwrap(), 1.0);
    assert!(edge_weight(0.0, 1.0).is_err());
    assert!(edge_weight(-2.0, 1.0).is_err());
}

#[test]
fn transform_two_gens_one_load() {
    let g = transform_graph(&two_bus_two_gen()).unwrap();
    assert_eq!(g.n_nodes(), 3);
    assert_eq!(g.nodes[0].kind, NodeKind::Gen);
    assert_eq!(g.nodes[2].kind, NodeKind::Load);
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|&(u, v, _)| (u, v)).collect();
    assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    assert!(g.connected);
}

#[test]
fn transform_single_bus_gen_and_load() {
    let case = parse_matpower(
        "mpc.baseMVA = 100;
         mpc.bus = [7 3 30 6 0 0 1 1 0 135 1 1.1 0.9];
         mpc.gen = [7 0 0 50 -50 1 100 1 100 0];
         mpc.branch = [];
         mpc.gencost = [2 0 0 3 0.01 20 0];",
    )
    .unwrap();
    let g = transform_graph(&case).unwrap();
    assert_eq!(g.n_nodes(), 2);
    assert_eq!(g.edges.len(), 1);
    // No incident branch: intra-bus clique falls back to unit weight.
    assert_relative_eq!(g.edges[0].2, 1.0);
}

#[test]
fn junction_bus_is_eliminated_with_series_impedance() {
    // gen -- junction -- load, |Z| = 0.1 and 0.2 per leg.
    let case = parse_matpower(
        "mpc.baseMVA = 100;
         mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.1 0.9;
                    2 1 0 0 0 0 1 1 0 135 1 1.1 0.9;
                    3 1 20 2 0 0 1 1 0 135 1 1.1 0.9];
         mpc.gen = [1 0 0 50 -50 1 100 1 100 0];
         mpc.branch = [1 2 0 0.1 0 0 0 0 0 0 1 -360 360;
                       2 3 0 0.2 0 0 0 0 0 0 1 -360 360];
         mpc.gencost = [2 0 0 3 0.01 20 0];",
    )
    .unwrap();
    let g = transform_graph_weighted(&case, 1.0).unwrap();
    assert_eq!(g.n_nodes(), 2);
    assert_eq!(g.edges.len(), 1);
    // Series |Z| = 0.3, weight = 1/0.3 at k = 1.
    assert_relative_eq!(g.edges[0].2, 1.0 / 0.3, max_relative = 1e-12);
}

#[test]
fn parallel_branches_combine_reciprocally() {
    let case = parse_matpower(
        "mpc.baseMVA = 100;
         mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.1 0.9; 2 1 20 2 0 0 1 1 0 135 1 1.1 0.9];
         mpc.gen = [1 0 0 50 -50 1 100 1 100 0];
         mpc.branch = [1 2 0 0.2 0 0 0 0 0 0 1 -360 360;
                       1 2 0 0.2 0 0 0 0 0 0 1 -360 360];
         mpc.gencost = [2 0 0 3 0.01 20 0];",
    )
    .unwrap();
    let g = transform_graph_weighted(&case, 1.0).unwrap();
    // Two 0.2 legs in parallel give |Z| = 0.1, weight 10.
    assert_relative_eq!(g.edges[0].2, 10.0, max_relative = 1e-12);
}

#[test]
fn laplacian_two_node_textbook_value() {
    let mut a = Mat::zeros(2, 2);
    a[(0, 1)] = 1.0;
    a[(1, 0)] = 1.0;
    let norm = opflab_grid::graph::normalized_laplacian(&a);
    assert_relative_eq!(norm[(0, 0)], 1.0);
    assert_relative_eq!(norm[(0, 1)], -1.0);
    // lambda_max = 2 so the scaled form is L - I up to the safety factor.
    let scaled = scaled_laplacian(&a);
    assert_relative_eq!(scaled[(0, 0)], 0.0, epsilon = 1e-6);
    assert_relative_eq!(scaled[(0, 1)], -1.0, epsilon = 1e-6);
}

#[test]
fn laplacian_of_edgeless_graph_is_zero_and_scales_to_minus_identity() {
    let a = Mat::zeros(3, 3);
    let norm = opflab_grid::graph::normalized_laplacian(&a);
    assert!(norm.data.iter().all(|&v| v.abs() < 1e-15));
    let scaled = scaled_laplacian(&a);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { -1.0 } else { 0.0 };
            assert_relative_eq!(scaled[(i, j)], want);
        }
    }
}

#[test]
fn laplacian_eigenvalues_within_bounds_on_path_graph() {
    // Path of 3 unit edges; oracle eigensolver from nalgebra.
    let n = 4;
    let mut a = Mat::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
        a[(i + 1, i)] = 1.0;
    }
    let norm = opflab_grid::graph::normalized_laplacian(&a);
    let m = nalgebra::DMatrix::from_row_slice(n, n, &norm.data);
    let eigs = m.symmetric_eigenvalues();
    for &e in eigs.iter() {
        assert!((-1e-12..=2.0 + 1e-12).contains(&e), "eigenvalue {e} outside [0, 2]");
    }
    let scaled = scaled_laplacian(&a);
    let m = nalgebra::DMatrix::from_row_slice(n, n, &scaled.data);
    for &e in m.symmetric_eigenvalues().iter() {
        assert!(e.abs() <= 1.0 + 1e-9, "scaled eigenvalue {e} outside [-1, 1]");
    }
}

#[test]
fn remove_line_flags_islanding_and_preserves_input() {
    let case = parse_matpower(&fixture("case2.m")).unwrap();
    let before = case.clone();
    let removal = case.remove_line(0).unwrap();
    assert!(!removal.connected);
    assert!(!removal.case.branches[0].status);
    assert_eq!(case, before);
    assert!(matches!(case.remove_line(5), Err(GridError::BranchOutOfRange(5))));
    assert!(matches!(
        removal.case.remove_line(0),
        Err(GridError::BranchAlreadyOff(0))
    ));
}

#[test]
fn remove_parallel_corridor_stays_connected() {
    let case = parse_matpower(
        "mpc.baseMVA = 100;
         mpc.bus = [1 3 0 0 0 0 1 1 0 135 1 1.1 0.9; 2 1 20 2 0 0 1 1 0 135 1 1.1 0.9];
         mpc.gen = [1 0 0 50 -50 1 100 1 100 0];
         mpc.branch = [1 2 0 0.2 0 0 0 0 0 0 1 -360 360;
                       1 2 0 0.3 0 0 0 0 0 0 1 -360 360];
         mpc.gencost = [2 0 0 3 0.01 20 0];",
    )
    .unwrap();
    assert!(case.remove_line(0).unwrap().connected);
}
